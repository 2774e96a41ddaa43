#include "mdlm/nifti.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "mdlm/errors.hpp"

namespace mdlm {

namespace {

// Supported datatype codes.
constexpr std::int16_t kUint8 = 2;
constexpr std::int16_t kInt16 = 4;
constexpr std::int16_t kInt32 = 8;
constexpr std::int16_t kFloat32 = 16;
constexpr std::int16_t kFloat64 = 64;

int bytes_per_voxel(std::int16_t datatype) {
  switch (datatype) {
    case kUint8: return 1;
    case kInt16: return 2;
    case kInt32: return 4;
    case kFloat32: return 4;
    case kFloat64: return 8;
    default: return 0;
  }
}

// gzread-based reader; zlib transparently handles plain files too.
class GzFile {
 public:
  explicit GzFile(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {
    if (!file_) throw InputError("cannot open '" + path + "'");
  }
  ~GzFile() {
    if (file_) gzclose(file_);
  }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;

  // Reads exactly n bytes or returns the short count.
  std::size_t read(void* out, std::size_t n) {
    std::size_t got = 0;
    auto* p = static_cast<unsigned char*>(out);
    while (got < n) {
      const unsigned chunk = static_cast<unsigned>(
          std::min<std::size_t>(n - got, 1u << 20));
      const int r = gzread(file_, p + got, chunk);
      if (r < 0) throw InputError("gzip read error");
      if (r == 0) break;
      got += static_cast<std::size_t>(r);
    }
    return got;
  }

 private:
  gzFile file_;
};

float convert_voxel(const unsigned char* p, std::int16_t datatype) {
  switch (datatype) {
    case kUint8:
      return static_cast<float>(*p);
    case kInt16: {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      return static_cast<float>(v);
    }
    case kInt32: {
      std::int32_t v;
      std::memcpy(&v, p, 4);
      return static_cast<float>(v);
    }
    case kFloat32: {
      float v;
      std::memcpy(&v, p, 4);
      return v;
    }
    case kFloat64: {
      double v;
      std::memcpy(&v, p, 8);
      return static_cast<float>(v);
    }
    default:
      return 0.0f;
  }
}

}  // namespace

Volume4D Volume4D::zeros(const GridDims& dims, int T) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0 || T <= 0) {
    throw BadOption("volume dimensions must be positive");
  }
  Volume4D v;
  v.dims = dims;
  v.T = T;
  v.data.assign(dims.count() * static_cast<std::size_t>(T), 0.0f);
  return v;
}

std::size_t Volume4D::index(int x, int y, int z, int t) const {
  if (t < 0 || t >= T) {
    throw IndexOutOfRange("time index " + std::to_string(t) + " outside [0," +
                          std::to_string(T) + ")");
  }
  return dims.linear({x, y, z}) +
         dims.count() * static_cast<std::size_t>(t);
}

Volume4D read_nifti1(const std::string& path) {
  GzFile in(path);
  Nifti1Header hdr;
  if (in.read(&hdr, sizeof(hdr)) != sizeof(hdr)) {
    throw TruncatedFile("'" + path + "': shorter than the 348-byte header");
  }
  if (hdr.sizeof_hdr != 348) {
    // 0x5c010000 is 348 byte-swapped; worth naming since it is the common way
    // a big-endian file shows up.
    std::string detail = std::to_string(hdr.sizeof_hdr);
    if (hdr.sizeof_hdr == 0x5c010000) detail += " (byte-swapped file?)";
    throw BadHeader("'" + path + "': sizeof_hdr = " + detail + ", expected 348");
  }
  if (std::memcmp(hdr.magic, "n+1", 4) != 0) {
    std::string magic(hdr.magic, hdr.magic + 3);
    std::string hint =
        std::memcmp(hdr.magic, "ni1", 4) == 0 ? " (two-file ni1 unsupported)" : "";
    throw BadMagic("'" + path + "': magic '" + magic + "'" + hint +
                   ", expected 'n+1'");
  }
  if (hdr.dim[0] != 3 && hdr.dim[0] != 4) {
    throw BadHeader("'" + path + "': dim[0] = " + std::to_string(hdr.dim[0]) +
                    ", expected 3 or 4");
  }
  for (int i = 1; i <= hdr.dim[0]; ++i) {
    if (hdr.dim[i] <= 0) {
      throw BadHeader("'" + path + "': dim[" + std::to_string(i) +
                      "] = " + std::to_string(hdr.dim[i]) + " must be positive");
    }
  }
  const int bpv = bytes_per_voxel(hdr.datatype);
  if (bpv == 0) {
    throw UnsupportedDatatype("'" + path + "': datatype " +
                              std::to_string(hdr.datatype) +
                              " not in {2, 4, 8, 16, 64}");
  }
  if (hdr.bitpix != 8 * bpv) {
    throw BadHeader("'" + path + "': bitpix " + std::to_string(hdr.bitpix) +
                    " inconsistent with datatype " + std::to_string(hdr.datatype));
  }
  if (hdr.vox_offset < 348.0f) {
    throw BadHeader("'" + path + "': vox_offset " +
                    std::to_string(hdr.vox_offset) + " below 348");
  }

  Volume4D vol;
  vol.dims = {hdr.dim[1], hdr.dim[2], hdr.dim[3]};
  vol.T = hdr.dim[0] == 4 ? hdr.dim[4] : 1;
  vol.voxel_mm = {static_cast<double>(hdr.pixdim[1]),
                  static_cast<double>(hdr.pixdim[2]),
                  static_cast<double>(hdr.pixdim[3])};
  vol.tr_seconds = hdr.dim[0] == 4 ? static_cast<double>(hdr.pixdim[4]) : 0.0;
  vol.header = hdr;
  vol.has_header = true;

  // Skip to the data section.
  const std::size_t offset = static_cast<std::size_t>(hdr.vox_offset);
  std::size_t to_skip = offset - sizeof(hdr);
  unsigned char skip_buf[512];
  while (to_skip > 0) {
    const std::size_t got =
        in.read(skip_buf, std::min<std::size_t>(to_skip, sizeof(skip_buf)));
    if (got == 0) {
      throw TruncatedFile("'" + path + "': ends before vox_offset " +
                          std::to_string(offset));
    }
    to_skip -= got;
  }

  const std::size_t n = vol.dims.count() * static_cast<std::size_t>(vol.T);
  std::vector<unsigned char> raw(n * static_cast<std::size_t>(bpv));
  const std::size_t got = in.read(raw.data(), raw.size());
  if (got != raw.size()) {
    throw TruncatedFile("'" + path + "': data section has " +
                        std::to_string(got) + " bytes, expected " +
                        std::to_string(raw.size()));
  }

  vol.data.resize(n);
  const bool scale = hdr.scl_slope != 0.0f &&
                     !(hdr.scl_slope == 1.0f && hdr.scl_inter == 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    float v = convert_voxel(raw.data() + i * static_cast<std::size_t>(bpv),
                            hdr.datatype);
    if (scale) v = hdr.scl_slope * v + hdr.scl_inter;
    vol.data[i] = v;
  }
  return vol;
}

void write_nifti1(const Volume4D& volume, const std::string& path) {
  if (volume.dims.count() == 0 || volume.T <= 0) {
    throw BadOption("cannot write an empty volume");
  }
  const std::size_t n =
      volume.dims.count() * static_cast<std::size_t>(volume.T);
  if (volume.data.size() != n) {
    throw DimensionMismatch("volume data has " +
                            std::to_string(volume.data.size()) +
                            " values, dims imply " + std::to_string(n));
  }
  if (volume.dims.nx > 32767 || volume.dims.ny > 32767 ||
      volume.dims.nz > 32767 || volume.T > 32767) {
    throw BadOption("volume dimensions exceed the NIfTI-1 int16 range");
  }
  Nifti1Header hdr{};
  if (volume.has_header) hdr = volume.header;  // keep affine etc. verbatim
  hdr.sizeof_hdr = 348;
  hdr.regular = 'r';
  const bool four_d = volume.T > 1;
  hdr.dim[0] = four_d ? 4 : 3;
  hdr.dim[1] = static_cast<std::int16_t>(volume.dims.nx);
  hdr.dim[2] = static_cast<std::int16_t>(volume.dims.ny);
  hdr.dim[3] = static_cast<std::int16_t>(volume.dims.nz);
  hdr.dim[4] = static_cast<std::int16_t>(four_d ? volume.T : 1);
  for (int i = 5; i < 8; ++i) hdr.dim[i] = 1;
  hdr.datatype = kFloat32;
  hdr.bitpix = 32;
  hdr.pixdim[1] = static_cast<float>(volume.voxel_mm[0]);
  hdr.pixdim[2] = static_cast<float>(volume.voxel_mm[1]);
  hdr.pixdim[3] = static_cast<float>(volume.voxel_mm[2]);
  hdr.pixdim[4] = static_cast<float>(volume.tr_seconds);
  hdr.vox_offset = 352.0f;
  hdr.scl_slope = 1.0f;
  hdr.scl_inter = 0.0f;
  std::memcpy(hdr.magic, "n+1", 4);

  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw IoFailure("cannot open '" + path + "' for writing");
  const char extension[4] = {0, 0, 0, 0};
  bool ok = std::fwrite(&hdr, sizeof(hdr), 1, out) == 1 &&
            std::fwrite(extension, sizeof(extension), 1, out) == 1 &&
            std::fwrite(volume.data.data(), sizeof(float), n, out) == n;
  ok = std::fclose(out) == 0 && ok;
  if (!ok) throw IoFailure("failed writing '" + path + "'");
}

}  // namespace mdlm
