#include "mdlm/dump.hpp"

#include <cstring>

#include "mdlm/errors.hpp"

namespace mdlm {

namespace {

constexpr char kMagic[4] = {'M', 'D', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::FILE* f, std::uint32_t v) {
  if (std::fwrite(&v, sizeof(v), 1, f) != 1) throw IoFailure("dump write failed");
}

void put_i32(std::FILE* f, std::int32_t v) {
  if (std::fwrite(&v, sizeof(v), 1, f) != 1) throw IoFailure("dump write failed");
}

void put_u64(std::FILE* f, std::uint64_t v) {
  if (std::fwrite(&v, sizeof(v), 1, f) != 1) throw IoFailure("dump write failed");
}

void put_f64(std::FILE* f, double v) {
  if (std::fwrite(&v, sizeof(v), 1, f) != 1) throw IoFailure("dump write failed");
}

void put_doubles(std::FILE* f, const double* p, std::size_t n) {
  if (std::fwrite(p, sizeof(double), n, f) != n) {
    throw IoFailure("dump write failed");
  }
}

template <typename T>
bool get_pod(std::FILE* f, T& v) {
  return std::fread(&v, sizeof(T), 1, f) == 1;
}

bool get_doubles(std::FILE* f, double* p, std::size_t n) {
  return std::fread(p, sizeof(double), n, f) == n;
}

}  // namespace

DumpWriter::DumpWriter(const std::string& path, const DumpHeader& header)
    : path_(path), header_(header) {
  if (header.T <= 0 || header.p <= 0 || header.q_nominal <= 0) {
    throw BadOption("dump header needs positive T, p, q");
  }
  file_ = std::fopen(path.c_str(), "wb");
  if (!file_) throw IoFailure("cannot open '" + path + "' for writing");
  try {
    if (std::fwrite(kMagic, 1, 4, file_) != 4) throw IoFailure("dump write failed");
    put_u32(file_, kVersion);
    put_u32(file_, static_cast<std::uint32_t>(header.kind));
    put_u32(file_, static_cast<std::uint32_t>(header.dims.nx));
    put_u32(file_, static_cast<std::uint32_t>(header.dims.ny));
    put_u32(file_, static_cast<std::uint32_t>(header.dims.nz));
    put_u32(file_, static_cast<std::uint32_t>(header.T));
    put_u32(file_, static_cast<std::uint32_t>(header.p));
    put_u32(file_, static_cast<std::uint32_t>(header.q_nominal));
    put_u32(file_, header.n_voxels);
    put_i32(file_, header.radius);
    put_f64(file_, header.discount);
    put_f64(file_, header.n0);
    put_f64(file_, header.c0_scale);
    put_f64(file_, header.s0_scale);
    put_u32(file_, header.n_subjects);
    put_f64(file_, header.pooled_dof);
  } catch (...) {
    std::fclose(file_);
    file_ = nullptr;
    throw;
  }
}

DumpWriter::~DumpWriter() {
  if (file_) std::fclose(file_);
}

void DumpWriter::write(const VoxelRecord& record) {
  if (!file_) throw IoFailure("dump writer already closed");
  const MomentSeries& s = record.series;
  if (s.T() != header_.T || s.p != header_.p) {
    throw DimensionMismatch("record series is (T=" + std::to_string(s.T()) +
                            ", p=" + std::to_string(s.p) +
                            "), dump expects (T=" + std::to_string(header_.T) +
                            ", p=" + std::to_string(header_.p) + ")");
  }
  if (s.q <= 0 || s.q > header_.q_nominal) {
    throw DimensionMismatch("record q = " + std::to_string(s.q) +
                            " outside [1," + std::to_string(header_.q_nominal) +
                            "]");
  }
  if (written_ == header_.n_voxels) {
    throw IoFailure("dump already holds the declared " +
                    std::to_string(header_.n_voxels) + " records");
  }
  put_u64(file_, record.voxel);
  put_u32(file_, static_cast<std::uint32_t>(s.q));
  for (const PosteriorMoments& pm : s.at) put_f64(file_, pm.n);
  for (const PosteriorMoments& pm : s.at) {
    put_doubles(file_, pm.m.data(), static_cast<std::size_t>(s.p) *
                                        static_cast<std::size_t>(s.q));
  }
  for (const PosteriorMoments& pm : s.at) {
    put_doubles(file_, pm.c.data(), static_cast<std::size_t>(s.p) *
                                        static_cast<std::size_t>(s.p));
  }
  for (const PosteriorMoments& pm : s.at) {
    put_doubles(file_, pm.s.data(), static_cast<std::size_t>(s.q) *
                                        static_cast<std::size_t>(s.q));
  }
  ++written_;
}

void DumpWriter::close() {
  if (!file_) return;
  const bool count_ok = written_ == header_.n_voxels;
  const bool flush_ok = std::fflush(file_) == 0;
  const bool close_ok = std::fclose(file_) == 0;
  file_ = nullptr;
  if (!count_ok) {
    throw IoFailure("dump '" + path_ + "' holds " + std::to_string(written_) +
                    " records, header declares " +
                    std::to_string(header_.n_voxels));
  }
  if (!flush_ok || !close_ok) throw IoFailure("failed writing '" + path_ + "'");
}

DumpReader::DumpReader(const std::string& path) : path_(path) {
  file_ = std::fopen(path.c_str(), "rb");
  if (!file_) throw InputError("cannot open dump '" + path + "'");
  char magic[4];
  if (std::fread(magic, 1, 4, file_) != 4) {
    std::fclose(file_);
    file_ = nullptr;
    throw TruncatedFile("'" + path + "': shorter than the dump magic");
  }
  if (std::memcmp(magic, kMagic, 4) != 0) {
    std::fclose(file_);
    file_ = nullptr;
    throw BadMagic("'" + path + "': magic '" + std::string(magic, magic + 4) +
                   "', expected 'MDLM'");
  }
  std::uint32_t version = 0, kind = 0, nx = 0, ny = 0, nz = 0, T = 0, p = 0,
                q = 0;
  std::int32_t radius = 0;
  bool ok = get_pod(file_, version);
  ok = ok && get_pod(file_, kind) && get_pod(file_, nx) && get_pod(file_, ny) &&
       get_pod(file_, nz) && get_pod(file_, T) && get_pod(file_, p) &&
       get_pod(file_, q) && get_pod(file_, header_.n_voxels) &&
       get_pod(file_, radius) && get_pod(file_, header_.discount) &&
       get_pod(file_, header_.n0) && get_pod(file_, header_.c0_scale) &&
       get_pod(file_, header_.s0_scale) && get_pod(file_, header_.n_subjects) &&
       get_pod(file_, header_.pooled_dof);
  if (!ok) {
    std::fclose(file_);
    file_ = nullptr;
    throw TruncatedFile("'" + path + "': incomplete dump header");
  }
  if (version != kVersion) {
    std::fclose(file_);
    file_ = nullptr;
    throw BadHeader("'" + path + "': dump version " + std::to_string(version) +
                    ", expected " + std::to_string(kVersion));
  }
  if (kind > 1) {
    std::fclose(file_);
    file_ = nullptr;
    throw BadHeader("'" + path + "': dump kind " + std::to_string(kind) +
                    " not in {0, 1}");
  }
  header_.kind = static_cast<DumpKind>(kind);
  header_.dims = {static_cast<int>(nx), static_cast<int>(ny),
                  static_cast<int>(nz)};
  header_.T = static_cast<int>(T);
  header_.p = static_cast<int>(p);
  header_.q_nominal = static_cast<int>(q);
  header_.radius = radius;
  if (header_.T <= 0 || header_.p <= 0 || header_.q_nominal <= 0) {
    std::fclose(file_);
    file_ = nullptr;
    throw BadHeader("'" + path + "': non-positive T, p or q in dump header");
  }
}

DumpReader::~DumpReader() {
  if (file_) std::fclose(file_);
}

bool DumpReader::next(VoxelRecord& record) {
  if (!file_) throw IoFailure("dump reader already closed");
  if (read_ == header_.n_voxels) return false;
  std::uint64_t voxel = 0;
  if (!get_pod(file_, voxel)) {
    throw TruncatedFile("'" + path_ + "': ends after " + std::to_string(read_) +
                        " of " + std::to_string(header_.n_voxels) + " records");
  }
  std::uint32_t q32 = 0;
  bool ok = get_pod(file_, q32);
  const int q = static_cast<int>(q32);
  if (ok && (q <= 0 || q > header_.q_nominal)) {
    throw BadHeader("'" + path_ + "': record q = " + std::to_string(q) +
                    " outside [1," + std::to_string(header_.q_nominal) + "]");
  }
  const int T = header_.T;
  const int p = header_.p;
  MomentSeries& s = record.series;
  s.p = p;
  s.q = q;
  s.discount = header_.discount;
  s.at.assign(static_cast<std::size_t>(T) + 1, PosteriorMoments{});
  for (auto& pm : s.at) ok = ok && get_pod(file_, pm.n);
  for (auto& pm : s.at) {
    pm.m.resize(p, q);
    ok = ok && get_doubles(file_, pm.m.data(),
                           static_cast<std::size_t>(p) * static_cast<std::size_t>(q));
  }
  for (auto& pm : s.at) {
    pm.c.resize(p, p);
    ok = ok && get_doubles(file_, pm.c.data(),
                           static_cast<std::size_t>(p) * static_cast<std::size_t>(p));
  }
  for (auto& pm : s.at) {
    pm.s.resize(q, q);
    ok = ok && get_doubles(file_, pm.s.data(),
                           static_cast<std::size_t>(q) * static_cast<std::size_t>(q));
  }
  if (!ok) {
    throw TruncatedFile("'" + path_ + "': record " + std::to_string(read_) +
                        " is incomplete");
  }
  s.dof = s.at.back().n;
  record.voxel = voxel;
  ++read_;
  return true;
}

}  // namespace mdlm
