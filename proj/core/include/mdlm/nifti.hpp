#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mdlm/geometry.hpp"

// NIfTI-1 single-file (.nii / .nii.gz) volumes, little-endian subset.
//
// The reader rejects rather than guesses: anything outside the supported
// configuration (magic "n+1", dim[0] in {3,4}, datatype in {uint8, int16,
// int32, float32, float64}) raises a typed error naming the offending field.
// Byte-swapped files show up as an impossible sizeof_hdr and are rejected the
// same way.  Data is converted to float32 with scl_slope/scl_inter applied;
// the original header travels with the volume so spatial metadata (affine,
// intent, description) survives a read-modify-write round trip.

namespace mdlm {

#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;     // must be 348
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)

static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must pack to 348 bytes");

struct Volume4D {
  GridDims dims;
  int T = 1;
  std::array<double, 3> voxel_mm = {1.0, 1.0, 1.0};
  double tr_seconds = 0.0;
  std::vector<float> data;  // x fastest, then y, z, t
  Nifti1Header header{};    // as read; preserved on write
  bool has_header = false;

  static Volume4D zeros(const GridDims& dims, int T = 1);

  std::size_t index(int x, int y, int z, int t = 0) const;
  float at(int x, int y, int z, int t = 0) const { return data[index(x, y, z, t)]; }
  float& at(int x, int y, int z, int t = 0) { return data[index(x, y, z, t)]; }
  float at(const VoxelIndex& v, int t = 0) const { return at(v.x, v.y, v.z, t); }
  float& at(const VoxelIndex& v, int t = 0) { return at(v.x, v.y, v.z, t); }
};

// Reads .nii or .nii.gz (gzip is detected from the stream, not the name).
Volume4D read_nifti1(const std::string& path);

// Writes an uncompressed .nii (datatype float32, scl_slope 1).  Volumes with
// T == 1 are written as 3-dimensional.
void write_nifti1(const Volume4D& volume, const std::string& path);

}  // namespace mdlm
