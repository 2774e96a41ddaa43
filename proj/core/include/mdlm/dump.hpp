#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "mdlm/filter.hpp"
#include "mdlm/geometry.hpp"

// Posterior moment dumps: the full filtered trajectories (m, C, S, n for
// t = 0..T, prior included) for every in-mask voxel, written as a streaming
// binary file so neither writer nor reader ever holds a whole volume of
// moments.
//
// Layout (little-endian):
//   magic "MDLM" | u32 version = 1 | u32 kind (0 subject, 1 group)
//   u32 nx ny nz | u32 T p q_nominal | u32 n_voxels | i32 radius
//   f64 discount n0 c0_scale s0_scale | u32 n_subjects | f64 pooled_dof
//   then n_voxels records:
//     u64 voxel (linear index) | u32 q
//     f64 n[T+1] | f64 m[(T+1) p q] | f64 C[(T+1) p p] | f64 S[(T+1) q q]
//   matrices column-major, time-major blocks.
// q varies per record (edge clusters are smaller than q_nominal).

namespace mdlm {

enum class DumpKind : std::uint32_t { subject = 0, group = 1 };

struct DumpHeader {
  DumpKind kind = DumpKind::subject;
  GridDims dims;
  int T = 0;
  int p = 0;
  int q_nominal = 0;
  std::uint32_t n_voxels = 0;
  int radius = 1;
  double discount = 0.95;
  double n0 = 1.0;
  double c0_scale = 100.0;
  double s0_scale = 1.0;
  std::uint32_t n_subjects = 1;
  double pooled_dof = 0.0;
};

struct VoxelRecord {
  std::uint64_t voxel = 0;
  MomentSeries series;
};

class DumpWriter {
 public:
  DumpWriter(const std::string& path, const DumpHeader& header);
  ~DumpWriter();
  DumpWriter(const DumpWriter&) = delete;
  DumpWriter& operator=(const DumpWriter&) = delete;

  void write(const VoxelRecord& record);
  // Flushes and verifies that exactly n_voxels records were written.
  void close();

 private:
  std::string path_;
  DumpHeader header_;
  std::FILE* file_ = nullptr;
  std::uint32_t written_ = 0;
};

class DumpReader {
 public:
  explicit DumpReader(const std::string& path);
  ~DumpReader();
  DumpReader(const DumpReader&) = delete;
  DumpReader& operator=(const DumpReader&) = delete;

  const DumpHeader& header() const { return header_; }
  // Reads the next record; false at clean end-of-file.
  bool next(VoxelRecord& record);

 private:
  std::string path_;
  DumpHeader header_;
  std::FILE* file_ = nullptr;
  std::uint32_t read_ = 0;
};

}  // namespace mdlm
