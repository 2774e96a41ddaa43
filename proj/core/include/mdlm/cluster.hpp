#pragma once

#include <vector>

#include "mdlm/linalg.hpp"
#include "mdlm/nifti.hpp"

// Voxel neighborhoods.  Each voxel is analyzed jointly with the mask-included
// voxels of the Chebyshev ball of a given radius around it (radius 1 = the
// 3x3x3 cube, up to q = 27 series).  Members are ordered center first, then
// lexicographically by (x, y, z), so column 0 of every cluster series is the
// center voxel.

namespace mdlm {

class VolumeMask {
 public:
  VolumeMask() = default;
  // Marks voxels with |value| > threshold at t = 0.
  static VolumeMask from_volume(const Volume4D& volume, double threshold = 0.0);
  static VolumeMask full(const GridDims& dims);

  const GridDims& dims() const { return dims_; }
  bool contains(const VoxelIndex& v) const {
    return dims_.contains(v) && in_[dims_.linear(v)] != 0;
  }
  std::size_t count() const;
  // Included voxels in linear-index order.
  std::vector<VoxelIndex> included() const;

 private:
  GridDims dims_;
  std::vector<std::uint8_t> in_;
};

struct ClusterSpec {
  VoxelIndex center;
  std::vector<VoxelIndex> members;  // center first

  int q() const { return static_cast<int>(members.size()); }
};

struct ClusterSeries {
  ClusterSpec spec;
  Matrix values;  // T x q, column j is members[j]
};

// Chebyshev ball around center, clipped to the grid and the mask.  The
// center itself must be inside the mask.
ClusterSpec build_cluster(const VolumeMask& mask, const VoxelIndex& center,
                          int radius);

ClusterSeries extract_series(const Volume4D& bold, const ClusterSpec& spec);

}  // namespace mdlm
