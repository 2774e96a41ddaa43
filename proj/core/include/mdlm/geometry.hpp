#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "mdlm/errors.hpp"

// Voxel grids.  Linear indices run x fastest, then y, then z, matching the
// on-disk order of NIfTI volumes.

namespace mdlm {

struct VoxelIndex {
  int x = 0;
  int y = 0;
  int z = 0;

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;

  // Lexicographic by (x, y, z); used wherever voxel lists need a fixed order.
  friend bool operator<(const VoxelIndex& a, const VoxelIndex& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
  }
};

struct GridDims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  friend bool operator==(const GridDims&, const GridDims&) = default;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }

  bool contains(const VoxelIndex& v) const {
    return v.x >= 0 && v.x < nx && v.y >= 0 && v.y < ny && v.z >= 0 && v.z < nz;
  }

  std::size_t linear(const VoxelIndex& v) const {
    if (!contains(v)) {
      throw IndexOutOfRange("voxel (" + std::to_string(v.x) + "," +
                            std::to_string(v.y) + "," + std::to_string(v.z) +
                            ") outside grid " + std::to_string(nx) + "x" +
                            std::to_string(ny) + "x" + std::to_string(nz));
    }
    return static_cast<std::size_t>(v.x) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(v.y) +
                static_cast<std::size_t>(ny) * static_cast<std::size_t>(v.z));
  }

  VoxelIndex unlinear(std::size_t i) const {
    VoxelIndex v;
    v.x = static_cast<int>(i % static_cast<std::size_t>(nx));
    i /= static_cast<std::size_t>(nx);
    v.y = static_cast<int>(i % static_cast<std::size_t>(ny));
    v.z = static_cast<int>(i / static_cast<std::size_t>(ny));
    return v;
  }
};

}  // namespace mdlm
