#include "mdlm/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mdlm {

VolumeMask VolumeMask::from_volume(const Volume4D& volume, double threshold) {
  VolumeMask mask;
  mask.dims_ = volume.dims;
  mask.in_.assign(volume.dims.count(), 0);
  for (std::size_t i = 0; i < mask.in_.size(); ++i) {
    mask.in_[i] = std::abs(static_cast<double>(volume.data[i])) > threshold;
  }
  return mask;
}

VolumeMask VolumeMask::full(const GridDims& dims) {
  VolumeMask mask;
  mask.dims_ = dims;
  mask.in_.assign(dims.count(), 1);
  return mask;
}

std::size_t VolumeMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t v : in_) n += v;
  return n;
}

std::vector<VoxelIndex> VolumeMask::included() const {
  std::vector<VoxelIndex> out;
  out.reserve(count());
  for (std::size_t i = 0; i < in_.size(); ++i) {
    if (in_[i]) out.push_back(dims_.unlinear(i));
  }
  return out;
}

ClusterSpec build_cluster(const VolumeMask& mask, const VoxelIndex& center,
                          int radius) {
  if (radius < 0) throw BadOption("cluster radius must be non-negative");
  if (!mask.dims().contains(center)) {
    throw IndexOutOfRange("cluster center (" + std::to_string(center.x) + "," +
                          std::to_string(center.y) + "," +
                          std::to_string(center.z) + ") outside the grid");
  }
  if (!mask.contains(center)) {
    throw InputError("cluster center (" + std::to_string(center.x) + "," +
                     std::to_string(center.y) + "," + std::to_string(center.z) +
                     ") is not inside the mask");
  }
  ClusterSpec spec;
  spec.center = center;
  std::vector<VoxelIndex> others;
  for (int dz = -radius; dz <= radius; ++dz) {
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        const VoxelIndex v{center.x + dx, center.y + dy, center.z + dz};
        if (v == center || !mask.contains(v)) continue;
        others.push_back(v);
      }
    }
  }
  std::sort(others.begin(), others.end());
  spec.members.reserve(others.size() + 1);
  spec.members.push_back(center);
  spec.members.insert(spec.members.end(), others.begin(), others.end());
  return spec;
}

ClusterSeries extract_series(const Volume4D& bold, const ClusterSpec& spec) {
  if (spec.members.empty() || !(spec.members.front() == spec.center)) {
    throw InputError("cluster members must start with the center voxel");
  }
  ClusterSeries series;
  series.spec = spec;
  series.values.resize(bold.T, spec.q());
  for (int j = 0; j < spec.q(); ++j) {
    const VoxelIndex& v = spec.members[static_cast<std::size_t>(j)];
    for (int t = 0; t < bold.T; ++t) {
      series.values(t, j) = static_cast<double>(bold.at(v, t));
    }
  }
  return series;
}

}  // namespace mdlm
