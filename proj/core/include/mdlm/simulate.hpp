#pragma once

#include <string>
#include <vector>

#include "mdlm/design.hpp"
#include "mdlm/nifti.hpp"

// Synthetic group BOLD data.  Active voxels carry an HRF-shaped response to
// the stimulus track with per-subject amplitude ~ N(amplitude,
// subject_amplitude_sd^2); every voxel carries exchangeable Gaussian noise
//
//   noise_sd * (sqrt(rho) g_t + sqrt(1 - rho) e_vt)
//
// with g shared across the subject's voxels, plus optional AR(1) temporal
// structure on both components.  Every stream is keyed by (seed, subject,
// voxel/tag), so a given subject's data never depends on how many others are
// generated.

namespace mdlm {

struct ActiveRegion {
  enum class Shape { box, sphere };
  Shape shape = Shape::sphere;
  // box: inclusive corners
  VoxelIndex lo, hi;
  // sphere: Euclidean ball of radius_vox voxels around center
  VoxelIndex center;
  double radius_vox = 0.0;

  bool contains(const VoxelIndex& v) const;
  void validate(const GridDims& dims) const;
};

struct SimSpec {
  GridDims dims{8, 8, 4};
  int T = 60;
  double tr_seconds = 2.0;
  std::vector<StimulusTrack> tracks;  // block/event timing for the signal
  HrfParams hrf;
  int oversample = 16;
  ActiveRegion region;
  int n_subjects = 1;
  double amplitude = 1.0;            // group-mean response, noise-sd units
  double subject_amplitude_sd = 0.0;
  double noise_sd = 1.0;
  double spatial_rho = 0.0;          // exchangeable correlation in [0, 1)
  double temporal_ar1 = 0.0;         // AR(1) coefficient in (-1, 1)
  std::uint64_t seed = 0;
  std::array<double, 3> voxel_mm = {3.0, 3.0, 3.0};

  void validate() const;
};

struct SimOutput {
  std::vector<Volume4D> subjects;     // T-length BOLD per subject
  Volume4D truth;                     // 1 where active
  std::vector<double> amplitudes;     // realized per-subject amplitudes
  std::vector<double> regressor;      // the noise-free response shape
};

SimOutput simulate_group(const SimSpec& spec);

SimSpec sim_spec_from_json(const std::string& text);
std::string sim_spec_to_json(const SimSpec& spec);

}  // namespace mdlm
