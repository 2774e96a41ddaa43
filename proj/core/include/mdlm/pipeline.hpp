#pragma once

#include <string>
#include <vector>

#include "mdlm/cluster.hpp"
#include "mdlm/dump.hpp"
#include "mdlm/samplers.hpp"

// End-to-end orchestration: per-voxel cluster filtering into dumps, group
// combination of dumps, and Monte Carlo evidence maps.  All voxel loops run
// through parallel_for with per-voxel keyed randomness, so results do not
// depend on the worker count; dump records and volumes are always emitted in
// linear voxel order.

namespace mdlm {

struct FitOptions {
  int radius = 1;
  double discount = 0.95;
  double c0_scale = 100.0;
  double s0_scale = 1.0;
  double n0 = 1.0;
  int workers = 0;  // 0: MDLM_WORKERS or hardware concurrency

  void validate() const;
};

struct FitSummary {
  std::size_t n_voxels = 0;
  int T = 0;
  int p = 0;
  int q_nominal = 0;
  double final_dof = 0.0;
  bool degraded = false;  // final dof below the normal-approximation threshold
};

// Filters every in-mask voxel's cluster series and streams the moments to a
// subject dump at out_path.
FitSummary fit_to_dump(const Volume4D& bold, const VolumeMask& mask,
                       const DesignMatrix& design, const FitOptions& opt,
                       const std::string& out_path);

struct GroupSummary {
  std::size_t n_voxels = 0;
  std::uint32_t n_subjects = 0;
  double pooled_dof = 0.0;
};

// Combines subject dumps (streamed in lockstep) into a group dump.  Headers
// must agree on grid, design shape, radius, discount and prior; pooled_dof_override
// replaces the sum-minus-(N-1) default when non-zero.
GroupSummary combine_dumps(const std::vector<std::string>& subject_dumps,
                           const std::string& out_path,
                           double pooled_dof_override = 0.0);

struct MapOptions {
  SamplerConfig cfg;
  int workers = 0;
  double threshold = 0.95;  // evidence level for the thresholded mask
};

struct MapResult {
  Volume4D evidence;         // 3D evidence map, zero outside the dump voxels
  Volume4D above_threshold;  // 1 where evidence >= threshold
  std::size_t n_voxels = 0;
  std::size_t degraded = 0;  // voxels whose final dof fell below the threshold
  DumpHeader source;
};

// Evidence map from dumps: one dump (group or subject) for fest/fsts/ffbs,
// or the per-subject dumps for ag.  design is required for fest (and an ag
// fest base); other samplers run without it.
MapResult evidence_map(const std::vector<std::string>& dumps,
                       const DesignMatrix* design, const MapOptions& opt);

// In-memory study: filter + combine + sample per voxel in one pass, returning
// one evidence volume per sampler configuration.  Row-trajectory draws are
// shared between configurations that differ only in effect or rule, exactly
// as the per-configuration maps would compute them.
std::vector<Volume4D> evidence_study(const std::vector<Volume4D>& bold,
                                     const VolumeMask& mask,
                                     const DesignMatrix& design,
                                     const FitOptions& fit_opt,
                                     const std::vector<SamplerConfig>& configs,
                                     int workers);

}  // namespace mdlm
