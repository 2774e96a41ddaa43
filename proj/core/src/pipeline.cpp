#include "mdlm/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <memory>
#include <string>

#include "mdlm/errors.hpp"
#include "mdlm/group.hpp"
#include "mdlm/parallel.hpp"

namespace mdlm {

namespace {

constexpr std::size_t kBatch = 128;

int chebyshev_cluster_cap(int radius) {
  const int side = 2 * radius + 1;
  return side * side * side;
}

MomentSeries filter_voxel_series(const Volume4D& bold, const VolumeMask& mask,
                                 const VoxelIndex& center,
                                 const DesignMatrix& design,
                                 const EvolutionSpec& evolution,
                                 const FitOptions& opt) {
  const ClusterSpec cluster = build_cluster(mask, center, opt.radius);
  const ClusterSeries series = extract_series(bold, cluster);
  const PriorSpec prior = PriorSpec::standard(
      design.p(), cluster.q(), opt.c0_scale, opt.s0_scale, opt.n0);
  return filter_series(series.values, design, evolution, prior).series;
}

void check_same_header(const DumpHeader& a, const DumpHeader& b,
                       const std::string& path) {
  const bool same =
      a.dims == b.dims && a.T == b.T && a.p == b.p &&
      a.q_nominal == b.q_nominal && a.n_voxels == b.n_voxels &&
      a.radius == b.radius && a.discount == b.discount && a.n0 == b.n0 &&
      a.c0_scale == b.c0_scale && a.s0_scale == b.s0_scale;
  if (!same) {
    throw DimensionMismatch("dump '" + path +
                            "' disagrees with the first dump's grid or settings");
  }
}

// One voxel's evidence for one configuration, counting positives over the
// streamed trajectory draws.
double voxel_evidence(const std::vector<const MomentSeries*>& series,
                      std::uint64_t voxel, const DesignMatrix* design,
                      const EvolutionSpec& evolution, const SamplerConfig& cfg,
                      int covariate) {
  const RngKey key{cfg.seed, voxel};
  std::size_t positive = 0;
  switch (cfg.sampler) {
    case SamplerKind::fest:
      for_each_fest_trajectory(
          *series.front(), *design, evolution, cfg.effect, cfg.n_simu,
          covariate, key, 0, [&](int, const Matrix& traj) {
            positive += trajectory_positive(traj, cfg.rule, cfg.joint_rule);
          });
      break;
    case SamplerKind::fsts:
    case SamplerKind::ffbs:
      for_each_row_trajectory(
          *series.front(), evolution, cfg.sampler, cfg.n_simu, covariate, key,
          0, [&](int, const Matrix& rows) {
            positive += row_trajectory_positive(rows, cfg.effect, cfg.rule,
                                                cfg.joint_rule);
          });
      break;
    case SamplerKind::ag:
      if (cfg.ag_base == SamplerKind::fest) {
        const std::vector<Trajectory> trajs =
            ag_sample(series, design, evolution, cfg, key);
        std::size_t count = 0;
        for (const Trajectory& traj : trajs) {
          count += trajectory_positive(traj.values, cfg.rule, cfg.joint_rule);
        }
        positive = count;
      } else {
        for_each_ag_row_trajectory(
            series, evolution, cfg.ag_base, cfg.n_simu, covariate, key,
            [&](int, const Matrix& rows) {
              positive += row_trajectory_positive(rows, cfg.effect, cfg.rule,
                                                  cfg.joint_rule);
            });
      }
      break;
  }
  return static_cast<double>(positive) / static_cast<double>(cfg.n_simu);
}

}  // namespace

void FitOptions::validate() const {
  if (radius < 0) throw BadOption("cluster radius must be non-negative");
  if (!(discount > 0.0) || discount > 1.0) {
    throw BadOption("discount factor must lie in (0, 1]");
  }
  if (!(c0_scale > 0.0) || !(s0_scale > 0.0) || !(n0 > 0.0)) {
    throw BadOption("prior scales and n0 must be positive");
  }
}

FitSummary fit_to_dump(const Volume4D& bold, const VolumeMask& mask,
                       const DesignMatrix& design, const FitOptions& opt,
                       const std::string& out_path) {
  opt.validate();
  if (!(mask.dims() == bold.dims)) {
    throw DimensionMismatch("mask grid does not match the BOLD grid");
  }
  if (design.T() != bold.T) {
    throw DimensionMismatch("design has " + std::to_string(design.T()) +
                            " scans, BOLD has " + std::to_string(bold.T));
  }
  const std::vector<VoxelIndex> voxels = mask.included();
  if (voxels.empty()) throw InputError("mask selects no voxels");
  const EvolutionSpec evolution =
      EvolutionSpec::random_walk(design.p(), opt.discount);

  DumpHeader header;
  header.kind = DumpKind::subject;
  header.dims = bold.dims;
  header.T = bold.T;
  header.p = design.p();
  header.q_nominal = chebyshev_cluster_cap(opt.radius);
  header.n_voxels = static_cast<std::uint32_t>(voxels.size());
  header.radius = opt.radius;
  header.discount = opt.discount;
  header.n0 = opt.n0;
  header.c0_scale = opt.c0_scale;
  header.s0_scale = opt.s0_scale;
  header.n_subjects = 1;
  header.pooled_dof = opt.n0 + bold.T;

  DumpWriter writer(out_path, header);
  std::vector<VoxelRecord> batch(std::min<std::size_t>(kBatch, voxels.size()));
  for (std::size_t start = 0; start < voxels.size(); start += kBatch) {
    const std::size_t count = std::min(kBatch, voxels.size() - start);
    parallel_for(count, opt.workers, [&](std::size_t i) {
      const VoxelIndex& v = voxels[start + i];
      batch[i].voxel = mask.dims().linear(v);
      batch[i].series =
          filter_voxel_series(bold, mask, v, design, evolution, opt);
    });
    for (std::size_t i = 0; i < count; ++i) writer.write(batch[i]);
  }
  writer.close();

  FitSummary summary;
  summary.n_voxels = voxels.size();
  summary.T = bold.T;
  summary.p = design.p();
  summary.q_nominal = header.q_nominal;
  summary.final_dof = header.pooled_dof;
  summary.degraded = header.pooled_dof < kNormalApproxDofThreshold;
  return summary;
}

GroupSummary combine_dumps(const std::vector<std::string>& subject_dumps,
                           const std::string& out_path,
                           double pooled_dof_override) {
  if (subject_dumps.empty()) {
    throw EmptyGroup("group combination needs at least one subject dump");
  }
  std::vector<std::unique_ptr<DumpReader>> readers;
  readers.reserve(subject_dumps.size());
  for (const std::string& path : subject_dumps) {
    readers.push_back(std::make_unique<DumpReader>(path));
    if (readers.back()->header().kind != DumpKind::subject) {
      throw InputError("dump '" + path +
                       "' is a group dump; only subject dumps combine");
    }
    check_same_header(readers.front()->header(), readers.back()->header(), path);
  }
  const DumpHeader& first = readers.front()->header();

  std::vector<double> subject_dof;
  subject_dof.reserve(readers.size());
  for (const auto& reader : readers) {
    subject_dof.push_back(reader->header().pooled_dof);
  }
  const double pooled = pooled_dof_override > 0.0
                            ? pooled_dof_override
                            : pooled_group_dof(subject_dof);

  DumpHeader header = first;
  header.kind = DumpKind::group;
  header.n_subjects = static_cast<std::uint32_t>(readers.size());
  header.pooled_dof = pooled;

  DumpWriter writer(out_path, header);
  std::vector<VoxelRecord> records(readers.size());
  std::vector<const MomentSeries*> ptrs(readers.size());
  VoxelRecord combined;
  for (std::uint32_t r = 0; r < first.n_voxels; ++r) {
    for (std::size_t z = 0; z < readers.size(); ++z) {
      if (!readers[z]->next(records[z])) {
        throw TruncatedFile("dump '" + subject_dumps[z] +
                            "' ended before the declared record count");
      }
      if (records[z].voxel != records[0].voxel ||
          records[z].series.q != records[0].series.q) {
        throw DimensionMismatch("dump '" + subject_dumps[z] +
                                "' is not voxel-aligned with the first dump");
      }
      ptrs[z] = &records[z].series;
    }
    combined.voxel = records[0].voxel;
    combined.series = combine_series(ptrs);
    writer.write(combined);
  }
  writer.close();

  GroupSummary summary;
  summary.n_voxels = first.n_voxels;
  summary.n_subjects = header.n_subjects;
  summary.pooled_dof = pooled;
  return summary;
}

MapResult evidence_map(const std::vector<std::string>& dumps,
                       const DesignMatrix* design, const MapOptions& opt) {
  opt.cfg.validate();
  const bool ag = opt.cfg.sampler == SamplerKind::ag;
  if (!ag && dumps.size() != 1) {
    throw BadOption("fest/fsts/ffbs maps take exactly one dump; got " +
                    std::to_string(dumps.size()));
  }
  if (ag && dumps.empty()) {
    throw EmptyGroup("ag maps need the per-subject dumps");
  }
  std::vector<std::unique_ptr<DumpReader>> readers;
  readers.reserve(dumps.size());
  for (const std::string& path : dumps) {
    readers.push_back(std::make_unique<DumpReader>(path));
    if (ag && readers.back()->header().kind != DumpKind::subject) {
      throw InputError("ag maps draw at the individual level; '" + path +
                       "' is not a subject dump");
    }
    check_same_header(readers.front()->header(), readers.back()->header(), path);
  }
  const DumpHeader& header = readers.front()->header();

  const bool needs_design =
      opt.cfg.sampler == SamplerKind::fest ||
      (ag && opt.cfg.ag_base == SamplerKind::fest);
  if (needs_design && design == nullptr) {
    throw InputError("fest sampling needs the design matrix");
  }
  if (design != nullptr &&
      (design->T() != header.T || design->p() != header.p)) {
    throw DimensionMismatch("design is " + std::to_string(design->T()) + "x" +
                            std::to_string(design->p()) + ", dump expects " +
                            std::to_string(header.T) + "x" +
                            std::to_string(header.p));
  }
  const int covariate = resolve_covariate(opt.cfg, header.p, design);
  const EvolutionSpec evolution =
      EvolutionSpec::random_walk(header.p, header.discount);

  MapResult result;
  result.source = header;
  result.n_voxels = header.n_voxels;
  result.evidence = Volume4D::zeros(header.dims, 1);
  result.above_threshold = Volume4D::zeros(header.dims, 1);

  std::vector<std::vector<VoxelRecord>> batch;
  std::vector<double> values(kBatch);
  std::atomic<std::size_t> degraded{0};
  std::uint32_t done = 0;
  while (done < header.n_voxels) {
    const std::size_t count =
        std::min<std::size_t>(kBatch, header.n_voxels - done);
    batch.assign(count, std::vector<VoxelRecord>(readers.size()));
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t z = 0; z < readers.size(); ++z) {
        if (!readers[z]->next(batch[i][z])) {
          throw TruncatedFile("dump '" + dumps[z] +
                              "' ended before the declared record count");
        }
        if (batch[i][z].voxel != batch[i][0].voxel ||
            batch[i][z].series.q != batch[i][0].series.q) {
          throw DimensionMismatch("dump '" + dumps[z] +
                                  "' is not voxel-aligned with the first dump");
        }
        if (readers[z]->header().kind == DumpKind::group) {
          batch[i][z].series.dof = readers[z]->header().pooled_dof;
        }
      }
    }
    parallel_for(count, opt.workers, [&](std::size_t i) {
      std::vector<const MomentSeries*> ptrs(batch[i].size());
      for (std::size_t z = 0; z < batch[i].size(); ++z) {
        ptrs[z] = &batch[i][z].series;
        if (batch[i][z].series.dof < kNormalApproxDofThreshold) {
          degraded.fetch_add(1, std::memory_order_relaxed);
        }
      }
      values[i] = voxel_evidence(ptrs, batch[i][0].voxel, design, evolution,
                                 opt.cfg, covariate);
    });
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t voxel = static_cast<std::size_t>(batch[i][0].voxel);
      if (voxel >= header.dims.count()) {
        throw BadHeader("dump record voxel index " + std::to_string(voxel) +
                        " outside the grid");
      }
      result.evidence.data[voxel] = static_cast<float>(values[i]);
      result.above_threshold.data[voxel] = values[i] >= opt.threshold ? 1.0f : 0.0f;
    }
    done += static_cast<std::uint32_t>(count);
  }
  result.degraded = degraded.load();
  if (result.degraded > 0) {
    warn(std::to_string(result.degraded) +
         " voxel posteriors had dof below " +
         std::to_string(static_cast<int>(kNormalApproxDofThreshold)) +
         "; their normal approximations are degraded");
  }
  return result;
}

std::vector<Volume4D> evidence_study(const std::vector<Volume4D>& bold,
                                     const VolumeMask& mask,
                                     const DesignMatrix& design,
                                     const FitOptions& fit_opt,
                                     const std::vector<SamplerConfig>& configs,
                                     int workers) {
  fit_opt.validate();
  if (bold.empty()) throw EmptyGroup("evidence study needs subject volumes");
  if (configs.empty()) throw BadOption("evidence study needs configurations");
  for (const Volume4D& vol : bold) {
    if (!(vol.dims == mask.dims()) || vol.T != design.T()) {
      throw DimensionMismatch("subject volumes disagree with the mask or design");
    }
  }
  for (const SamplerConfig& cfg : configs) cfg.validate();
  const EvolutionSpec evolution =
      EvolutionSpec::random_walk(design.p(), fit_opt.discount);
  const std::vector<VoxelIndex> voxels = mask.included();
  if (voxels.empty()) throw InputError("mask selects no voxels");

  std::vector<int> covariates(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    covariates[c] = resolve_covariate(configs[c], design.p(), &design);
  }

  // Configurations that differ only in their effect/rule readout share one
  // pass of row-trajectory draws; the keyed streams make the shared pass
  // identical to running each configuration alone.
  struct ShareGroup {
    SamplerKind sampler;
    SamplerKind base;
    int n_simu;
    std::uint64_t seed;
    int covariate;
    std::vector<std::size_t> members;
  };
  std::vector<ShareGroup> row_groups;
  std::vector<std::size_t> solo;  // fest and ag-fest configs
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const SamplerConfig& cfg = configs[c];
    const bool rows = cfg.sampler == SamplerKind::fsts ||
                      cfg.sampler == SamplerKind::ffbs ||
                      (cfg.sampler == SamplerKind::ag &&
                       cfg.ag_base != SamplerKind::fest);
    if (!rows) {
      solo.push_back(c);
      continue;
    }
    const SamplerKind base =
        cfg.sampler == SamplerKind::ag ? cfg.ag_base : cfg.sampler;
    bool placed = false;
    for (ShareGroup& g : row_groups) {
      if (g.sampler == cfg.sampler && g.base == base &&
          g.n_simu == cfg.n_simu && g.seed == cfg.seed &&
          g.covariate == covariates[c]) {
        g.members.push_back(c);
        placed = true;
        break;
      }
    }
    if (!placed) {
      row_groups.push_back(
          {cfg.sampler, base, cfg.n_simu, cfg.seed, covariates[c], {c}});
    }
  }

  std::vector<Volume4D> maps(configs.size());
  for (Volume4D& v : maps) v = Volume4D::zeros(mask.dims(), 1);
  std::atomic<std::size_t> degraded{0};

  parallel_for(voxels.size(), workers, [&](std::size_t vi) {
    const VoxelIndex& center = voxels[vi];
    const std::uint64_t voxel = mask.dims().linear(center);
    std::vector<MomentSeries> subject_series;
    subject_series.reserve(bold.size());
    for (const Volume4D& vol : bold) {
      subject_series.push_back(
          filter_voxel_series(vol, mask, center, design, evolution, fit_opt));
    }
    std::vector<const MomentSeries*> ptrs(subject_series.size());
    for (std::size_t z = 0; z < ptrs.size(); ++z) ptrs[z] = &subject_series[z];
    const MomentSeries group = combine_series(ptrs);
    if (group.dof < kNormalApproxDofThreshold) {
      degraded.fetch_add(1, std::memory_order_relaxed);
    }

    std::vector<std::size_t> positives(configs.size(), 0);
    for (const ShareGroup& g : row_groups) {
      const RngKey key{g.seed, voxel};
      const auto visit = [&](int, const Matrix& rows) {
        for (std::size_t c : g.members) {
          positives[c] += row_trajectory_positive(
              rows, configs[c].effect, configs[c].rule, configs[c].joint_rule);
        }
      };
      if (g.sampler == SamplerKind::ag) {
        for_each_ag_row_trajectory(ptrs, evolution, g.base, g.n_simu,
                                   g.covariate, key, visit);
      } else {
        for_each_row_trajectory(group, evolution, g.sampler, g.n_simu,
                                g.covariate, key, 0, visit);
      }
    }
    for (std::size_t c : solo) {
      const SamplerConfig& cfg = configs[c];
      const RngKey key{cfg.seed, voxel};
      if (cfg.sampler == SamplerKind::fest) {
        for_each_fest_trajectory(
            group, design, evolution, cfg.effect, cfg.n_simu, covariates[c],
            key, 0, [&](int, const Matrix& traj) {
              positives[c] +=
                  trajectory_positive(traj, cfg.rule, cfg.joint_rule);
            });
      } else {
        const std::vector<Trajectory> trajs =
            ag_sample(ptrs, &design, evolution, cfg, key);
        for (const Trajectory& traj : trajs) {
          positives[c] +=
              trajectory_positive(traj.values, cfg.rule, cfg.joint_rule);
        }
      }
    }
    for (std::size_t c = 0; c < configs.size(); ++c) {
      maps[c].data[voxel] = static_cast<float>(
          static_cast<double>(positives[c]) / configs[c].n_simu);
    }
  });

  if (degraded.load() > 0) {
    warn(std::to_string(degraded.load()) +
         " voxel posteriors had dof below " +
         std::to_string(static_cast<int>(kNormalApproxDofThreshold)) +
         "; their normal approximations are degraded");
  }
  return maps;
}

}  // namespace mdlm
