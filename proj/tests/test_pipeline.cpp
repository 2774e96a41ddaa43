#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "mdlm/design.hpp"
#include "mdlm/pipeline.hpp"
#include "mdlm/simulate.hpp"

using namespace mdlm;

namespace {

struct QuietWarnings {
  WarnHandler prev;
  QuietWarnings() { prev = set_warn_handler([](const std::string&) {}); }
  ~QuietWarnings() { set_warn_handler(prev); }
};

std::string tmp_file(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / ("mdlm_pipe_" + stem))
      .string();
}

SimSpec small_spec() {
  SimSpec spec;
  spec.dims = {5, 5, 2};
  spec.T = 24;
  spec.tr_seconds = 2.0;
  StimulusTrack track;
  track.label = "task";
  track.onsets = {8.0, 32.0};
  track.durations = {10.0, 10.0};
  spec.tracks = {track};
  spec.region.shape = ActiveRegion::Shape::sphere;
  spec.region.center = {2, 2, 1};
  spec.region.radius_vox = 1.2;
  spec.n_subjects = 2;
  spec.amplitude = 1.5;
  spec.noise_sd = 1.0;
  spec.seed = 314;
  return spec;
}

DesignMatrix spec_design(const SimSpec& spec) {
  DesignSpec d;
  d.tracks = spec.tracks;
  d.tr_seconds = spec.tr_seconds;
  d.n_scans = spec.T;
  return assemble_design(d);
}

SamplerConfig study_config(SamplerKind kind, EffectKind effect) {
  SamplerConfig cfg;
  cfg.sampler = kind;
  cfg.effect = effect;
  cfg.rule = PositivityRule::mean_over_t;
  cfg.joint_rule = JointRule::center_only;
  cfg.n_simu = 120;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("fit -> group -> map runs and is worker-invariant") {
  QuietWarnings quiet;
  const SimSpec spec = small_spec();
  const SimOutput sim = simulate_group(spec);
  const DesignMatrix design = spec_design(spec);
  const VolumeMask mask = VolumeMask::full(spec.dims);

  FitOptions fopt;
  fopt.radius = 1;
  fopt.workers = 1;
  std::vector<std::string> dumps;
  for (std::size_t z = 0; z < sim.subjects.size(); ++z) {
    const std::string path = tmp_file("sub" + std::to_string(z));
    const FitSummary summary =
        fit_to_dump(sim.subjects[z], mask, design, fopt, path);
    CHECK(summary.n_voxels == 50);
    CHECK(summary.final_dof == 25.0);
    CHECK(summary.degraded);  // n0 + 24 < 30
    dumps.push_back(path);
  }

  const std::string group_path = tmp_file("group");
  const GroupSummary group = combine_dumps(dumps, group_path);
  CHECK(group.n_subjects == 2);
  CHECK(group.pooled_dof == 49.0);

  MapOptions mopt;
  mopt.cfg = study_config(SamplerKind::fsts, EffectKind::marginal);
  mopt.workers = 1;
  const MapResult a = evidence_map({group_path}, nullptr, mopt);
  mopt.workers = 3;
  const MapResult b = evidence_map({group_path}, nullptr, mopt);
  REQUIRE(a.evidence.data.size() == b.evidence.data.size());
  CHECK(std::memcmp(a.evidence.data.data(), b.evidence.data.data(),
                    a.evidence.data.size() * sizeof(float)) == 0);
  for (float v : a.evidence.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  for (std::size_t i = 0; i < a.evidence.data.size(); ++i) {
    CHECK(a.above_threshold.data[i] ==
          (a.evidence.data[i] >= static_cast<float>(mopt.threshold) ? 1.0f
                                                                    : 0.0f));
  }
  CHECK(a.degraded == 0);  // pooled dof 49 clears the normal-approx threshold
  CHECK(a.n_voxels == 50);
  for (const std::string& p : dumps) std::filesystem::remove(p);
  std::filesystem::remove(group_path);
}

TEST_CASE("in-memory study equals the dump route bit for bit") {
  QuietWarnings quiet;
  const SimSpec spec = small_spec();
  const SimOutput sim = simulate_group(spec);
  const DesignMatrix design = spec_design(spec);
  const VolumeMask mask = VolumeMask::full(spec.dims);
  FitOptions fopt;
  fopt.workers = 2;

  const std::vector<SamplerConfig> configs = {
      study_config(SamplerKind::fsts, EffectKind::marginal),
      study_config(SamplerKind::fsts, EffectKind::average_cluster),
      study_config(SamplerKind::ffbs, EffectKind::joint),
      study_config(SamplerKind::fest, EffectKind::marginal),
  };
  const std::vector<Volume4D> maps =
      evidence_study(sim.subjects, mask, design, fopt, configs, 2);
  REQUIRE(maps.size() == configs.size());

  std::vector<std::string> dumps;
  for (std::size_t z = 0; z < sim.subjects.size(); ++z) {
    const std::string path = tmp_file("coh_sub" + std::to_string(z));
    fit_to_dump(sim.subjects[z], mask, design, fopt, path);
    dumps.push_back(path);
  }
  const std::string group_path = tmp_file("coh_group");
  combine_dumps(dumps, group_path);

  for (std::size_t c = 0; c < configs.size(); ++c) {
    MapOptions mopt;
    mopt.cfg = configs[c];
    mopt.workers = 1;
    const bool needs_design = configs[c].sampler == SamplerKind::fest;
    const MapResult viafile =
        evidence_map({group_path}, needs_design ? &design : nullptr, mopt);
    REQUIRE(viafile.evidence.data.size() == maps[c].data.size());
    CHECK(std::memcmp(viafile.evidence.data.data(), maps[c].data.data(),
                      maps[c].data.size() * sizeof(float)) == 0);
  }
  for (const std::string& p : dumps) std::filesystem::remove(p);
  std::filesystem::remove(group_path);
}

TEST_CASE("aggregated maps read the subject dumps") {
  QuietWarnings quiet;
  const SimSpec spec = small_spec();
  const SimOutput sim = simulate_group(spec);
  const DesignMatrix design = spec_design(spec);
  const VolumeMask mask = VolumeMask::full(spec.dims);
  FitOptions fopt;
  std::vector<std::string> dumps;
  for (std::size_t z = 0; z < sim.subjects.size(); ++z) {
    const std::string path = tmp_file("ag_sub" + std::to_string(z));
    fit_to_dump(sim.subjects[z], mask, design, fopt, path);
    dumps.push_back(path);
  }
  SamplerConfig cfg = study_config(SamplerKind::ag, EffectKind::marginal);
  cfg.ag_base = SamplerKind::fsts;
  MapOptions mopt;
  mopt.cfg = cfg;

  std::vector<SamplerConfig> configs = {cfg};
  const std::vector<Volume4D> maps =
      evidence_study(sim.subjects, mask, design, fopt, configs, 1);
  const MapResult viafile = evidence_map(dumps, nullptr, mopt);
  CHECK(std::memcmp(viafile.evidence.data.data(), maps[0].data.data(),
                    maps[0].data.size() * sizeof(float)) == 0);
  for (const std::string& p : dumps) std::filesystem::remove(p);
}

TEST_CASE("pipeline input validation") {
  QuietWarnings quiet;
  const SimSpec spec = small_spec();
  const SimOutput sim = simulate_group(spec);
  const DesignMatrix design = spec_design(spec);
  const VolumeMask mask = VolumeMask::full(spec.dims);

  FitOptions bad;
  bad.radius = -1;
  CHECK_THROWS_AS(
      fit_to_dump(sim.subjects[0], mask, design, bad, tmp_file("x")),
      BadOption);

  const VolumeMask wrong_mask = VolumeMask::full({9, 9, 9});
  CHECK_THROWS_AS(fit_to_dump(sim.subjects[0], wrong_mask, design, FitOptions{},
                              tmp_file("x")),
                  DimensionMismatch);

  CHECK_THROWS_AS(combine_dumps({}, tmp_file("x")), EmptyGroup);

  MapOptions mopt;
  mopt.cfg = study_config(SamplerKind::fest, EffectKind::marginal);
  const std::string dump_path = tmp_file("v_sub");
  fit_to_dump(sim.subjects[0], mask, design, FitOptions{}, dump_path);
  CHECK_THROWS_AS(evidence_map({dump_path}, nullptr, mopt), InputError);
  mopt.cfg = study_config(SamplerKind::fsts, EffectKind::marginal);
  CHECK_THROWS_AS(evidence_map({dump_path, dump_path}, nullptr, mopt),
                  BadOption);
  std::filesystem::remove(dump_path);
}
