// Acceptance harness.  Each criterion prints exactly one line
//
//   [criterion N] PASS|FAIL — detail
//
// and the process exits with the number of failures.  Tolerances and budgets
// are pinned here, next to the checks that use them.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "mdlm/design.hpp"
#include "mdlm/errors.hpp"
#include "mdlm/filter.hpp"
#include "mdlm/group.hpp"
#include "mdlm/nifti.hpp"
#include "mdlm/pipeline.hpp"
#include "mdlm/rng.hpp"
#include "mdlm/samplers.hpp"
#include "mdlm/simulate.hpp"

using namespace mdlm;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances and budgets ----------------------------------------
constexpr double kStaticTol = 1e-8;        // criterion 1
constexpr double kStaticBudgetSec = 1.0;   // criterion 1
constexpr double kGroupTol = 1e-12;        // criterion 2
constexpr double kMomentSigmas = 4.0;      // criterion 3
constexpr int kMomentNSimu = 10000;        // criterion 3 (and 6b)
constexpr double kSamplerBudgetSec = 30.0; // criterion 3
constexpr double kBackwardTol = 1e-10;     // criterion 4
constexpr double kAucFloor = 0.90;         // criterion 5
constexpr double kFpCeiling = 0.05;        // criterion 5
constexpr double kEvidenceLevel = 0.95;    // criterion 5
constexpr int kStudyNSimu = 150;           // criterion 5
constexpr double kStudyBudgetSec = 600.0;  // criterion 5
constexpr double kVarianceSlack = 0.9;     // criterion 6 (MC headroom)

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

Matrix random_spd(Rng& rng, int n) {
  const Matrix b = random_matrix(rng, n, n);
  return b * b.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

bool bits_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

// Mann-Whitney AUC with average ranks on ties.
double roc_auc(const std::vector<double>& score, const std::vector<int>& label) {
  const std::size_t n = score.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && score[order[j]] == score[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) +
                                   static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (label[order[k]]) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.0;
  return (pos_rank_sum - static_cast<double>(n_pos) *
                             (static_cast<double>(n_pos) + 1.0) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

DesignMatrix two_column_design(int T, double tr = 2.0,
                               std::vector<double> onsets = {10.0, 34.0},
                               std::vector<double> durations = {10.0, 10.0}) {
  DesignSpec spec;
  StimulusTrack track;
  track.label = "task";
  track.onsets = std::move(onsets);
  track.durations = std::move(durations);
  spec.tracks = {track};
  spec.tr_seconds = tr;
  spec.n_scans = T;
  return assemble_design(spec);
}

Matrix signal_plus_noise(const DesignMatrix& design, int q, double amplitude,
                         std::uint64_t seed) {
  Rng rng(seed);
  Matrix y(design.T(), q);
  for (int t = 0; t < design.T(); ++t) {
    const double s = amplitude * design.columns(t, design.columns.cols() - 1);
    for (int j = 0; j < q; ++j) y(t, j) = s + rng.normal();
  }
  return y;
}

// ---- criterion 1: static-model equivalence ---------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const int p = 2, q = 3, T = 50;
  Rng rng(101);

  DesignMatrix design;
  design.names = {"x0", "x1"};
  design.columns = random_matrix(rng, T, p);
  design.has_intercept = false;

  const Matrix y = random_matrix(rng, T, q) * 2.0;

  PriorSpec prior;
  prior.m0 = random_matrix(rng, p, q);
  prior.c0 = SpdMatrix(random_spd(rng, p));
  prior.s0 = SpdMatrix(random_spd(rng, q));
  prior.n0 = 3.0;

  const EvolutionSpec evolution = EvolutionSpec::random_walk(p, 1.0);
  const FilterOutput out = filter_series(y, design, evolution, prior);
  const PosteriorMoments& post = out.series.at.back();

  // Batch conjugate regression oracle, inverses straight from Eigen.
  const Matrix& f = design.columns;
  const Matrix c0_inv = prior.c0.mat().inverse();
  const Matrix ct = (c0_inv + f.transpose() * f).inverse();
  const Matrix mt = ct * (c0_inv * prior.m0 + f.transpose() * y);
  const double nt = prior.n0 + T;
  const Matrix psi = prior.n0 * prior.s0.mat() + y.transpose() * y +
                     prior.m0.transpose() * c0_inv * prior.m0 -
                     mt.transpose() * ct.inverse() * mt;
  const Matrix st = psi / nt;

  double diff = (post.m - mt).cwiseAbs().maxCoeff();
  diff = std::max(diff, (post.c - ct).cwiseAbs().maxCoeff());
  diff = std::max(diff, (post.s - st).cwiseAbs().maxCoeff());
  diff = std::max(diff, std::abs(post.n - nt));

  const double dt = seconds_since(t0);
  const bool pass = diff < kStaticTol && dt < kStaticBudgetSec;
  return {pass, fmt("delta=1 filter vs batch conjugate posterior: max |diff| "
                    "%.3g (tol %.0e), %.2f s (budget %.0f s)",
                    diff, kStaticTol, dt, kStaticBudgetSec)};
}

// ---- criterion 2: group combination algebra ---------------------------------

Outcome criterion2() {
  const int p = 3, q = 4;
  Rng rng(202);
  double worst = 0.0;
  bool identity_ok = true;

  for (int n_g : {1, 2, 5, 8}) {
    std::vector<MatrixNormalParams> subjects(n_g);
    for (auto& s : subjects) {
      s.mean = random_matrix(rng, p, q);
      s.row_cov = SpdMatrix(random_spd(rng, p));
      s.col_cov = SpdMatrix(random_spd(rng, q));
    }
    const MatrixNormalParams combined = combine_group(subjects);

    Matrix mean_sum = Matrix::Zero(p, q);
    Matrix row_sum = Matrix::Zero(p, p);
    Matrix col_sum = Matrix::Zero(q, q);
    for (const auto& s : subjects) {
      mean_sum += s.mean;
      row_sum += s.row_cov.mat();
      col_sum += s.col_cov.mat();
    }
    const double inv_n = 1.0 / n_g;
    const double inv_n2 = inv_n * inv_n;
    worst = std::max(worst,
                     (combined.mean - inv_n * mean_sum).cwiseAbs().maxCoeff());
    worst = std::max(worst, (combined.row_cov.mat() - inv_n2 * row_sum)
                                .cwiseAbs()
                                .maxCoeff());
    worst = std::max(worst, (combined.col_cov.mat() - inv_n2 * col_sum)
                                .cwiseAbs()
                                .maxCoeff());

    if (n_g == 1) {
      identity_ok = bits_equal(combined.mean, subjects[0].mean) &&
                    bits_equal(combined.row_cov.mat(), subjects[0].row_cov.mat()) &&
                    bits_equal(combined.col_cov.mat(), subjects[0].col_cov.mat());
    }
  }

  const bool pass = worst < kGroupTol && identity_ok;
  return {pass, fmt("mean / (1/N^2)-covariance sums over N in {1,2,5,8}: max "
                    "|diff| %.3g (tol %.0e); N=1 bit-identical: %s",
                    worst, kGroupTol, identity_ok ? "yes" : "NO")};
}

// ---- criterion 3: sampler moment oracles ------------------------------------

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const int T = 30, q = 2;
  const DesignMatrix design = two_column_design(T);
  const Matrix y = signal_plus_noise(design, q, 0.8, 303);
  const EvolutionSpec evolution = EvolutionSpec::random_walk(2, 0.95);
  const PriorSpec prior = PriorSpec::standard(2, q);
  const MomentSeries series = filter_series(y, design, evolution, prior).series;

  SamplerConfig cfg;
  cfg.effect = EffectKind::marginal;
  cfg.n_simu = kMomentNSimu;
  cfg.seed = 11;
  const RngKey key{cfg.seed, 0};

  // FSTS: Theta_t averages to the filtered mean one step back.
  cfg.sampler = SamplerKind::fsts;
  const std::vector<Trajectory> fsts = fsts_sample(series, evolution, cfg, key);
  double worst_z = 0.0;
  for (int t : {1, 15, 30}) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& traj : fsts) {
      const double v = traj.values(t - 1, 0);
      sum += v;
      sum2 += v * v;
    }
    const double n = static_cast<double>(fsts.size());
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    const double target = series.at[t - 1].m(1, 0);
    worst_z = std::max(worst_z, std::abs(mean - target) / se);
  }

  // FFBS: the endpoint averages to the final filtered mean.
  cfg.sampler = SamplerKind::ffbs;
  const std::vector<Trajectory> ffbs = ffbs_sample(series, evolution, cfg, key);
  {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& traj : ffbs) {
      const double v = traj.values(T - 1, 0);
      sum += v;
      sum2 += v * v;
    }
    const double n = static_cast<double>(ffbs.size());
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    worst_z = std::max(worst_z, std::abs(mean - series.at[T].m(1, 0)) / se);
  }

  // FEST under degenerate covariances: the refilter never moves off the
  // prior mean, so every trajectory is identically that mean.
  MomentSeries degenerate = series;
  for (auto& pm : degenerate.at) pm.c.setZero();
  degenerate.at[0].m.setOnes();
  cfg.sampler = SamplerKind::fest;
  const std::vector<Trajectory> fest =
      fest_sample(degenerate, design, evolution, cfg, key);
  bool fest_ok = fest.size() == static_cast<std::size_t>(kMomentNSimu);
  for (const auto& traj : fest) {
    fest_ok = fest_ok && (traj.values.array() == 1.0).all();
  }

  const double dt = seconds_since(t0);
  const bool pass =
      worst_z < kMomentSigmas && fest_ok && dt < kSamplerBudgetSec;
  return {pass,
          fmt("FSTS/FFBS means at N=%d: worst |z| %.2f (limit %.0f); "
              "degenerate FEST deterministic: %s; %.1f s (budget %.0f s)",
              kMomentNSimu, worst_z, kMomentSigmas, fest_ok ? "yes" : "NO", dt,
              kSamplerBudgetSec)};
}

// ---- criterion 4: backward-moment simplification ----------------------------

Outcome criterion4() {
  const int p = 3, q = 2;
  Rng rng(404);
  double worst = 0.0;
  for (double delta : {0.85, 0.9, 0.95, 0.99}) {
    for (int rep = 0; rep < 100; ++rep) {
      PosteriorMoments pm;
      pm.m = random_matrix(rng, p, q);
      pm.c = random_spd(rng, p);
      pm.s = random_spd(rng, q);
      pm.n = 20.0;
      const Matrix theta_next = random_matrix(rng, p, q);

      const auto [mean, cov] = ffbs_backward_moments(pm, theta_next, delta);
      const Matrix mean_ref = pm.m + delta * (theta_next - pm.m);
      const Matrix cov_ref = (1.0 - delta) * pm.c;
      worst = std::max(worst, (mean - mean_ref).cwiseAbs().maxCoeff());
      worst = std::max(worst, (cov - cov_ref).cwiseAbs().maxCoeff());
    }
  }
  const bool pass = worst < kBackwardTol;
  return {pass, fmt("numeric smoothing conditionals vs m + delta (Theta' - m), "
                    "(1 - delta) C over 400 random inputs: max |diff| %.3g "
                    "(tol %.0e)",
                    worst, kBackwardTol)};
}

// ---- criterion 5: synthetic detection study ---------------------------------

const char* sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::fest: return "fest";
    case SamplerKind::fsts: return "fsts";
    case SamplerKind::ffbs: return "ffbs";
    case SamplerKind::ag: return "ag";
  }
  return "?";
}

const char* effect_name(EffectKind k) {
  switch (k) {
    case EffectKind::marginal: return "marginal";
    case EffectKind::average_cluster: return "ace";
    case EffectKind::joint: return "joint";
  }
  return "?";
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();

  SimSpec spec;
  spec.dims = {16, 16, 8};
  spec.T = 100;
  spec.tr_seconds = 2.0;
  StimulusTrack track;
  track.label = "task";
  track.onsets = {20.0, 60.0, 100.0, 140.0, 180.0};
  track.durations = {20.0, 20.0, 20.0, 20.0, 20.0};
  spec.tracks = {track};
  spec.region.shape = ActiveRegion::Shape::sphere;
  spec.region.center = {8, 8, 4};
  spec.region.radius_vox = 2.0;
  spec.n_subjects = 8;
  spec.amplitude = 1.0;
  spec.subject_amplitude_sd = 0.2;
  spec.noise_sd = 1.0;
  spec.spatial_rho = 0.3;
  spec.seed = 20260816;

  const SimOutput sim = simulate_group(spec);

  DesignSpec dspec;
  dspec.tracks = spec.tracks;
  dspec.tr_seconds = spec.tr_seconds;
  dspec.n_scans = spec.T;
  DesignMatrix design = assemble_design(dspec);

  // Grand-mean global signal as a nuisance column: the simulator's shared
  // spatial component (rho > 0) otherwise correlates null-voxel evidences
  // across the volume and inflates the realized false-positive fraction.
  {
    const std::size_t n_vox =
        static_cast<std::size_t>(spec.dims.nx) * spec.dims.ny * spec.dims.nz;
    Vector gs = Vector::Zero(spec.T);
    for (const Volume4D& vol : sim.subjects) {
      for (int t = 0; t < spec.T; ++t) {
        double sum = 0.0;
        for (std::size_t v = 0; v < n_vox; ++v) sum += vol.data[t * n_vox + v];
        gs[t] += sum / static_cast<double>(n_vox);
      }
    }
    gs /= static_cast<double>(sim.subjects.size());
    gs.array() -= gs.mean();
    const int p = static_cast<int>(design.columns.cols());
    design.columns.conservativeResize(spec.T, p + 1);
    design.columns.col(p) = gs;
    design.names.push_back("global");
  }

  FitOptions fit_opt;
  fit_opt.radius = 1;
  fit_opt.discount = 0.85;
  fit_opt.workers = 8;

  std::vector<SamplerConfig> configs;
  for (SamplerKind sampler : {SamplerKind::fest, SamplerKind::fsts,
                              SamplerKind::ffbs, SamplerKind::ag}) {
    for (EffectKind effect : {EffectKind::marginal, EffectKind::average_cluster,
                              EffectKind::joint}) {
      SamplerConfig cfg;
      cfg.sampler = sampler;
      cfg.ag_base = SamplerKind::fsts;
      cfg.effect = effect;
      cfg.rule = PositivityRule::mean_over_t;
      cfg.joint_rule = JointRule::center_only;
      cfg.n_simu = kStudyNSimu;
      cfg.seed = 17;
      configs.push_back(cfg);
    }
  }

  const VolumeMask mask = VolumeMask::full(spec.dims);
  const std::vector<Volume4D> maps =
      evidence_study(sim.subjects, mask, design, fit_opt, configs, 8);

  const std::size_t n_vox = sim.truth.data.size();
  std::vector<int> label(n_vox);
  for (std::size_t i = 0; i < n_vox; ++i) label[i] = sim.truth.data[i] > 0.5f;

  double min_auc = 1.0, max_fp = 0.0;
  std::string min_auc_cfg = "-", max_fp_cfg = "-";
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<double> score(n_vox);
    for (std::size_t i = 0; i < n_vox; ++i) score[i] = maps[c].data[i];
    const double auc = roc_auc(score, label);
    std::size_t fp = 0, nulls = 0;
    for (std::size_t i = 0; i < n_vox; ++i) {
      if (label[i]) continue;
      ++nulls;
      if (score[i] >= kEvidenceLevel) ++fp;
    }
    const double fp_rate = static_cast<double>(fp) / static_cast<double>(nulls);
    const std::string name = std::string(sampler_name(configs[c].sampler)) +
                             "/" + effect_name(configs[c].effect);
    if (auc < min_auc) {
      min_auc = auc;
      min_auc_cfg = name;
    }
    if (fp_rate > max_fp) {
      max_fp = fp_rate;
      max_fp_cfg = name;
    }
  }

  const double dt = seconds_since(t0);
  const bool pass =
      min_auc > kAucFloor && max_fp <= kFpCeiling && dt < kStudyBudgetSec;
  return {pass,
          fmt("12 sampler/effect maps on a 16x16x8, T=100, N=8 study: min AUC "
              "%.3f [%s] (floor %.2f), max null FP at %.2f evidence %.3f [%s] "
              "(ceiling %.2f), %.0f s (budget %.0f s)",
              min_auc, min_auc_cfg.c_str(), kAucFloor, kEvidenceLevel, max_fp,
              max_fp_cfg.c_str(), kFpCeiling, dt, kStudyBudgetSec)};
}

// ---- criterion 6: AG identity and variance ordering -------------------------

Outcome criterion6() {
  const int T = 40, q = 2;
  const DesignMatrix design = two_column_design(T);
  const EvolutionSpec evolution = EvolutionSpec::random_walk(2, 0.95);
  const PriorSpec prior = PriorSpec::standard(2, q);

  // Heterogeneous subjects: amplitudes spread around 1 with sd ~ 0.5.
  const std::vector<double> amplitudes = {1.6, 0.4, 1.3, 0.9, 1.8, 0.5};
  std::vector<MomentSeries> series;
  for (std::size_t z = 0; z < amplitudes.size(); ++z) {
    const Matrix y = signal_plus_noise(design, q, amplitudes[z], 600 + z);
    series.push_back(filter_series(y, design, evolution, prior).series);
  }
  std::vector<const MomentSeries*> ptrs;
  for (const auto& s : series) ptrs.push_back(&s);

  // (a) N_g = 1: aggregated == base, bit for bit, for every base.
  bool identity_ok = true;
  for (SamplerKind base :
       {SamplerKind::fest, SamplerKind::fsts, SamplerKind::ffbs}) {
    SamplerConfig cfg;
    cfg.sampler = base;
    cfg.effect = EffectKind::joint;
    cfg.n_simu = 500;
    cfg.seed = 606;
    const RngKey key{cfg.seed, 42};
    std::vector<Trajectory> direct;
    switch (base) {
      case SamplerKind::fest:
        direct = fest_sample(series[0], design, evolution, cfg, key);
        break;
      case SamplerKind::fsts:
        direct = fsts_sample(series[0], evolution, cfg, key);
        break;
      default:
        direct = ffbs_sample(series[0], evolution, cfg, key);
        break;
    }
    SamplerConfig ag_cfg = cfg;
    ag_cfg.sampler = SamplerKind::ag;
    ag_cfg.ag_base = base;
    const std::vector<Trajectory> aggregated =
        ag_sample({ptrs[0]}, &design, evolution, ag_cfg, key);
    identity_ok = identity_ok && aggregated.size() == direct.size();
    for (std::size_t i = 0; identity_ok && i < direct.size(); ++i) {
      identity_ok = bits_equal(direct[i].values, aggregated[i].values);
    }
  }

  // (b) heterogeneous group: the aggregated sampler carries at least the
  // pipeline's trajectory variance (theory: about N_g times more).
  const MomentSeries combined = combine_series(ptrs);
  SamplerConfig cfg;
  cfg.sampler = SamplerKind::fsts;
  cfg.effect = EffectKind::marginal;
  cfg.n_simu = kMomentNSimu;
  cfg.seed = 616;
  const RngKey key{cfg.seed, 7};
  const std::vector<Trajectory> pipeline =
      fsts_sample(combined, evolution, cfg, key);
  SamplerConfig ag_cfg = cfg;
  ag_cfg.sampler = SamplerKind::ag;
  ag_cfg.ag_base = SamplerKind::fsts;
  const std::vector<Trajectory> aggregated =
      ag_sample(ptrs, nullptr, evolution, ag_cfg, key);

  const auto time_mean_variance = [](const std::vector<Trajectory>& set) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& traj : set) {
      const double v = traj.values.col(0).mean();
      sum += v;
      sum2 += v * v;
    }
    const double n = static_cast<double>(set.size());
    return sum2 / n - (sum / n) * (sum / n);
  };
  const double var_pipeline = time_mean_variance(pipeline);
  const double var_ag = time_mean_variance(aggregated);
  const bool order_ok = var_ag >= kVarianceSlack * var_pipeline;

  const bool pass = identity_ok && order_ok;
  return {pass, fmt("N=1 aggregated bit-identical to fest/fsts/ffbs: %s; "
                    "heterogeneous-group variance %.3g vs pipeline %.3g "
                    "(ratio %.1f, needs >= %.1f)",
                    identity_ok ? "yes" : "NO", var_ag, var_pipeline,
                    var_ag / var_pipeline, kVarianceSlack)};
}

// ---- criterion 7: end-to-end determinism ------------------------------------

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

bool files_equal(const fs::path& a, const fs::path& b) {
  return read_bytes(a.string()) == read_bytes(b.string());
}

bool dirs_equal(const fs::path& a, const fs::path& b) {
  std::map<std::string, std::string> left, right;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file())
      left[fs::relative(e.path(), a).string()] = read_bytes(e.path().string());
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file())
      right[fs::relative(e.path(), b).string()] = read_bytes(e.path().string());
  }
  return left == right;
}

Outcome criterion7() {
  const std::string cli = MDLM_CLI_PATH;
  const fs::path dir = fs::temp_directory_path() / "mdlm_acceptance7";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string log = (dir / "commands.log").string();

  std::string failed_cmd;
  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >>" + log + " 2>&1";
    const int rc = std::system(cmd.c_str());
    const int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    if (code != 0 && failed_cmd.empty())
      failed_cmd = args + fmt(" [exit %d]", code);
    return code == 0;
  };

  const std::string spec_path = (dir / "spec.json").string();
  {
    std::ofstream out(spec_path);
    out << R"({
  "dims": [8, 8, 4],
  "n_scans": 30,
  "tr_seconds": 2.0,
  "n_subjects": 3,
  "amplitude": 1.2,
  "noise_sd": 1.0,
  "spatial_rho": 0.2,
  "seed": 99,
  "tracks": [{"label": "task", "onsets": [10, 34], "durations": [10, 10]}],
  "region": {"shape": "sphere", "center": [4, 4, 2], "radius_vox": 1.5}
})";
  }

  bool ok = true;
  ok = ok && run("simulate " + spec_path + " --out " + (dir / "sim1").string());
  ok = ok && run("simulate " + spec_path + " --out " + (dir / "sim2").string());
  const bool sim_identical = ok && dirs_equal(dir / "sim1", dir / "sim2");

  bool fits_identical = true;
  std::string subject_dumps;
  for (int z = 1; z <= 3 && ok; ++z) {
    const std::string bold =
        (dir / "sim1" / fmt("sub-%03d_bold.nii", z)).string();
    const std::string events = (dir / "sim1" / "events.tsv").string();
    const std::string w1 = (dir / fmt("fit_w1_%d.mdlm", z)).string();
    const std::string w4 = (dir / fmt("fit_w4_%d.mdlm", z)).string();
    const std::string env = (dir / fmt("fit_env_%d.mdlm", z)).string();
    const std::string base_args = "fit --bold " + bold + " --events " + events +
                                  " --radius 1 --out ";
    ok = ok && run(base_args + w1 + " --workers 1");
    ok = ok && run(base_args + w4 + " --workers 4");
    if (ok) {
      const std::string cmd = "MDLM_WORKERS=4 " + cli + " " + base_args + env +
                              " >>" + log + " 2>&1";
      const int rc = std::system(cmd.c_str());
      ok = WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
      if (!ok && failed_cmd.empty()) failed_cmd = "fit (MDLM_WORKERS=4 form)";
    }
    fits_identical = fits_identical && ok && files_equal(w1, w4) &&
                     files_equal(w1, env);
    subject_dumps += " " + w1;
  }

  const std::string group_path = (dir / "group.mdlm").string();
  ok = ok && run("group" + subject_dumps + " --out " + group_path);

  const std::string map_args = "map --group " + group_path +
                               " --sampler ffbs --effect marginal --rule "
                               "mean-over-t --n-simu 200 --seed 3 --out ";
  ok = ok && run(map_args + (dir / "map_w1.nii").string() + " --workers 1");
  ok = ok && run(map_args + (dir / "map_w4.nii").string() + " --workers 4");
  ok = ok && run(map_args + (dir / "map_w8.nii").string() + " --workers 8");
  ok = ok && run(map_args + (dir / "map_w1b.nii").string() + " --workers 1");
  bool maps_identical = ok;
  for (const char* other : {"map_w4", "map_w8", "map_w1b"}) {
    maps_identical =
        maps_identical && ok &&
        files_equal(dir / "map_w1.nii", dir / (std::string(other) + ".nii")) &&
        files_equal(dir / "map_w1_mask.nii",
                    dir / (std::string(other) + "_mask.nii"));
  }

  const std::string ag_args = "map --subjects" + subject_dumps +
                              " --sampler ag --base fsts --effect marginal "
                              "--rule mean-over-t --n-simu 150 --seed 5 --out ";
  ok = ok && run(ag_args + (dir / "ag_w1.nii").string() + " --workers 1");
  ok = ok && run(ag_args + (dir / "ag_w8.nii").string() + " --workers 8");
  const bool ag_identical =
      ok && files_equal(dir / "ag_w1.nii", dir / "ag_w8.nii") &&
      files_equal(dir / "ag_w1_mask.nii", dir / "ag_w8_mask.nii");

  const bool pass =
      ok && sim_identical && fits_identical && maps_identical && ag_identical;
  if (pass) fs::remove_all(dir);
  if (!ok) {
    return {false, "command failed: " + failed_cmd + " (log: " + log + ")"};
  }
  return {pass,
          fmt("seeded reruns and worker counts 1/4/8: simulate dirs "
              "identical: %s; fit dumps identical: %s; evidence+mask volumes "
              "identical: %s; aggregated maps identical: %s",
              sim_identical ? "yes" : "NO", fits_identical ? "yes" : "NO",
              maps_identical ? "yes" : "NO", ag_identical ? "yes" : "NO")};
}

// ---- criterion 8: volume I/O ------------------------------------------------

template <typename E>
bool expect_read_error(const std::string& path, const char* field) {
  try {
    (void)read_nifti1(path);
  } catch (const E& e) {
    return std::string(e.what()).find(field) != std::string::npos;
  } catch (const std::exception&) {
    return false;
  }
  return false;
}

Outcome criterion8() {
  const fs::path dir = fs::temp_directory_path() / "mdlm_acceptance8";
  fs::remove_all(dir);
  fs::create_directories(dir);

  Volume4D vol = Volume4D::zeros({7, 6, 5}, 3);
  vol.voxel_mm = {2.0, 2.5, 3.0};
  vol.tr_seconds = 1.5;
  Rng rng(808);
  for (auto& v : vol.data) v = static_cast<float>(rng.normal());
  vol.data[0] = -0.0f;
  vol.data[1] = 1e-30f;
  vol.data[2] = 3.4e38f;

  const std::string round_path = (dir / "round.nii").string();
  write_nifti1(vol, round_path);
  const Volume4D back = read_nifti1(round_path);
  const bool round_ok =
      back.dims == vol.dims && back.T == vol.T &&
      back.tr_seconds == vol.tr_seconds && back.data.size() == vol.data.size() &&
      std::memcmp(back.data.data(), vol.data.data(),
                  vol.data.size() * sizeof(float)) == 0;

  const std::string good = (dir / "good.nii").string();
  write_nifti1(Volume4D::zeros({5, 4, 3}, 2), good);
  const std::string pristine = read_bytes(good);
  const auto patched = [&](std::size_t offset, const void* bytes,
                           std::size_t len) {
    std::string copy = pristine;
    std::memcpy(copy.data() + offset, bytes, len);
    const std::string path = (dir / "bad.nii").string();
    std::ofstream out(path, std::ios::binary);
    out.write(copy.data(), static_cast<std::streamsize>(copy.size()));
    out.close();
    return path;
  };

  const char bad_magic = 'x';
  const std::int32_t bad_sizeof = 350;
  const std::int16_t bad_datatype = 128;
  const std::int16_t bad_ndim = 5;
  const bool magic_ok = expect_read_error<BadMagic>(
      patched(344, &bad_magic, 1), "magic");
  const bool sizeof_ok = expect_read_error<BadHeader>(
      patched(0, &bad_sizeof, 4), "sizeof_hdr");
  const bool datatype_ok = expect_read_error<UnsupportedDatatype>(
      patched(70, &bad_datatype, 2), "datatype");
  const bool dim_ok = expect_read_error<BadHeader>(
      patched(40, &bad_ndim, 2), "dim[0]");

  const bool pass = round_ok && magic_ok && sizeof_ok && datatype_ok && dim_ok;
  if (pass) fs::remove_all(dir);
  return {pass,
          fmt("float32 round-trip bit-exact: %s; typed errors naming the "
              "field — magic: %s, sizeof_hdr: %s, datatype: %s, dim[0]: %s",
              round_ok ? "yes" : "NO", magic_ok ? "yes" : "NO",
              sizeof_ok ? "yes" : "NO", datatype_ok ? "yes" : "NO",
              dim_ok ? "yes" : "NO")};
}

}  // namespace

int main() {
  set_warn_handler([](const std::string&) {});
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4,
      criterion5, criterion6, criterion7, criterion8};

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i]();
    } catch (const std::exception& e) {
      outcome = {false, std::string("unexpected exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("[criterion %zu] %s — %s\n", i + 1,
                outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures;
}
