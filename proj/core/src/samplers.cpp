#include "mdlm/samplers.hpp"

#include <cmath>
#include <string>

#include "mdlm/rng.hpp"

namespace mdlm {

namespace {

// out = L z for lower-triangular L, column-wise so access stays contiguous.
inline void trimul_lower(const Matrix& l, const Vector& z, Vector& out) {
  const Eigen::Index n = z.size();
  out.setZero();
  for (Eigen::Index j = 0; j < n; ++j) {
    out.tail(n - j).noalias() += l.col(j).tail(n - j) * z(j);
  }
}

inline void fill_normal(Rng& rng, Vector& z) {
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
}

void check_series(const MomentSeries& series) {
  if (series.at.size() < 2) {
    throw InputError("moment series must cover the prior and at least one step");
  }
  if (series.p <= 0 || series.q <= 0 ||
      series.at[0].p() != series.p || series.at[0].q() != series.q) {
    throw DimensionMismatch("moment series dimensions are inconsistent");
  }
}

void check_evolution(const EvolutionSpec& evolution, const MomentSeries& series) {
  evolution.validate();
  if (!evolution.identity_g()) {
    throw BadOption("trajectory samplers require the random-walk evolution (G = I)");
  }
  if (evolution.g.rows() != series.p) {
    throw DimensionMismatch("evolution matrix G is " +
                            std::to_string(evolution.g.rows()) +
                            "-dim, series state has " + std::to_string(series.p) +
                            " rows");
  }
  if (series.discount > 0.0 && series.discount != evolution.discount) {
    throw BadOption("sampler discount " + std::to_string(evolution.discount) +
                    " differs from the filtered series' " +
                    std::to_string(series.discount));
  }
}

void check_n_simu(int n_simu) {
  if (n_simu < 100) {
    throw BadOption("n_simu must be at least 100, got " + std::to_string(n_simu));
  }
}

// Per-voxel factors shared across replicates.  Everything trajectory draws
// need about the covariate row: chol(S_t), the row means, and the row
// standard-deviation scalars for the state, evolution-noise and backward
// conditionals.
struct RowFactors {
  int l = 0;
  std::vector<Matrix> s_chol;
  std::vector<Vector> m_row;
  std::vector<double> state_sd;
  std::vector<double> omega_sd;
  std::vector<double> back_sd;
};

RowFactors make_row_factors(const MomentSeries& series, double discount, int l,
                            bool need_s_chol) {
  const int T = series.T();
  RowFactors f;
  f.l = l;
  f.m_row.resize(static_cast<std::size_t>(T) + 1);
  f.state_sd.resize(static_cast<std::size_t>(T) + 1);
  f.omega_sd.resize(static_cast<std::size_t>(T) + 1);
  f.back_sd.resize(static_cast<std::size_t>(T) + 1);
  if (need_s_chol) f.s_chol.resize(static_cast<std::size_t>(T) + 1);
  const double omega_factor = (1.0 - discount) / discount;
  for (int t = 0; t <= T; ++t) {
    const PosteriorMoments& pm = series.at[static_cast<std::size_t>(t)];
    const double cll = std::max(pm.c(l, l), 0.0);
    f.m_row[static_cast<std::size_t>(t)] = pm.m.row(l).transpose();
    f.state_sd[static_cast<std::size_t>(t)] = std::sqrt(cll);
    f.omega_sd[static_cast<std::size_t>(t)] = std::sqrt(cll * omega_factor);
    f.back_sd[static_cast<std::size_t>(t)] = std::sqrt(cll * (1.0 - discount));
    if (need_s_chol) {
      f.s_chol[static_cast<std::size_t>(t)] = cholesky_lower(pm.s);
    }
  }
  return f;
}

struct RowWorkspace {
  Vector z, tmp, row;
  Matrix rows;

  RowWorkspace(int T, int q) : z(q), tmp(q), row(q), rows(T, q) {}
};

// One FSTS replicate: for each t, a fresh draw of the covariate row at t-1
// plus an evolution-noise row with column scale S_t.
void fsts_rows_one(const MomentSeries& series, const RowFactors& f,
                   double discount, Rng& rng, RowWorkspace& w) {
  (void)discount;
  const int T = series.T();
  for (int t = 1; t <= T; ++t) {
    fill_normal(rng, w.z);
    trimul_lower(f.s_chol[static_cast<std::size_t>(t) - 1], w.z, w.tmp);
    w.row = f.m_row[static_cast<std::size_t>(t) - 1] +
            f.state_sd[static_cast<std::size_t>(t) - 1] * w.tmp;
    fill_normal(rng, w.z);
    trimul_lower(f.s_chol[static_cast<std::size_t>(t)], w.z, w.tmp);
    w.row += f.omega_sd[static_cast<std::size_t>(t) - 1] * w.tmp;
    w.rows.row(t - 1) = w.row.transpose();
  }
}

struct FfbsWorkspace {
  Matrix bart, sig_fact;

  FfbsWorkspace(int q) : bart(Matrix::Zero(q, q)), sig_fact(q, q) {}
};

// One FFBS replicate.  The Bartlett factor gives Sigma = F F' with
// F = (A^{-1} chol(Psi)')', so F z has covariance Sigma without forming
// Sigma itself; the same factor scales every backward step.
void ffbs_rows_one(const MomentSeries& series, const RowFactors& f,
                   double discount, double dof, const Matrix& psi_chol,
                   Rng& rng, RowWorkspace& w, FfbsWorkspace& fw) {
  const int T = series.T();
  const int q = series.q;
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < i; ++j) fw.bart(i, j) = rng.normal();
    fw.bart(i, i) = std::sqrt(rng.chi_square(dof - i));
  }
  fw.sig_fact = psi_chol.transpose();
  fw.bart.triangularView<Eigen::Lower>().solveInPlace(fw.sig_fact);
  // Draw at T from the filtered posterior with column scale Sigma.
  fill_normal(rng, w.z);
  w.tmp.noalias() = fw.sig_fact.transpose() * w.z;
  w.row = f.m_row[static_cast<std::size_t>(T)] +
          f.state_sd[static_cast<std::size_t>(T)] * w.tmp;
  w.rows.row(T - 1) = w.row.transpose();
  // Exact backward conditionals for the random walk: mean m + delta (next - m),
  // row variance (1 - delta) C.
  for (int t = T - 1; t >= 1; --t) {
    fill_normal(rng, w.z);
    w.tmp.noalias() = fw.sig_fact.transpose() * w.z;
    w.row = f.m_row[static_cast<std::size_t>(t)] +
            discount * (w.row - f.m_row[static_cast<std::size_t>(t)]) +
            f.back_sd[static_cast<std::size_t>(t)] * w.tmp;
    w.rows.row(t - 1) = w.row.transpose();
  }
}

double ffbs_check_dof(const MomentSeries& series) {
  const double dof = series.dof;
  if (!(dof > series.q - 1)) {
    throw DofTooSmall("ffbs needs final dof > q - 1 = " +
                      std::to_string(series.q - 1) + ", series has " +
                      std::to_string(dof));
  }
  return dof;
}

// Precomputed FEST effect-draw parameters.  For the scalar effect kinds the
// draw at (t, l) is eff_mean[t](l) + eff_sd[t](l) * z; the joint kind draws
// whole rows and needs sqrt(C_t[l,l]) per row plus chol(S_t).
struct FestPrep {
  EffectKind effect;
  std::vector<Vector> eff_mean;   // scalar kinds
  std::vector<Vector> eff_sd;
  std::vector<Vector> sqrt_cll;   // joint
  std::vector<Matrix> s_chol;     // shared: nu draws and joint effect draws
};

FestPrep make_fest_prep(const MomentSeries& series, EffectKind effect) {
  const int T = series.T();
  const int p = series.p;
  const int q = series.q;
  FestPrep prep;
  prep.effect = effect;
  prep.s_chol.resize(static_cast<std::size_t>(T) + 1);
  const bool scalar_kind = effect != EffectKind::joint;
  if (scalar_kind) {
    prep.eff_mean.resize(static_cast<std::size_t>(T) + 1);
    prep.eff_sd.resize(static_cast<std::size_t>(T) + 1);
  } else {
    prep.sqrt_cll.resize(static_cast<std::size_t>(T) + 1);
  }
  for (int t = 0; t <= T; ++t) {
    const PosteriorMoments& pm = series.at[static_cast<std::size_t>(t)];
    prep.s_chol[static_cast<std::size_t>(t)] = cholesky_lower(pm.s);
    if (scalar_kind) {
      Vector mean(p), sd(p);
      // Column-scale factor for the scalar effect: S_00 for the center
      // marginal, 1'S1/q^2 for the cluster average.
      const double col_scale = effect == EffectKind::marginal
                                   ? pm.s(0, 0)
                                   : pm.s.sum() / (static_cast<double>(q) *
                                                   static_cast<double>(q));
      for (int l = 0; l < p; ++l) {
        mean(l) = effect == EffectKind::marginal ? pm.m(l, 0) : pm.m.row(l).mean();
        sd(l) = std::sqrt(std::max(pm.c(l, l), 0.0) * col_scale);
      }
      prep.eff_mean[static_cast<std::size_t>(t)] = std::move(mean);
      prep.eff_sd[static_cast<std::size_t>(t)] = std::move(sd);
    } else {
      Vector s(p);
      for (int l = 0; l < p; ++l) s(l) = std::sqrt(std::max(pm.c(l, l), 0.0));
      prep.sqrt_cll[static_cast<std::size_t>(t)] = std::move(s);
    }
  }
  return prep;
}

struct FestWorkspace {
  Vector z, tmp, ysim, e, rf, gain;
  Matrix mf, cf, r;

  FestWorkspace(int p, int q)
      : z(q), tmp(q), ysim(q), e(q), rf(p), gain(p), mf(p, q), cf(p, p), r(p, p) {}
};

// One FEST replicate: draw effects from their filtered distributions at each
// t, rebuild pseudo-data, refilter it with the same prior and evolution, and
// read off the covariate row of the refiltered means.  Only the mean/row
// recursion is carried; the refiltered column scale never feeds back into it.
// Draw order per step: effects for l = 0..p-1, then the observation noise.
void fest_one(const MomentSeries& series, const DesignMatrix& design,
              const FestPrep& prep, double discount, int covariate, Rng& rng,
              FestWorkspace& w, Matrix& traj) {
  const int T = series.T();
  const int p = series.p;
  const int q = series.q;
  const bool scalar_kind = prep.effect != EffectKind::joint;
  w.mf = series.at[0].m;
  w.cf = series.at[0].c;
  for (int t = 1; t <= T; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    const Vector f = design.row(t - 1);
    // Pseudo-observation from the sampled effects.
    if (scalar_kind) {
      double acc = 0.0;
      for (int l = 0; l < p; ++l) {
        const double theta =
            prep.eff_mean[ti](l) + prep.eff_sd[ti](l) * rng.normal();
        acc += theta * f(l);
      }
      w.ysim.setConstant(acc);
    } else {
      const PosteriorMoments& pm = series.at[ti];
      w.ysim.setZero();
      for (int l = 0; l < p; ++l) {
        fill_normal(rng, w.z);
        trimul_lower(prep.s_chol[ti], w.z, w.tmp);
        w.ysim += f(l) * (pm.m.row(l).transpose() + prep.sqrt_cll[ti](l) * w.tmp);
      }
    }
    fill_normal(rng, w.z);
    trimul_lower(prep.s_chol[ti], w.z, w.tmp);
    w.ysim += w.tmp;
    // Refilter step (G = I).
    w.r = w.cf / discount;
    w.rf.noalias() = w.r * f;
    const double q_t = f.dot(w.rf) + 1.0;
    w.e = w.ysim - w.mf.transpose() * f;
    w.gain = w.rf / q_t;
    w.mf.noalias() += w.gain * w.e.transpose();
    w.cf = w.r - q_t * w.gain * w.gain.transpose();
    w.cf = 0.5 * (w.cf + w.cf.transpose().eval());
    // Trajectory readout at the covariate row.
    if (prep.effect == EffectKind::marginal) {
      traj(t - 1, 0) = w.mf(covariate, 0);
    } else if (prep.effect == EffectKind::average_cluster) {
      traj(t - 1, 0) = w.mf.row(covariate).mean();
    } else {
      traj.row(t - 1) = w.mf.row(covariate);
    }
  }
}

void check_subjects(const std::vector<const MomentSeries*>& subjects) {
  if (subjects.empty()) throw EmptyGroup("ag needs at least one subject series");
  const MomentSeries& first = *subjects.front();
  check_series(first);
  for (const MomentSeries* s : subjects) {
    check_series(*s);
    if (s->p != first.p || s->q != first.q || s->T() != first.T()) {
      throw DimensionMismatch("ag subject series disagree on (p, q, T)");
    }
    if (s->discount != first.discount) {
      throw DimensionMismatch("ag subject series disagree on the discount factor");
    }
  }
}

}  // namespace

void SamplerConfig::validate() const {
  check_n_simu(n_simu);
  if (n_simu < 1000) {
    warn("n_simu = " + std::to_string(n_simu) +
         " is below 1000; evidence estimates will be coarse");
  }
  if (sampler == SamplerKind::ag && ag_base == SamplerKind::ag) {
    throw BadOption("ag base sampler must be fest, fsts or ffbs");
  }
}

int resolve_covariate(const SamplerConfig& cfg, int p, const DesignMatrix* design) {
  int l = cfg.covariate;
  if (l < 0) {
    l = design != nullptr ? design->first_stimulus_column() : (p > 1 ? 1 : 0);
  }
  if (l < 0 || l >= p) {
    throw IndexOutOfRange("covariate " + std::to_string(l) + " outside [0," +
                          std::to_string(p) + ")");
  }
  return l;
}

Trajectory reduce_rows(const Matrix& rows, EffectKind kind) {
  Trajectory traj;
  switch (kind) {
    case EffectKind::marginal:
      traj.values = rows.col(0);
      break;
    case EffectKind::average_cluster:
      traj.values = rows.rowwise().mean();
      break;
    case EffectKind::joint:
      traj.values = rows;
      break;
  }
  return traj;
}

void for_each_row_trajectory(const MomentSeries& series,
                             const EvolutionSpec& evolution, SamplerKind kind,
                             int n_simu, int covariate, const RngKey& key,
                             std::uint64_t subject,
                             const std::function<void(int, const Matrix&)>& visit) {
  check_series(series);
  check_evolution(evolution, series);
  check_n_simu(n_simu);
  if (covariate < 0 || covariate >= series.p) {
    throw IndexOutOfRange("covariate " + std::to_string(covariate) +
                          " outside [0," + std::to_string(series.p) + ")");
  }
  if (kind != SamplerKind::fsts && kind != SamplerKind::ffbs) {
    throw BadOption("row trajectories are defined for fsts and ffbs");
  }
  const double discount = evolution.discount;
  const bool ffbs = kind == SamplerKind::ffbs;
  const RowFactors factors =
      make_row_factors(series, discount, covariate, /*need_s_chol=*/!ffbs);
  RowWorkspace w(series.T(), series.q);
  double dof = 0.0;
  Matrix psi_chol;
  FfbsWorkspace fw(ffbs ? series.q : 1);
  if (ffbs) {
    dof = ffbs_check_dof(series);
    psi_chol = cholesky_lower(Matrix(dof * series.at.back().s));
  }
  for (int k = 0; k < n_simu; ++k) {
    Rng rng(key.seed, key.voxel, static_cast<std::uint64_t>(k), subject);
    if (ffbs) {
      ffbs_rows_one(series, factors, discount, dof, psi_chol, rng, w, fw);
    } else {
      fsts_rows_one(series, factors, discount, rng, w);
    }
    visit(k, w.rows);
  }
}

void for_each_fest_trajectory(
    const MomentSeries& series, const DesignMatrix& design,
    const EvolutionSpec& evolution, EffectKind effect, int n_simu,
    int covariate, const RngKey& key, std::uint64_t subject,
    const std::function<void(int, const Matrix&)>& visit) {
  check_series(series);
  check_evolution(evolution, series);
  check_n_simu(n_simu);
  if (design.T() != series.T() || design.p() != series.p) {
    throw DimensionMismatch("fest design is " + std::to_string(design.T()) + "x" +
                            std::to_string(design.p()) + ", series expects " +
                            std::to_string(series.T()) + "x" +
                            std::to_string(series.p));
  }
  if (covariate < 0 || covariate >= series.p) {
    throw IndexOutOfRange("covariate " + std::to_string(covariate) +
                          " outside [0," + std::to_string(series.p) + ")");
  }
  const FestPrep prep = make_fest_prep(series, effect);
  FestWorkspace w(series.p, series.q);
  Matrix traj(series.T(), effect == EffectKind::joint ? series.q : 1);
  for (int k = 0; k < n_simu; ++k) {
    Rng rng(key.seed, key.voxel, static_cast<std::uint64_t>(k), subject);
    fest_one(series, design, prep, evolution.discount, covariate, rng, w, traj);
    visit(k, traj);
  }
}

std::vector<Trajectory> fest_sample(const MomentSeries& series,
                                    const DesignMatrix& design,
                                    const EvolutionSpec& evolution,
                                    const SamplerConfig& cfg, const RngKey& key) {
  const int l = resolve_covariate(cfg, series.p, &design);
  std::vector<Trajectory> out(static_cast<std::size_t>(cfg.n_simu));
  for_each_fest_trajectory(series, design, evolution, cfg.effect, cfg.n_simu, l,
                           key, 0, [&](int k, const Matrix& traj) {
                             out[static_cast<std::size_t>(k)].values = traj;
                           });
  return out;
}

std::vector<Trajectory> fsts_sample(const MomentSeries& series,
                                    const EvolutionSpec& evolution,
                                    const SamplerConfig& cfg, const RngKey& key) {
  const int l = resolve_covariate(cfg, series.p, nullptr);
  std::vector<Trajectory> out(static_cast<std::size_t>(cfg.n_simu));
  for_each_row_trajectory(series, evolution, SamplerKind::fsts, cfg.n_simu, l,
                          key, 0, [&](int k, const Matrix& rows) {
                            out[static_cast<std::size_t>(k)] =
                                reduce_rows(rows, cfg.effect);
                          });
  return out;
}

std::vector<Trajectory> ffbs_sample(const MomentSeries& series,
                                    const EvolutionSpec& evolution,
                                    const SamplerConfig& cfg, const RngKey& key) {
  const int l = resolve_covariate(cfg, series.p, nullptr);
  std::vector<Trajectory> out(static_cast<std::size_t>(cfg.n_simu));
  for_each_row_trajectory(series, evolution, SamplerKind::ffbs, cfg.n_simu, l,
                          key, 0, [&](int k, const Matrix& rows) {
                            out[static_cast<std::size_t>(k)] =
                                reduce_rows(rows, cfg.effect);
                          });
  return out;
}

void for_each_ag_row_trajectory(
    const std::vector<const MomentSeries*>& subjects,
    const EvolutionSpec& evolution, SamplerKind base, int n_simu, int covariate,
    const RngKey& key, const std::function<void(int, const Matrix&)>& visit) {
  check_subjects(subjects);
  check_n_simu(n_simu);
  if (base != SamplerKind::fsts && base != SamplerKind::ffbs) {
    throw BadOption("ag row trajectories are defined for fsts and ffbs bases");
  }
  const MomentSeries& first = *subjects.front();
  check_evolution(evolution, first);
  if (covariate < 0 || covariate >= first.p) {
    throw IndexOutOfRange("covariate " + std::to_string(covariate) +
                          " outside [0," + std::to_string(first.p) + ")");
  }
  const double discount = evolution.discount;
  const bool ffbs = base == SamplerKind::ffbs;
  const std::size_t n_subj = subjects.size();
  std::vector<RowFactors> factors;
  std::vector<double> dof(n_subj, 0.0);
  std::vector<Matrix> psi_chol(n_subj);
  factors.reserve(n_subj);
  for (std::size_t z = 0; z < n_subj; ++z) {
    factors.push_back(
        make_row_factors(*subjects[z], discount, covariate, !ffbs));
    if (ffbs) {
      dof[z] = ffbs_check_dof(*subjects[z]);
      psi_chol[z] = cholesky_lower(Matrix(dof[z] * subjects[z]->at.back().s));
    }
  }
  RowWorkspace w(first.T(), first.q);
  FfbsWorkspace fw(ffbs ? first.q : 1);
  Matrix mean_rows(first.T(), first.q);
  for (int k = 0; k < n_simu; ++k) {
    mean_rows.setZero();
    for (std::size_t z = 0; z < n_subj; ++z) {
      Rng rng(key.seed, key.voxel, static_cast<std::uint64_t>(k), z);
      if (ffbs) {
        ffbs_rows_one(*subjects[z], factors[z], discount, dof[z], psi_chol[z],
                      rng, w, fw);
      } else {
        fsts_rows_one(*subjects[z], factors[z], discount, rng, w);
      }
      mean_rows += w.rows;
    }
    mean_rows /= static_cast<double>(n_subj);
    visit(k, mean_rows);
  }
}

std::vector<Trajectory> ag_sample(const std::vector<const MomentSeries*>& subjects,
                                  const DesignMatrix* design,
                                  const EvolutionSpec& evolution,
                                  const SamplerConfig& cfg, const RngKey& key) {
  check_subjects(subjects);
  if (cfg.ag_base == SamplerKind::ag) {
    throw BadOption("ag base sampler must be fest, fsts or ffbs");
  }
  const MomentSeries& first = *subjects.front();
  const int l = resolve_covariate(cfg, first.p, design);
  std::vector<Trajectory> out(static_cast<std::size_t>(cfg.n_simu));
  if (cfg.ag_base == SamplerKind::fest) {
    if (design == nullptr) {
      throw InputError("ag with a fest base needs the shared design matrix");
    }
    check_evolution(evolution, first);
    if (design->T() != first.T() || design->p() != first.p) {
      throw DimensionMismatch("ag design does not match the subject series");
    }
    const std::size_t n_subj = subjects.size();
    std::vector<FestPrep> preps;
    preps.reserve(n_subj);
    for (const MomentSeries* s : subjects) {
      preps.push_back(make_fest_prep(*s, cfg.effect));
    }
    FestWorkspace w(first.p, first.q);
    const int d = cfg.effect == EffectKind::joint ? first.q : 1;
    Matrix traj(first.T(), d);
    Matrix mean_traj(first.T(), d);
    for (int k = 0; k < cfg.n_simu; ++k) {
      mean_traj.setZero();
      for (std::size_t z = 0; z < n_subj; ++z) {
        Rng rng(key.seed, key.voxel, static_cast<std::uint64_t>(k), z);
        fest_one(*subjects[z], *design, preps[z], evolution.discount, l, rng, w,
                 traj);
        mean_traj += traj;
      }
      mean_traj /= static_cast<double>(n_subj);
      out[static_cast<std::size_t>(k)].values = mean_traj;
    }
    return out;
  }
  for_each_ag_row_trajectory(subjects, evolution, cfg.ag_base, cfg.n_simu, l,
                             key, [&](int k, const Matrix& rows) {
                               out[static_cast<std::size_t>(k)] =
                                   reduce_rows(rows, cfg.effect);
                             });
  return out;
}

std::pair<Matrix, Matrix> ffbs_backward_moments(const PosteriorMoments& filtered,
                                                const Matrix& theta_next,
                                                double discount) {
  if (!(discount > 0.0) || discount > 1.0) {
    throw BadOption("discount factor must lie in (0, 1]");
  }
  if (theta_next.rows() != filtered.p() || theta_next.cols() != filtered.q()) {
    throw DimensionMismatch("theta_next is " + std::to_string(theta_next.rows()) +
                            "x" + std::to_string(theta_next.cols()) +
                            ", expected " + std::to_string(filtered.p()) + "x" +
                            std::to_string(filtered.q()));
  }
  // With B = delta^{-1/2} I the smoothing gain is K = C (B C B')^{-1} = C R^{-1},
  // R = C / delta; evaluated by solve rather than the algebraic shortcut.
  const Matrix r = symmetrized(filtered.c / discount);
  const Matrix gain = spd_solve(r, filtered.c).transpose();
  Matrix mean = filtered.m + gain * (theta_next - filtered.m);
  Matrix cov = symmetrized(filtered.c - gain * filtered.c);
  return {std::move(mean), std::move(cov)};
}

bool trajectory_positive(const Matrix& values, PositivityRule rule,
                         JointRule joint_rule) {
  const Eigen::Index d = values.cols();
  const Eigen::Index n_cols =
      (d == 1 || joint_rule == JointRule::center_only) ? 1 : d;
  if (rule == PositivityRule::all_t) {
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      for (Eigen::Index t = 0; t < values.rows(); ++t) {
        if (!(values(t, c) > 0.0)) return false;
      }
    }
    return true;
  }
  for (Eigen::Index c = 0; c < n_cols; ++c) {
    if (!(values.col(c).mean() > 0.0)) return false;
  }
  return true;
}

bool row_trajectory_positive(const Matrix& rows, EffectKind kind,
                             PositivityRule rule, JointRule joint_rule) {
  switch (kind) {
    case EffectKind::marginal: {
      if (rule == PositivityRule::mean_over_t) return rows.col(0).mean() > 0.0;
      for (Eigen::Index t = 0; t < rows.rows(); ++t) {
        if (!(rows(t, 0) > 0.0)) return false;
      }
      return true;
    }
    case EffectKind::average_cluster: {
      if (rule == PositivityRule::mean_over_t) return rows.mean() > 0.0;
      for (Eigen::Index t = 0; t < rows.rows(); ++t) {
        if (!(rows.row(t).mean() > 0.0)) return false;
      }
      return true;
    }
    case EffectKind::joint:
      return trajectory_positive(rows, rule, joint_rule);
  }
  throw BadOption("unknown effect kind");
}

double activation_evidence(const std::vector<Trajectory>& trajectories,
                           PositivityRule rule, JointRule joint_rule) {
  if (trajectories.empty()) {
    throw InputError("activation evidence needs at least one trajectory");
  }
  std::size_t positive = 0;
  for (const Trajectory& traj : trajectories) {
    positive += trajectory_positive(traj.values, rule, joint_rule) ? 1 : 0;
  }
  return static_cast<double>(positive) / static_cast<double>(trajectories.size());
}

}  // namespace mdlm
