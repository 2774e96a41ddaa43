#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mdlm/filter.hpp"
#include "mdlm/group.hpp"

// Monte Carlo trajectory samplers over the filtered state history.
//
//   FEST  draws effects theta_tl from their filtered effect distributions,
//         rebuilds pseudo-data Ytilde_t = sum_l theta_tl x_tl + nu (nu with
//         column scale S_t), refilters it with the same prior and evolution,
//         and reads the trajectory off the refiltered means.
//   FSTS  draws Theta_t = Theta_{t-1} + Omega_t with Theta_{t-1} drawn fresh
//         from the filtered posterior at t-1 and Omega_t ~ N[0, W_t, S_t],
//         W_t = (1 - delta)/delta C_{t-1}.
//   FFBS  draws Sigma from the inverse-Wishart at T, Theta_T from the filtered
//         posterior with column scale Sigma, then walks backward through the
//         exact smoothing conditionals, which for the random walk reduce to
//         mean m + delta (Theta_next - m) and row covariance (1 - delta) C.
//   AG    runs one of the above per subject at the individual level and
//         averages the per-subject trajectories replicate by replicate.
//
// All samplers require the random-walk evolution (G = I); under it each row
// of the state evolves autonomously, so the covariate row of a trajectory is
// drawn directly from its exact row marginal (a q-variate normal per step)
// instead of materializing the full p x q state.  Effect reductions (marginal,
// cluster average, joint) are linear readouts of that row.
//
// Randomness is drawn from streams keyed by (seed, voxel, replicate, subject);
// replicate k of voxel v is identical no matter how work is scheduled, and an
// aggregated run over a single subject reproduces its base sampler bit for
// bit.

namespace mdlm {

enum class SamplerKind { fest, fsts, ffbs, ag };
enum class PositivityRule { all_t, mean_over_t };
enum class JointRule { all_components, center_only };

struct SamplerConfig {
  SamplerKind sampler = SamplerKind::fsts;
  SamplerKind ag_base = SamplerKind::fsts;  // base sampler for ag
  EffectKind effect = EffectKind::marginal;
  PositivityRule rule = PositivityRule::all_t;
  JointRule joint_rule = JointRule::all_components;
  int n_simu = 2000;
  std::uint64_t seed = 0;
  int covariate = -1;  // -1: first stimulus column (row 1 when no design given)

  // Hard checks (n_simu >= 100, ag base != ag) plus a warning below 1000
  // replicates.  Call once per run, not per voxel.
  void validate() const;
};

// Stream key for one voxel's draws.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t voxel = 0;
};

// One sampled trajectory over t = 1..T: one column for the scalar effect
// kinds, q columns for the joint effect.
struct Trajectory {
  Matrix values;

  int T() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
};

int resolve_covariate(const SamplerConfig& cfg, int p,
                      const DesignMatrix* design);

// Effect readout of a T x q covariate-row trajectory.
Trajectory reduce_rows(const Matrix& rows, EffectKind kind);

std::vector<Trajectory> fest_sample(const MomentSeries& series,
                                    const DesignMatrix& design,
                                    const EvolutionSpec& evolution,
                                    const SamplerConfig& cfg, const RngKey& key);

std::vector<Trajectory> fsts_sample(const MomentSeries& series,
                                    const EvolutionSpec& evolution,
                                    const SamplerConfig& cfg, const RngKey& key);

std::vector<Trajectory> ffbs_sample(const MomentSeries& series,
                                    const EvolutionSpec& evolution,
                                    const SamplerConfig& cfg, const RngKey& key);

// Aggregated sampler: design may be null unless the base is fest.
std::vector<Trajectory> ag_sample(const std::vector<const MomentSeries*>& subjects,
                                  const DesignMatrix* design,
                                  const EvolutionSpec& evolution,
                                  const SamplerConfig& cfg, const RngKey& key);

// Backward conditional of the state at a step given the drawn state one step
// ahead, evaluated from the general smoothing identities (inverses taken
// numerically, no random-walk shortcut).  Returns (mean, row covariance).
std::pair<Matrix, Matrix> ffbs_backward_moments(const PosteriorMoments& filtered,
                                                const Matrix& theta_next,
                                                double discount);

// Streaming access to covariate-row trajectories (T x q), one call per
// replicate; lets a caller feed several effect reductions from a single pass
// without materializing the set.  kind must be fsts or ffbs.
void for_each_row_trajectory(const MomentSeries& series,
                             const EvolutionSpec& evolution, SamplerKind kind,
                             int n_simu, int covariate, const RngKey& key,
                             std::uint64_t subject,
                             const std::function<void(int, const Matrix&)>& visit);

// Same for the aggregated sampler (base fsts or ffbs): the visitor sees the
// subject-averaged row trajectory.
void for_each_ag_row_trajectory(
    const std::vector<const MomentSeries*>& subjects,
    const EvolutionSpec& evolution, SamplerKind base, int n_simu, int covariate,
    const RngKey& key, const std::function<void(int, const Matrix&)>& visit);

// Streaming FEST trajectories (already effect-reduced).
void for_each_fest_trajectory(
    const MomentSeries& series, const DesignMatrix& design,
    const EvolutionSpec& evolution, EffectKind effect, int n_simu,
    int covariate, const RngKey& key, std::uint64_t subject,
    const std::function<void(int, const Matrix&)>& visit);

// Fraction of trajectories whose selected components are positive under the
// rule: every timepoint (all_t) or the time average (mean_over_t).  Joint
// trajectories test all components, or only the center column under
// center_only.
double activation_evidence(const std::vector<Trajectory>& trajectories,
                           PositivityRule rule,
                           JointRule joint_rule = JointRule::all_components);

bool trajectory_positive(const Matrix& values, PositivityRule rule,
                         JointRule joint_rule);

// Positivity of an un-reduced T x q covariate-row trajectory under an effect
// kind, equivalent to reduce_rows + trajectory_positive without the copy.
bool row_trajectory_positive(const Matrix& rows, EffectKind kind,
                             PositivityRule rule, JointRule joint_rule);

}  // namespace mdlm
