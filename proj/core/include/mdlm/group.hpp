#pragma once

#include <vector>

#include "mdlm/filter.hpp"

// Group-level posterior.  Subject posteriors (normal approximations of the
// per-subject filters) combine by averaging: the group mean is the average of
// subject means, and because subjects are independent the covariances add,
// giving 1/N^2 times the sums for both the row and column factors.  Pooled
// degrees of freedom are sum(n) - (N - 1).

namespace mdlm {

enum class EffectKind { marginal, average_cluster, joint };

// A normal effect distribution extracted from the Kronecker-structured state
// posterior: cov(vec Theta) = S (x) C.  For covariate row l:
//   marginal        theta_{l,0}        ~ N(m[l,0],   C_ll S_00)
//   average_cluster mean_j theta_{l,j} ~ N(mean m[l,.], C_ll 1'S1 / q^2)
//   joint           theta_{l,.}        ~ N_q(m[l,.],  C_ll S)
struct EffectDistribution {
  EffectKind kind = EffectKind::marginal;
  int covariate = 0;
  Vector mean;  // length 1 for scalar kinds, q for joint
  Matrix cov;   // 1x1 or q x q
};

MatrixNormalParams combine_group(const std::vector<MatrixNormalParams>& subjects);

// Pooled dof from per-subject final dof.
double pooled_group_dof(const std::vector<double>& subject_dof);

// Per-timepoint combination of whole filtered series; subject series must
// agree on (p, q, T) and discount.  The group series' per-step n carries the
// same pooling rule applied at each t.
MomentSeries combine_series(const std::vector<const MomentSeries*>& subjects);

EffectDistribution marginal_effect(const MatrixNormalParams& state, int covariate);
EffectDistribution avg_cluster_effect(const MatrixNormalParams& state, int covariate);
EffectDistribution joint_effect(const MatrixNormalParams& state, int covariate);
EffectDistribution effect_distribution(const MatrixNormalParams& state,
                                       EffectKind kind, int covariate);

}  // namespace mdlm
