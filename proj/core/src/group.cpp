#include "mdlm/group.hpp"

#include <string>

namespace mdlm {

namespace {

void check_covariate(int covariate, int p) {
  if (covariate < 0 || covariate >= p) {
    throw IndexOutOfRange("covariate " + std::to_string(covariate) +
                          " outside [0," + std::to_string(p) + ")");
  }
}

}  // namespace

MatrixNormalParams combine_group(const std::vector<MatrixNormalParams>& subjects) {
  if (subjects.empty()) throw EmptyGroup("combine_group needs at least one subject");
  const int p = subjects.front().p();
  const int q = subjects.front().q();
  Matrix mean = Matrix::Zero(p, q);
  Matrix row = Matrix::Zero(p, p);
  Matrix col = Matrix::Zero(q, q);
  bool degraded = false;
  for (std::size_t z = 0; z < subjects.size(); ++z) {
    const MatrixNormalParams& s = subjects[z];
    s.validate();
    if (s.p() != p || s.q() != q) {
      throw DimensionMismatch("subject " + std::to_string(z) + " is " +
                              std::to_string(s.p()) + "x" + std::to_string(s.q()) +
                              ", expected " + std::to_string(p) + "x" +
                              std::to_string(q));
    }
    mean += s.mean;
    row += s.row_cov.mat();
    col += s.col_cov.mat();
    degraded = degraded || s.degraded;
  }
  const double n = static_cast<double>(subjects.size());
  MatrixNormalParams group;
  group.mean = mean / n;
  group.row_cov = SpdMatrix(Matrix(row / (n * n)));
  group.col_cov = SpdMatrix(Matrix(col / (n * n)));
  group.degraded = degraded;
  return group;
}

double pooled_group_dof(const std::vector<double>& subject_dof) {
  if (subject_dof.empty()) throw EmptyGroup("pooled dof needs at least one subject");
  double sum = 0.0;
  for (double n : subject_dof) {
    if (!(n > 0.0)) throw BadOption("subject dof must be positive");
    sum += n;
  }
  const double pooled = sum - (static_cast<double>(subject_dof.size()) - 1.0);
  if (!(pooled > 0.0)) {
    throw DofTooSmall("pooled dof " + std::to_string(pooled) +
                      " is not positive");
  }
  return pooled;
}

MomentSeries combine_series(const std::vector<const MomentSeries*>& subjects) {
  if (subjects.empty()) throw EmptyGroup("combine_series needs at least one subject");
  const MomentSeries& first = *subjects.front();
  for (const MomentSeries* s : subjects) {
    if (s->p != first.p || s->q != first.q || s->T() != first.T()) {
      throw DimensionMismatch("subject series disagree on (p, q, T)");
    }
    if (s->discount != first.discount) {
      throw DimensionMismatch("subject series disagree on the discount factor");
    }
  }
  const double n_subj = static_cast<double>(subjects.size());
  MomentSeries group;
  group.p = first.p;
  group.q = first.q;
  group.discount = first.discount;
  group.at.resize(first.at.size());
  for (std::size_t t = 0; t < first.at.size(); ++t) {
    Matrix mean = Matrix::Zero(first.p, first.q);
    Matrix row = Matrix::Zero(first.p, first.p);
    Matrix col = Matrix::Zero(first.q, first.q);
    double dof_sum = 0.0;
    for (const MomentSeries* s : subjects) {
      mean += s->at[t].m;
      row += s->at[t].c;
      col += s->at[t].s;
      dof_sum += s->at[t].n;
    }
    PosteriorMoments& g = group.at[t];
    g.m = mean / n_subj;
    g.c = row / (n_subj * n_subj);
    g.s = col / (n_subj * n_subj);
    g.n = dof_sum - (n_subj - 1.0);
  }
  group.dof = group.at.back().n;
  return group;
}

EffectDistribution marginal_effect(const MatrixNormalParams& state, int covariate) {
  state.validate();
  check_covariate(covariate, state.p());
  EffectDistribution eff;
  eff.kind = EffectKind::marginal;
  eff.covariate = covariate;
  eff.mean = Vector::Constant(1, state.mean(covariate, 0));
  eff.cov = Matrix::Constant(
      1, 1, state.row_cov.mat()(covariate, covariate) * state.col_cov.mat()(0, 0));
  return eff;
}

EffectDistribution avg_cluster_effect(const MatrixNormalParams& state,
                                      int covariate) {
  state.validate();
  check_covariate(covariate, state.p());
  const int q = state.q();
  EffectDistribution eff;
  eff.kind = EffectKind::average_cluster;
  eff.covariate = covariate;
  eff.mean = Vector::Constant(1, state.mean.row(covariate).mean());
  const double s_sum = state.col_cov.mat().sum();
  eff.cov = Matrix::Constant(1, 1,
                             state.row_cov.mat()(covariate, covariate) * s_sum /
                                 (static_cast<double>(q) * static_cast<double>(q)));
  return eff;
}

EffectDistribution joint_effect(const MatrixNormalParams& state, int covariate) {
  state.validate();
  check_covariate(covariate, state.p());
  EffectDistribution eff;
  eff.kind = EffectKind::joint;
  eff.covariate = covariate;
  eff.mean = state.mean.row(covariate).transpose();
  eff.cov = state.row_cov.mat()(covariate, covariate) * state.col_cov.mat();
  return eff;
}

EffectDistribution effect_distribution(const MatrixNormalParams& state,
                                       EffectKind kind, int covariate) {
  switch (kind) {
    case EffectKind::marginal: return marginal_effect(state, covariate);
    case EffectKind::average_cluster: return avg_cluster_effect(state, covariate);
    case EffectKind::joint: return joint_effect(state, covariate);
  }
  throw BadOption("unknown effect kind");
}

}  // namespace mdlm
