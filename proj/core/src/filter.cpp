#include "mdlm/filter.hpp"

#include <cmath>
#include <string>

namespace mdlm {

PriorSpec PriorSpec::standard(int p, int q, double c0_scale, double s0_scale,
                              double n0) {
  PriorSpec prior;
  prior.m0 = Matrix::Zero(p, q);
  prior.c0 = SpdMatrix::scaled_identity(p, c0_scale);
  prior.s0 = SpdMatrix::scaled_identity(q, s0_scale);
  prior.n0 = n0;
  return prior;
}

void PriorSpec::validate() const {
  if (m0.rows() == 0 || m0.cols() == 0) {
    throw DimensionMismatch("prior mean must be non-empty");
  }
  if (c0.dim() != p()) {
    throw DimensionMismatch("prior C0 is " + std::to_string(c0.dim()) +
                            "-dim, expected " + std::to_string(p()));
  }
  if (s0.dim() != q()) {
    throw DimensionMismatch("prior S0 is " + std::to_string(s0.dim()) +
                            "-dim, expected " + std::to_string(q()));
  }
  if (!(n0 > 0.0)) throw BadOption("prior n0 must be positive");
}

EvolutionSpec EvolutionSpec::random_walk(int p, double discount) {
  EvolutionSpec evo;
  evo.g = Matrix::Identity(p, p);
  evo.discount = discount;
  return evo;
}

bool EvolutionSpec::identity_g() const {
  return g.rows() == g.cols() && g.isIdentity(0.0);
}

void EvolutionSpec::validate() const {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw DimensionMismatch("evolution matrix G must be square and non-empty");
  }
  if (!(discount > 0.0) || discount > 1.0) {
    throw BadOption("discount factor must lie in (0, 1], got " +
                    std::to_string(discount));
  }
  if (discount <= 0.8) {
    warn("discount factor " + std::to_string(discount) +
         " is outside the usual (0.8, 1] range");
  }
}

PosteriorMoments filter_step(const PosteriorMoments& prev, const Vector& f_t,
                             const EvolutionSpec& evolution, const Vector& y_t,
                             Vector* forecast_error, double* forecast_scale) {
  const int p = prev.p();
  const int q = prev.q();
  if (f_t.size() != p) {
    throw DimensionMismatch("f_t has " + std::to_string(f_t.size()) +
                            " entries, state has " + std::to_string(p) + " rows");
  }
  if (y_t.size() != q) {
    throw DimensionMismatch("y_t has " + std::to_string(y_t.size()) +
                            " entries, state has " + std::to_string(q) +
                            " columns");
  }
  if (evolution.g.rows() != p) {
    throw DimensionMismatch("evolution matrix G is " +
                            std::to_string(evolution.g.rows()) +
                            "-dim, state has " + std::to_string(p) + " rows");
  }
  if (!(prev.n > 0.0)) throw BadOption("filter_step requires n > 0");

  const bool identity = evolution.identity_g();
  PosteriorMoments post;
  Matrix a = identity ? prev.m : Matrix(evolution.g * prev.m);
  Matrix r = identity
                 ? Matrix(prev.c / evolution.discount)
                 : Matrix(evolution.g * prev.c * evolution.g.transpose() /
                          evolution.discount);
  r = symmetrized(r);

  const Vector yhat = a.transpose() * f_t;
  const Vector rf = r * f_t;
  const double q_t = f_t.dot(rf) + 1.0;
  const Vector e = y_t - yhat;
  const Vector adapt = rf / q_t;

  post.m = a + adapt * e.transpose();
  post.c = symmetrized(r - q_t * adapt * adapt.transpose());
  post.n = prev.n + 1.0;
  post.s = symmetrized((prev.n * prev.s + e * e.transpose() / q_t) / post.n);
  if (forecast_error) *forecast_error = e;
  if (forecast_scale) *forecast_scale = q_t;
  if (!std::isfinite(post.m.sum()) || !std::isfinite(post.c.sum()) ||
      !std::isfinite(post.s.sum())) {
    throw NonFinite("filter_step produced non-finite moments");
  }
  return post;
}

FilterOutput filter_series(const Matrix& y, const DesignMatrix& design,
                           const EvolutionSpec& evolution,
                           const PriorSpec& prior) {
  prior.validate();
  evolution.validate();
  const int T = static_cast<int>(y.rows());
  const int q = static_cast<int>(y.cols());
  const int p = prior.p();
  if (design.T() != T) {
    throw DimensionMismatch("design has " + std::to_string(design.T()) +
                            " scans, series has " + std::to_string(T));
  }
  if (design.p() != p) {
    throw DimensionMismatch("design has " + std::to_string(design.p()) +
                            " columns, prior state has " + std::to_string(p) +
                            " rows");
  }
  if (prior.q() != q) {
    throw DimensionMismatch("prior is for " + std::to_string(prior.q()) +
                            " series, got " + std::to_string(q));
  }

  FilterOutput out;
  out.series.p = p;
  out.series.q = q;
  out.series.discount = evolution.discount;
  out.series.at.reserve(static_cast<std::size_t>(T) + 1);
  PosteriorMoments state;
  state.m = prior.m0;
  state.c = prior.c0.mat();
  state.s = prior.s0.mat();
  state.n = prior.n0;
  out.series.at.push_back(state);
  out.forecast_errors.reserve(static_cast<std::size_t>(T));
  out.forecast_scales.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    Vector e;
    double q_t = 0.0;
    state = filter_step(state, design.row(t), evolution,
                        y.row(t).transpose(), &e, &q_t);
    out.series.at.push_back(state);
    out.forecast_errors.push_back(std::move(e));
    out.forecast_scales.push_back(q_t);
  }
  out.series.dof = state.n;
  return out;
}

MatrixNormalParams normal_approx(const PosteriorMoments& pm) {
  MatrixNormalParams params;
  params.mean = pm.m;
  params.row_cov = SpdMatrix(pm.c);
  params.col_cov = SpdMatrix(pm.s);
  params.degraded = pm.n < kNormalApproxDofThreshold;
  return params;
}

}  // namespace mdlm
