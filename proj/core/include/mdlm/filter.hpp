#pragma once

#include <vector>

#include "mdlm/design.hpp"
#include "mdlm/distributions.hpp"
#include "mdlm/linalg.hpp"

// Forward filtering for the matrix-variate DLM
//
//   y_t' = f_t' Theta_t + nu_t',   nu_t ~ N(0, Sigma)
//   Theta_t = G Theta_{t-1} + Omega_t
//
// with conjugate updating under a single discount factor delta.  The state
// posterior at each step is Student-T with moments (m, C, S, n); one discount
// step followed by one observation update is
//
//   a = G m,  R = G C G' / delta
//   yhat = a' f,  q = f' R f + 1,  e = y - yhat,  A = R f / q
//   m = a + A e',  C = R - q A A',  n += 1,  S = (n_prev S_prev + e e'/q) / n.

namespace mdlm {

struct PriorSpec {
  Matrix m0;      // p x q
  SpdMatrix c0;   // p x p
  SpdMatrix s0;   // q x q
  double n0 = 1.0;

  // The house prior: m0 = 0, C0 = c0_scale I, S0 = s0_scale I, n0 = 1.
  static PriorSpec standard(int p, int q, double c0_scale = 100.0,
                            double s0_scale = 1.0, double n0 = 1.0);
  int p() const { return static_cast<int>(m0.rows()); }
  int q() const { return static_cast<int>(m0.cols()); }
  void validate() const;
};

struct EvolutionSpec {
  Matrix g;                // p x p state transition
  double discount = 0.95;  // in (0, 1]

  static EvolutionSpec random_walk(int p, double discount = 0.95);
  bool identity_g() const;
  // Throws on discount outside (0, 1]; warns once when outside (0.8, 1],
  // the range the updating equations are intended for.
  void validate() const;
};

struct PosteriorMoments {
  Matrix m;   // p x q
  Matrix c;   // p x p
  Matrix s;   // q x q
  double n = 0.0;

  int p() const { return static_cast<int>(m.rows()); }
  int q() const { return static_cast<int>(m.cols()); }
};

// Moments for t = 0..T; index 0 is the prior.  dof is the final-time degrees
// of freedom (for a group series, the pooled value).
struct MomentSeries {
  std::vector<PosteriorMoments> at;
  int p = 0;
  int q = 0;
  double discount = 0.0;
  double dof = 0.0;

  int T() const { return static_cast<int>(at.size()) - 1; }
};

struct FilterOutput {
  MomentSeries series;
  std::vector<Vector> forecast_errors;  // e_t, index t-1
  std::vector<double> forecast_scales;  // q_t, index t-1
};

// One discount + observation update.  Optionally reports the one-step
// forecast error and scale.
PosteriorMoments filter_step(const PosteriorMoments& prev, const Vector& f_t,
                             const EvolutionSpec& evolution, const Vector& y_t,
                             Vector* forecast_error = nullptr,
                             double* forecast_scale = nullptr);

// Filters a T x q response series against a T x p design.
FilterOutput filter_series(const Matrix& y, const DesignMatrix& design,
                           const EvolutionSpec& evolution,
                           const PriorSpec& prior);

// Below this many degrees of freedom the Student-T-to-normal collapse is
// marked degraded.
constexpr double kNormalApproxDofThreshold = 30.0;

// Collapses a Student-T posterior to its matrix-normal approximation
// N[m, C, S]; sets the degraded flag when n is below the threshold.
MatrixNormalParams normal_approx(const PosteriorMoments& pm);

}  // namespace mdlm
