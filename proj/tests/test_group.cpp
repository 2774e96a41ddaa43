#include <vector>

#include "doctest.h"
#include "mdlm/group.hpp"
#include "mdlm/rng.hpp"

using namespace mdlm;

namespace {

MatrixNormalParams random_subject(Rng& rng, int p, int q) {
  MatrixNormalParams s;
  s.mean = Matrix(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) s.mean(i, j) = rng.normal();
  Matrix b(p, p), d(q, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) b(i, j) = rng.normal();
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) d(i, j) = rng.normal();
  s.row_cov = SpdMatrix(Matrix(b.transpose() * b + Matrix::Identity(p, p)));
  s.col_cov = SpdMatrix(Matrix(d.transpose() * d + Matrix::Identity(q, q)));
  return s;
}

}  // namespace

TEST_CASE("combination is the averaging identity") {
  Rng rng(71);
  for (int n_g : {1, 2, 5, 8}) {
    std::vector<MatrixNormalParams> subjects;
    for (int z = 0; z < n_g; ++z) subjects.push_back(random_subject(rng, 2, 3));
    const MatrixNormalParams g = combine_group(subjects);
    Matrix mean_sum = Matrix::Zero(2, 3);
    Matrix row_sum = Matrix::Zero(2, 2), col_sum = Matrix::Zero(3, 3);
    for (const auto& s : subjects) {
      mean_sum += s.mean;
      row_sum += s.row_cov.mat();
      col_sum += s.col_cov.mat();
    }
    const double n2 = double(n_g) * n_g;
    CHECK((g.mean - mean_sum / n_g).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.row_cov.mat() - row_sum / n2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.col_cov.mat() - col_sum / n2).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("single subject combines to itself, bitwise") {
  Rng rng(73);
  const MatrixNormalParams s = random_subject(rng, 3, 2);
  const MatrixNormalParams g = combine_group({s});
  CHECK((g.mean.array() == s.mean.array()).all());
  CHECK((g.row_cov.mat().array() == s.row_cov.mat().array()).all());
  CHECK((g.col_cov.mat().array() == s.col_cov.mat().array()).all());
}

TEST_CASE("combination is order-insensitive to summation noise") {
  Rng rng(79);
  std::vector<MatrixNormalParams> subjects;
  for (int z = 0; z < 7; ++z) subjects.push_back(random_subject(rng, 2, 2));
  std::vector<MatrixNormalParams> reversed(subjects.rbegin(), subjects.rend());
  const MatrixNormalParams a = combine_group(subjects);
  const MatrixNormalParams b = combine_group(reversed);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.row_cov.mat() - b.row_cov.mat()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.col_cov.mat() - b.col_cov.mat()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("empty group and dimension clashes throw") {
  CHECK_THROWS_AS(combine_group({}), EmptyGroup);
  Rng rng(83);
  CHECK_THROWS_AS(
      combine_group({random_subject(rng, 2, 2), random_subject(rng, 3, 2)}),
      DimensionMismatch);
}

TEST_CASE("pooled dof follows sum minus (N-1)") {
  CHECK(pooled_group_dof({41.0, 41.0, 41.0}) == 121.0);
  CHECK(pooled_group_dof({5.0}) == 5.0);
  CHECK_THROWS_AS(pooled_group_dof({0.2, 0.2, 0.2}), DofTooSmall);
  CHECK_THROWS_AS(pooled_group_dof({}), EmptyGroup);
}

TEST_CASE("series combination pools per timepoint") {
  auto make_series = [](double bump) {
    MomentSeries s;
    s.p = 1;
    s.q = 1;
    s.discount = 0.9;
    for (int t = 0; t <= 3; ++t) {
      PosteriorMoments pm;
      pm.m = Matrix::Constant(1, 1, bump + t);
      pm.c = Matrix::Identity(1, 1);
      pm.s = Matrix::Identity(1, 1);
      pm.n = 1.0 + t;
      s.at.push_back(pm);
    }
    s.dof = s.at.back().n;
    return s;
  };
  const MomentSeries a = make_series(0.0), b = make_series(10.0);
  const MomentSeries g = combine_series({&a, &b});
  REQUIRE(g.T() == 3);
  for (int t = 0; t <= 3; ++t) {
    CHECK(g.at[t].m(0, 0) == doctest::Approx(5.0 + t));
    CHECK(g.at[t].c(0, 0) == doctest::Approx(0.5));
    CHECK(g.at[t].n == 2.0 * (1.0 + t) - 1.0);  // sum - (N-1) per step
  }
  CHECK(g.dof == g.at[3].n);

  MomentSeries c = make_series(0.0);
  c.discount = 0.8;
  CHECK_THROWS_AS(combine_series({&a, &c}), DimensionMismatch);
}

TEST_CASE("effect readouts of the kronecker posterior") {
  MatrixNormalParams st;
  st.mean = Matrix(2, 3);
  st.mean << 1, 2, 3, 4, 5, 6;
  Matrix c(2, 2), s(3, 3);
  c << 2.0, 0.5, 0.5, 1.0;
  s << 1.0, 0.2, 0.1, 0.2, 2.0, 0.3, 0.1, 0.3, 3.0;
  st.row_cov = SpdMatrix(c);
  st.col_cov = SpdMatrix(s);

  const EffectDistribution m = marginal_effect(st, 1);
  CHECK(m.mean(0) == 4.0);
  CHECK(m.cov(0, 0) == doctest::Approx(1.0 * 1.0));  // C_11 S_00

  const EffectDistribution a = avg_cluster_effect(st, 1);
  CHECK(a.mean(0) == doctest::Approx(5.0));
  CHECK(a.cov(0, 0) == doctest::Approx(1.0 * s.sum() / 9.0));

  const EffectDistribution j = joint_effect(st, 1);
  CHECK((j.mean.transpose() - st.mean.row(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((j.cov - 1.0 * s).cwiseAbs().maxCoeff() < 1e-15);

  CHECK(effect_distribution(st, EffectKind::marginal, 1).mean(0) == 4.0);
  CHECK_THROWS_AS(marginal_effect(st, 5), IndexOutOfRange);
}
