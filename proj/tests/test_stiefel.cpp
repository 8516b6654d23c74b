#include <cmath>
#include <vector>

#include "doctest.h"
#include "slg/stiefel.hpp"
#include "test_util.hpp"

using namespace slg;
using namespace testutil;

namespace {

double max_orthonormality_error(const Matrix& U) {
  const int T = static_cast<int>(U.cols());
  return (U.transpose() * U - Matrix::Identity(T, T)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("stiefel") {

TEST_CASE("vMF draws live on the sphere; kappa = 0 is uniform") {
  Rng rng(21);
  Vector mu = Vector::Zero(4);
  mu(0) = 1.0;
  Vector mean = Vector::Zero(4);
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    const Vector x = vmf_sample(mu, 0.0, rng);
    REQUIRE(x.norm() == doctest::Approx(1.0).epsilon(1e-10));
    mean += x;
  }
  mean /= N;
  // Uniform on S^3: mean 0, per-coordinate sd = 1/2, se ~ 0.0035.
  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("vMF mean resultant length matches coth(kappa) - 1/kappa on S^2") {
  Rng rng(22);
  Vector mu(3);
  mu << 0.0, 0.6, 0.8;
  const double kappa = 2.0;
  const int N = 100000;
  double proj = 0.0;
  for (int i = 0; i < N; ++i) proj += mu.dot(vmf_sample(mu, kappa, rng));
  proj /= N;
  const double expected = 1.0 / std::tanh(kappa) - 1.0 / kappa;  // 0.53731
  CHECK(expected == doctest::Approx(0.5373147).epsilon(1e-5));
  CHECK(proj == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("vMF in one dimension is the two-point tilt") {
  Rng rng(23);
  Vector mu(1);
  mu << 1.0;
  const double kappa = 1.5;
  int pos = 0;
  const int N = 40000;
  for (int i = 0; i < N; ++i) {
    const Vector x = vmf_sample(mu, kappa, rng);
    REQUIRE(std::abs(std::abs(x(0)) - 1.0) < 1e-12);
    pos += x(0) > 0.0 ? 1 : 0;
  }
  // P(+1) = e^k / (e^k + e^-k)
  const double p = 1.0 / (1.0 + std::exp(-2.0 * kappa));
  CHECK(pos / static_cast<double>(N) == doctest::Approx(p).epsilon(0.01));
}

TEST_CASE("uniform draws satisfy the manifold constraints") {
  Rng rng(24);
  Vector col2_mean = Vector::Zero(7);
  double first_sq = 0.0;
  const int N = 4000;
  for (int i = 0; i < N; ++i) {
    const StiefelPoint pt = sample_uniform_stiefel_star(7, 3, rng);
    REQUIRE(max_orthonormality_error(pt.U) < 1e-10);
    REQUIRE(pt.U.col(0).minCoeff() > 0.0);
    CHECK_NOTHROW(validate_stiefel_point(pt));
    col2_mean += pt.U.col(1);
    first_sq += 7.0 * pt.U(0, 0) * pt.U(0, 0);
  }
  col2_mean /= N;
  first_sq /= N;
  // Columns beyond the first are sign-symmetric.
  CHECK(col2_mean.cwiseAbs().maxCoeff() < 0.03);
  // Uniform-sphere coordinate: E[n * u^2] = 1.
  CHECK(first_sq == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("langevin transitions stay on the manifold and concentrate") {
  Rng rng(25);
  const int n = 8, T = 3;
  const StiefelPoint target = sample_uniform_stiefel_star(n, T, rng);
  LangevinParams lp;
  lp.C = 40.0 * target.U;

  StiefelPoint cur = sample_uniform_stiefel_star(n, T, rng);
  LangevinStats stats;
  double late_score = 0.0;
  int late = 0;
  for (int it = 0; it < 400; ++it) {
    cur = sample_matrix_langevin(lp, cur, rng, &stats);
    REQUIRE(max_orthonormality_error(cur.U) < 1e-9);
    REQUIRE(cur.U.col(0).minCoeff() > 0.0);
    if (it >= 200) {
      late_score += (lp.C.transpose() * cur.U).trace();
      ++late;
    }
  }
  // tr(C'U) maxes at 40 * T = 120; a concentrated chain should sit high.
  CHECK(late_score / late > 100.0);
  CHECK(stats.positivity_attempts >= 400);
}

TEST_CASE("kappa = 0 transition preserves the uniform distribution") {
  Rng rng(26);
  const int n = 6, T = 2;
  LangevinParams lp;
  lp.C = Matrix::Zero(n, T);
  const int N = 4000;
  std::vector<double> fresh, moved;
  const Vector probe = [&] {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = std::sin(1.0 + i);
    return v;
  }();
  for (int i = 0; i < N; ++i) {
    const StiefelPoint a = sample_uniform_stiefel_star(n, T, rng);
    StiefelPoint b = sample_uniform_stiefel_star(n, T, rng);
    b = sample_matrix_langevin(lp, b, rng);
    fresh.push_back(probe.dot(a.U.col(1)) + a.U(0, 0));
    moved.push_back(probe.dot(b.U.col(1)) + b.U(0, 0));
  }
  // Two-sample KS, alpha ~ 0.001: 1.95 * sqrt(2/N)
  CHECK(ks_two_sample(fresh, moved) < 1.95 * std::sqrt(2.0 / N));
}

TEST_CASE("positivity cap keeps the previous first column") {
  Rng rng(27);
  const int n = 10, T = 2;
  StiefelPoint cur = sample_uniform_stiefel_star(n, T, rng);
  const Vector old_col = cur.U.col(0);
  LangevinParams lp;
  lp.C = Matrix::Zero(n, T);
  // Concentrate column 1 on the negative orthant: rejection must exhaust.
  lp.C.col(0) = -400.0 * Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  LangevinStats stats;
  StiefelPoint next = cur;
  for (int it = 0; it < 20; ++it)
    next = sample_matrix_langevin(lp, next, rng, &stats);
  CHECK(stats.positivity_exhausted > 0);
  CHECK(next.U.col(0).minCoeff() > 0.0);
  CHECK(max_orthonormality_error(next.U) < 1e-9);
}

TEST_CASE("validate_stiefel_point rejects broken inputs") {
  Rng rng(28);
  StiefelPoint pt = sample_uniform_stiefel_star(5, 2, rng);
  StiefelPoint bad = pt;
  bad.U(0, 0) = -bad.U(0, 0);
  CHECK_THROWS_AS(validate_stiefel_point(bad), Error);
  bad = pt;
  bad.U.col(1) *= 2.0;
  CHECK_THROWS_AS(validate_stiefel_point(bad), Error);
}

}  // TEST_SUITE
