#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "slg/partition.hpp"
#include "slg/synth.hpp"
#include "test_util.hpp"

using namespace slg;
using namespace testutil;

namespace {

WeightedGraph path4() {
  WeightedGraph g;
  g.n = 4;
  g.A = Matrix::Zero(4, 4);
  g.A(0, 1) = g.A(1, 0) = 1.0;
  g.A(1, 2) = g.A(2, 1) = 1.0;
  g.A(2, 3) = g.A(3, 2) = 1.0;
  return g;
}

WeightedGraph two_triangles(double bridge) {
  WeightedGraph g;
  g.n = 6;
  g.A = Matrix::Zero(6, 6);
  auto connect = [&](int i, int j, double w) { g.A(i, j) = g.A(j, i) = w; };
  connect(0, 1, 1.0);
  connect(1, 2, 1.0);
  connect(0, 2, 1.0);
  connect(3, 4, 1.0);
  connect(4, 5, 1.0);
  connect(3, 5, 1.0);
  connect(2, 3, bridge);
  return g;
}

std::vector<int> to_vec(const IntVector& v) {
  return std::vector<int>(v.data(), v.data() + v.size());
}

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("effective_kappa counts the switched-on indicators") {
  IntVector eta(3);
  eta << 1, 1, 0;
  CHECK(effective_kappa(eta) == 2);
  eta << 1, 0, 0;
  CHECK(effective_kappa(eta) == 1);
  CHECK_THROWS_AS(effective_kappa(IntVector()), Error);
  eta << 1, 2, 0;
  try {
    effective_kappa(eta);
    FAIL("expected InvalidParam");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidParam);
  }
}

TEST_CASE("second eigenvector halves a path graph") {
  const WeightedGraph g = path4();
  const NormalizedLaplacian nl = build_laplacian(g);
  const EigenDecomposition eig = full_eigendecomposition(nl.L);
  const PartitionResult res = sign_partition(eig.W, eig.omega, 2);
  CHECK(res.kappa == 2);
  IntVector expected(4);
  expected << 1, 1, 2, 2;
  CHECK(nmi(res.labels, expected) == doctest::Approx(1.0).epsilon(1e-12));
  // T = n: the reconstruction is the input Laplacian itself, so the cut loss
  // must equal the direct one computed on the original graph.
  CHECK(res.cut_loss ==
        doctest::Approx(normalized_cut_loss(g, to_vec(res.labels)))
            .epsilon(1e-9));
  Vector sorted = eig.omega;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  CHECK(res.cheeger_ceiling ==
        doctest::Approx(cheeger_bound(2, sorted)).epsilon(1e-12));
}

TEST_CASE("full-spectrum round trip reproduces the direct cut loss") {
  const WeightedGraph g = two_triangles(0.5);
  const NormalizedLaplacian nl = build_laplacian(g);
  const EigenDecomposition eig = full_eigendecomposition(nl.L);
  const PartitionResult res = sign_partition(eig.W, eig.omega, 2);
  IntVector expected(6);
  expected << 1, 1, 1, 2, 2, 2;
  CHECK(nmi(res.labels, expected) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.cut_loss ==
        doctest::Approx(normalized_cut_loss(g, to_vec(res.labels)))
            .epsilon(1e-9));
  CHECK(res.cut_loss == doctest::Approx(0.5 / 6.0).epsilon(1e-9));
}

TEST_CASE("kappa = 1 returns a single block without touching the spectrum") {
  Matrix Q = Matrix::Ones(5, 2) / std::sqrt(5.0);
  Vector lam(2);
  lam << 0.0, 0.4;
  const PartitionResult res = sign_partition(Q, lam, 1);
  CHECK(res.kappa == 1);
  CHECK((res.labels.array() == 1).all());
  CHECK(res.cut_loss == 0.0);
  CHECK(res.cheeger_ceiling == 0.0);
}

TEST_CASE("single-signed chosen block: strict throws, lenient skips") {
  const double c = 1.0 / std::sqrt(6.0);
  Matrix Q(6, 3);
  Vector lam(3);
  lam << 0.0, 0.3, 0.6;
  Q.col(0) = Vector::Constant(6, c);
  Q.col(1) << c, c, c, -c, -c, -c;
  Q.col(2) << 1, 2, 3, 1, 1, 1;  // all positive: no sign split possible
  SignPartitionOptions opts;
  opts.compute_cut = false;
  try {
    sign_partition(Q, lam, 3, opts);
    FAIL("expected EmptySplit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptySplit);
    CHECK(std::strstr(e.what(), "block 1") != nullptr);
  }
  opts.lenient = true;
  const PartitionResult res = sign_partition(Q, lam, 3, opts);
  CHECK(res.kappa == 2);
  IntVector expected(6);
  expected << 1, 1, 1, 2, 2, 2;
  CHECK((res.labels.array() == expected.array()).all());
}

TEST_CASE("zero entries stay on the nonnegative side") {
  const double c = 1.0 / std::sqrt(6.0);
  Matrix Q(6, 2);
  Vector lam(2);
  lam << 0.0, 0.3;
  Q.col(0) = Vector::Constant(6, c);
  Q.col(1) << 0.0, c, c, -c, -c, -c;
  SignPartitionOptions opts;
  opts.compute_cut = false;
  const PartitionResult res = sign_partition(Q, lam, 2, opts);
  IntVector expected(6);
  expected << 1, 1, 1, 2, 2, 2;
  CHECK((res.labels.array() == expected.array()).all());
}

TEST_CASE("each round divides the block with the most negative sign product") {
  const double c = 1.0 / std::sqrt(6.0);
  Matrix Q(6, 3);
  Vector lam(3);
  lam << 0.0, 0.3, 0.6;
  Q.col(0) = Vector::Constant(6, c);
  Q.col(1) << c, c, c, -c, -c, -c;
  Q.col(2) << 0.1, -0.1, 0.0, 5.0, -5.0, 0.0;
  SignPartitionOptions opts;
  opts.compute_cut = false;
  const PartitionResult res = sign_partition(Q, lam, 3, opts);
  CHECK(res.kappa == 3);
  IntVector expected(6);
  expected << 1, 1, 1, 2, 3, 2;
  CHECK((res.labels.array() == expected.array()).all());
}

TEST_CASE("eigenvectors are consumed in ascending eigenvalue order") {
  // Same data as the path-graph case but with shuffled columns.
  const WeightedGraph g = path4();
  const NormalizedLaplacian nl = build_laplacian(g);
  const EigenDecomposition eig = full_eigendecomposition(nl.L);
  Matrix Q(4, 4);
  Vector lam(4);
  const int perm[4] = {2, 0, 3, 1};
  for (int t = 0; t < 4; ++t) {
    Q.col(t) = eig.W.col(perm[t]);
    lam(t) = eig.omega(perm[t]);
  }
  const PartitionResult res = sign_partition(Q, lam, 2);
  IntVector expected(4);
  expected << 1, 1, 2, 2;
  CHECK(nmi(res.labels, expected) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sign_partition validates its inputs") {
  Matrix Q = Matrix::Identity(4, 2);
  Vector lam(3);
  lam << 0, 0.1, 0.2;
  CHECK_THROWS_AS(sign_partition(Q, lam, 2), Error);  // length mismatch
  Vector lam2(2);
  lam2 << 0, 0.1;
  CHECK_THROWS_AS(sign_partition(Q, lam2, 0), Error);
  CHECK_THROWS_AS(sign_partition(Q, lam2, 3), Error);
  Matrix bad = Q;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sign_partition(bad, lam2, 2), Error);
}

TEST_CASE("max_assignment agrees with brute force") {
  Rng rng(71);
  for (int k = 1; k <= 6; ++k) {
    for (int rep = 0; rep < 20; ++rep) {
      Matrix score(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) score(i, j) = rng.normal();
      const std::vector<int> pick = max_assignment(score);
      double total = 0.0;
      std::vector<char> seen(k, 0);
      for (int i = 0; i < k; ++i) {
        REQUIRE(pick[i] >= 0);
        REQUIRE(pick[i] < k);
        REQUIRE(!seen[pick[i]]);
        seen[pick[i]] = 1;
        total += score(i, pick[i]);
      }
      CHECK(total ==
            doctest::Approx(brute_force_best_assignment(score)).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(max_assignment(Matrix::Zero(2, 3)), Error);
  Matrix nanm = Matrix::Zero(2, 2);
  nanm(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(max_assignment(nanm), Error);
}

TEST_CASE("aggregate_uncertainty: identical samples give certain labels") {
  const int n = 6, T = 3;
  const double c = 1.0 / std::sqrt(6.0);
  Matrix U(n, T);
  U.col(0) = Vector::Constant(n, c);
  U.col(1) << c, c, c, -c, -c, -c;
  U.col(2) << 0.5, -0.5, 0.0, 0.5, -0.5, 0.0;

  auto make_sample = [&](const Matrix& atom, double lj) {
    PosteriorSample smp;
    smp.log_joint = lj;
    smp.sigma2_e = 0.01;
    GraphState gs;
    gs.z = 2;
    gs.lambda = Vector(T);
    gs.lambda << 0.0, 0.3, 0.6;
    gs.eta = IntVector(T);
    gs.eta << 1, 1, 0;
    gs.theta = 1.0;
    gs.diagL = Vector::Ones(n);
    smp.graphs.push_back(gs);
    smp.atom_ids = {2};
    smp.atom_U = {atom};
    return smp;
  };

  PosteriorSamples ps;
  for (int i = 0; i < 12; ++i) ps.samples.push_back(make_sample(U, -10.0));

  const LabelUncertainty unc = aggregate_uncertainty(ps, 0);
  CHECK(unc.reference.kappa == 2);
  REQUIRE(unc.prob.rows() == n);
  REQUIRE(unc.prob.cols() == 2);
  for (int i = 0; i < n; ++i) {
    CHECK(unc.prob.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(unc.prob.row(i).maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  }
  REQUIRE(unc.kappa_histogram.size() == 1);
  CHECK(unc.kappa_histogram[0].first == 2);
  CHECK(unc.kappa_histogram[0].second == doctest::Approx(1.0));

  SUBCASE("sign-flipped samples are aligned back onto the reference") {
    Matrix flipped = U;
    flipped.col(1) *= -1.0;
    for (int i = 0; i < 6; ++i)
      ps.samples.push_back(make_sample(flipped, -20.0));  // lower log joint
    const LabelUncertainty unc2 = aggregate_uncertainty(ps, 0);
    CHECK(unc2.reference.kappa == 2);
    for (int i = 0; i < n; ++i) {
      CHECK(unc2.prob.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(unc2.prob.row(i).maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Aligned labels coincide with the reference labeling exactly.
    for (int i = 0; i < n; ++i)
      CHECK(unc2.prob(i, unc.reference.labels(i) - 1) ==
            doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("force_kappa overrides the indicator count") {
    const LabelUncertainty unc3 = aggregate_uncertainty(ps, 0, 3);
    CHECK(unc3.reference.kappa == 3);
    REQUIRE(unc3.prob.cols() == 3);
    for (int i = 0; i < n; ++i)
      CHECK(unc3.prob.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(unc3.kappa_histogram.size() == 1);
    CHECK(unc3.kappa_histogram[0].first == 3);
  }

  SUBCASE("fewer than 10 samples is an error") {
    ps.samples.resize(9);
    try {
      aggregate_uncertainty(ps, 0);
      FAIL("expected InsufficientSamples");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InsufficientSamples);
    }
  }

  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(aggregate_uncertainty(ps, 5), Error);
    CHECK_THROWS_AS(aggregate_uncertainty(ps, 0, -1), Error);
  }
}

}  // TEST_SUITE
