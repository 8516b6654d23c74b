#include "slg/stiefel.hpp"

#include <Eigen/QR>
#include <cmath>
#include <numeric>
#include <vector>

namespace slg {

namespace {

constexpr int kPositivityCap = 200;

// Uniform direction on the unit sphere of R^m.
Vector uniform_sphere(int m, Rng& rng) {
  Vector z(m);
  while (true) {
    for (int i = 0; i < m; ++i) z(i) = rng.normal();
    const double nrm = z.norm();
    if (nrm > 1e-100) return z / nrm;
  }
}

// Orthonormal basis N of the orthogonal complement of range(cols):
// n x (n - cols.cols()), N'N = I, N'cols = 0.  Any fixed basis works for the
// column conditional (u = Nz is vMF-equivariant under basis change).
Matrix null_basis(const Matrix& cols) {
  const int n = static_cast<int>(cols.rows());
  const int k = static_cast<int>(cols.cols());
  Eigen::HouseholderQR<Matrix> qr(cols);
  Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  return full.rightCols(n - k);
}

}  // namespace

void validate_stiefel_point(const StiefelPoint& pt) {
  const int T = static_cast<int>(pt.U.cols());
  const Matrix gram = pt.U.transpose() * pt.U;
  if ((gram - Matrix::Identity(T, T)).norm() > 1e-8)
    fail(Errc::InvalidParam, "columns not orthonormal");
  if ((pt.U.col(0).array() <= 0.0).any())
    fail(Errc::InvalidParam, "first column must be strictly positive");
}

Vector vmf_sample(const Vector& direction, double kappa, Rng& rng) {
  const int m = static_cast<int>(direction.size());
  if (m < 1) fail(Errc::InvalidParam, "empty direction");
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    fail(Errc::InvalidParam, "kappa must be finite and >= 0");
  const double dn = direction.norm();
  if (std::abs(dn - 1.0) > 1e-6) fail(Errc::InvalidParam, "direction not unit");

  if (m == 1) {
    // Sphere S^0 = {-1, +1}; density ~ exp(kappa * d * x).
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * kappa * direction(0)));
    Vector out(1);
    out(0) = rng.bernoulli(p_plus) ? 1.0 : -1.0;
    return out;
  }
  if (kappa < 1e-12) return uniform_sphere(m, rng);

  // Wood's rejection sampler for the cosine component t = <d, x>.
  // b computed in conjugate form to dodge cancellation at large kappa.
  const double mm1 = static_cast<double>(m - 1);
  const double b = mm1 / (std::sqrt(4.0 * kappa * kappa + mm1 * mm1) + 2.0 * kappa);
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + mm1 * std::log(1.0 - x0 * x0);
  double t = 0.0;
  for (long attempt = 0;; ++attempt) {
    if (attempt > 100000000L)
      fail(Errc::ConvergenceFailure, "vMF rejection stalled");
    const double z = rng.beta(0.5 * mm1, 0.5 * mm1);
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    if (kappa * w + mm1 * std::log(1.0 - x0 * w) - c >= std::log(rng.u01p())) {
      t = w;
      break;
    }
  }
  if (t > 1.0) t = 1.0;
  if (t < -1.0) t = -1.0;

  // Tangent direction: uniform on the sphere orthogonal to `direction`.
  Vector v;
  while (true) {
    v = uniform_sphere(m, rng);
    v -= direction * direction.dot(v);
    const double nrm = v.norm();
    if (nrm > 1e-7) {
      v /= nrm;
      break;
    }
  }
  return t * direction + std::sqrt(std::max(0.0, 1.0 - t * t)) * v;
}

StiefelPoint sample_uniform_stiefel_star(int n, int T, Rng& rng) {
  if (T < 1 || T > n) fail(Errc::InvalidParam, "need 1 <= T <= n");
  Matrix U(n, T);
  // First column: fold a uniform sphere draw into the positive orthant.
  // Sign flips of coordinates are isometries of the sphere, so |z|/||z|| is
  // exactly the uniform distribution conditioned on positivity.
  while (true) {
    Vector u1 = uniform_sphere(n, rng).cwiseAbs();
    if ((u1.array() > 0.0).all()) {
      U.col(0) = u1;
      break;
    }
  }
  if (T == 1) return {U};
  // Remaining columns: Haar on the Stiefel manifold of u1's complement.
  // A Gaussian matrix projected into the complement has rotation-invariant
  // law there, so the Q of its QR (R diagonal made positive) is Haar.
  Matrix G(n, T - 1);
  for (int j = 0; j < T - 1; ++j)
    for (int i = 0; i < n; ++i) G(i, j) = rng.normal();
  G -= U.col(0) * (U.col(0).transpose() * G);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, T - 1);
  const Matrix R = qr.matrixQR().topRows(T - 1);
  for (int j = 0; j < T - 1; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  U.rightCols(T - 1) = Q;
  return {U};
}

StiefelPoint sample_matrix_langevin(const LangevinParams& p,
                                    const StiefelPoint& current, Rng& rng,
                                    LangevinStats* stats) {
  const int n = static_cast<int>(current.U.rows());
  const int T = static_cast<int>(current.U.cols());
  if (p.C.rows() != n || p.C.cols() != T)
    fail(Errc::ShapeMismatch, "concentration shape differs from the point");
  if (!p.C.allFinite()) fail(Errc::InvalidParam, "non-finite concentration");

  Matrix U = current.U;
  std::vector<int> order(T);
  std::iota(order.begin(), order.end(), 0);
  for (int i = T - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(i + 1)]);

  Matrix others(n, T - 1);
  for (int k : order) {
    int c = 0;
    for (int j = 0; j < T; ++j)
      if (j != k) others.col(c++) = U.col(j);
    const Matrix N = (T == 1) ? Matrix::Identity(n, n) : null_basis(others);
    const int m = static_cast<int>(N.cols());
    const Vector ct = N.transpose() * p.C.col(k);
    const double kap = ct.norm();
    Vector dir = (kap > 1e-12) ? Vector(ct / kap) : uniform_sphere(m, rng);

    if (k != 0) {
      U.col(k) = N * vmf_sample(dir, kap, rng);
      continue;
    }
    // Column 1 must land in the positive orthant; reject until it does.
    // Cap exhaustion keeps the previous column (a Metropolis-style reject
    // that leaves the constrained target invariant).
    bool accepted = false;
    Vector cand;
    for (int attempt = 0; attempt < kPositivityCap; ++attempt) {
      if (stats) ++stats->positivity_attempts;
      cand = N * vmf_sample(dir, kap, rng);
      if ((cand.array() > 0.0).all()) {
        accepted = true;
        break;
      }
    }
    if (accepted)
      U.col(0) = cand;
    else if (stats)
      ++stats->positivity_exhausted;
  }
  return {U};
}

}  // namespace slg
