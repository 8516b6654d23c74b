#include "slg/graph.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace slg {

namespace {
constexpr double kSymTol = 1e-12;
}

bool is_connected(const Matrix& A) {
  const int n = static_cast<int>(A.rows());
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int i = q.front();
    q.pop();
    for (int j = 0; j < n; ++j) {
      if (!seen[j] && A(i, j) > 0.0) {
        seen[j] = 1;
        ++count;
        q.push(j);
      }
    }
  }
  return count == n;
}

void validate_graph(const Matrix& A) {
  const int n = static_cast<int>(A.rows());
  if (n < 2 || A.cols() != n)
    fail(Errc::InvalidParam, "adjacency must be square with n >= 2");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double scale = std::max({1.0, std::abs(A(i, j)), std::abs(A(j, i))});
      if (std::abs(A(i, j) - A(j, i)) > kSymTol * scale)
        fail(Errc::AsymmetricInput, "A(" + std::to_string(i) + "," +
                                        std::to_string(j) + ") != A(j,i)");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (A(i, i) != 0.0)
      fail(Errc::InvalidParam,
           "nonzero diagonal at vertex " + std::to_string(i));
    for (int j = 0; j < n; ++j)
      if (A(i, j) < 0.0 || !std::isfinite(A(i, j)))
        fail(Errc::InvalidParam, "negative or non-finite edge weight");
  }
  for (int i = 0; i < n; ++i) {
    if (A.row(i).sum() <= 0.0)
      fail(Errc::ZeroDegreeVertex, "vertex " + std::to_string(i));
  }
  if (!is_connected(A))
    fail(Errc::DisconnectedGraph, "graph is not connected");
}

WeightedGraph make_graph(Matrix A) {
  validate_graph(A);
  WeightedGraph g;
  g.n = static_cast<int>(A.rows());
  g.A = std::move(A);
  return g;
}

NormalizedLaplacian build_laplacian(const WeightedGraph& g) {
  const int n = g.n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double scale = std::max({1.0, std::abs(g.A(i, j))});
      if (std::abs(g.A(i, j) - g.A(j, i)) > kSymTol * scale)
        fail(Errc::AsymmetricInput, "adjacency not symmetric");
    }
  Vector d = g.A.rowwise().sum();
  for (int i = 0; i < n; ++i)
    if (d(i) <= 0.0) fail(Errc::ZeroDegreeVertex, "vertex " + std::to_string(i));

  NormalizedLaplacian out;
  out.degree_sqrt = d.array().sqrt();
  const Vector dinv = out.degree_sqrt.array().inverse();
  // L = I - D^{-1/2} A D^{-1/2}
  out.L = -(dinv.asDiagonal() * g.A * dinv.asDiagonal());
  out.L.diagonal().array() += 1.0;
  // Symmetrize away the last-bit asymmetry from the two diagonal scalings.
  out.L = 0.5 * (out.L + out.L.transpose()).eval();
  return out;
}

void validate_decomposition(const SpikedDecomposition& d) {
  const int n = static_cast<int>(d.Q.rows());
  const int T = static_cast<int>(d.Q.cols());
  if (T < 1 || n < T) fail(Errc::DimensionMismatch, "Q must be n x T, T <= n");
  if (d.lambda.size() != T || d.eta.size() != T)
    fail(Errc::DimensionMismatch, "lambda/eta length must equal T");
  if (d.lambda(0) != 0.0) fail(Errc::InvalidParam, "lambda[1] must be 0");
  if (d.eta(0) != 1) fail(Errc::InvalidParam, "eta[1] must be 1");
  for (int k = 0; k < T; ++k) {
    if (d.lambda(k) < 0.0 || d.lambda(k) >= 2.0)
      fail(Errc::OutOfSupport, "lambda out of [0,2)");
    if (d.eta(k) != 0 && d.eta(k) != 1) fail(Errc::InvalidParam, "eta not binary");
  }
  if (!(d.theta > 0.0 && d.theta < 2.0)) fail(Errc::OutOfSupport, "theta outside (0,2)");
  if ((d.Q.transpose() * d.Q - Matrix::Identity(T, T)).norm() > 1e-8)
    fail(Errc::InvalidParam, "Q columns not orthonormal");
  for (int i = 0; i < n; ++i)
    if (d.Q(i, 0) <= 0.0)
      fail(Errc::NonPositiveFirstEigenvector, "Q(:,1) entry <= 0");
}

Matrix spiked_reconstruct(const SpikedDecomposition& d) {
  validate_decomposition(d);
  const int n = static_cast<int>(d.Q.rows());
  Vector shifted = d.lambda.array() - d.theta;
  Matrix mu = d.Q * shifted.asDiagonal() * d.Q.transpose();
  mu.diagonal().array() += d.theta;
  return 0.5 * (mu + mu.transpose()).eval();
}

WeightedGraph recover_adjacency(const Matrix& L, const Vector& q1) {
  const int n = static_cast<int>(L.rows());
  if (L.cols() != n || q1.size() != n)
    fail(Errc::ShapeMismatch, "L must be n x n and q1 length n");
  for (int i = 0; i < n; ++i)
    if (!(q1(i) > 0.0))
      fail(Errc::NonPositiveFirstEigenvector,
           "q1(" + std::to_string(i) + ") <= 0");
  // A = D^{1/2} (I - L) D^{1/2}, D = diag(q1^2)
  Matrix IminusL = -L;
  IminusL.diagonal().array() += 1.0;
  Matrix A = q1.asDiagonal() * IminusL * q1.asDiagonal();
  A = 0.5 * (A + A.transpose()).eval();
  A.diagonal().setZero();
  WeightedGraph g;
  g.n = n;
  g.A = std::move(A);
  return g;
}

EigenDecomposition full_eigendecomposition(const Matrix& L) {
  const int n = static_cast<int>(L.rows());
  if (L.cols() != n) fail(Errc::ShapeMismatch, "matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (L + L.transpose()));
  if (es.info() != Eigen::Success)
    fail(Errc::ConvergenceFailure, "symmetric eigensolver did not converge");
  EigenDecomposition out;
  out.W = es.eigenvectors();  // ascending eigenvalue order
  out.omega = es.eigenvalues();

  // Sign conventions for determinism.  Column 1: entrywise nonnegative when
  // possible (it is, up to a global sign, for connected-graph Laplacians);
  // genuinely mixed-sign first columns of general symmetric inputs fall back
  // to the largest-|entry| rule used for the remaining columns.
  constexpr double tol = 1e-12;
  const double c0min = out.W.col(0).minCoeff();
  const double c0max = out.W.col(0).maxCoeff();
  if (c0min < -tol && c0max <= tol) {
    out.W.col(0) = -out.W.col(0);
  } else if (c0min < -tol && c0max > tol) {
    int idx;
    out.W.col(0).cwiseAbs().maxCoeff(&idx);
    if (out.W(idx, 0) < 0.0) out.W.col(0) = -out.W.col(0);
  }
  for (int k = 1; k < n; ++k) {
    int idx;
    out.W.col(k).cwiseAbs().maxCoeff(&idx);
    if (out.W(idx, k) < 0.0) out.W.col(k) = -out.W.col(k);
  }
  return out;
}

double normalized_cut_loss(const WeightedGraph& g, const std::vector<int>& labels) {
  const int n = g.n;
  if (static_cast<int>(labels.size()) != n)
    fail(Errc::ShapeMismatch, "labels length must equal vertex count");
  int kappa = 0;
  for (int v : labels) {
    if (v < 1) fail(Errc::InvalidParam, "labels must be >= 1");
    kappa = std::max(kappa, v);
  }
  if (kappa < 2) fail(Errc::InvalidParam, "need kappa >= 2 blocks");
  std::vector<int> used(kappa, 0);
  for (int v : labels) used[v - 1] = 1;
  for (int l = 0; l < kappa; ++l)
    if (!used[l]) fail(Errc::EmptyBlock, "label " + std::to_string(l + 1) + " unused");

  double cross = 0.0;
  std::vector<double> block_sum(kappa, 0.0);  // sum_{i,j in V_l} A_ij
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (labels[i] == labels[j])
        block_sum[labels[i] - 1] += g.A(i, j);
      else if (labels[i] < labels[j])
        cross += g.A(i, j);
    }
  const double total = g.A.sum();
  double denom = std::numeric_limits<double>::infinity();
  for (int l = 0; l < kappa; ++l) {
    // sum over the complement of V_l counts every pair with neither endpoint
    // in V_l: total - (pairs touching V_l) = total - 2*boundary - within.
    double touching = 0.0;
    for (int i = 0; i < n; ++i)
      if (labels[i] == l + 1) touching += 2.0 * g.A.row(i).sum();
    touching -= block_sum[l];  // within-block pairs were counted twice
    denom = std::min(denom, total - touching);
  }
  if (!(denom > 0.0)) fail(Errc::DegenerateDenominator, "complement weight sum is 0");
  return cross / denom;
}

double cheeger_bound(int kappa, const Vector& lambda_sorted) {
  if (kappa < 2) fail(Errc::InvalidParam, "kappa >= 2 required");
  if (lambda_sorted.size() < kappa)
    fail(Errc::InvalidParam, "need at least kappa eigenvalues");
  const double lk = lambda_sorted(kappa - 1);
  if (lk < 0.0) fail(Errc::InvalidParam, "eigenvalues must be nonnegative");
  if (kappa == 2) return std::sqrt(2.0 * lk);
  return 8.0 * std::log(static_cast<double>(kappa)) * std::sqrt(lk);
}

double subspace_distance(const Matrix& Qa, const Matrix& Qb) {
  if (Qa.rows() != Qb.rows() || Qa.cols() != Qb.cols())
    fail(Errc::ShapeMismatch, "subspace_distance needs equal shapes");
  Eigen::JacobiSVD<Matrix> svd(Qa.transpose() * Qb,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix O = svd.matrixU() * svd.matrixV().transpose();
  return (Qa * O - Qb).norm();
}

}  // namespace slg
