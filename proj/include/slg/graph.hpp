#pragma once
// Deterministic graph/Laplacian algebra: construction, recovery identities,
// spectral utilities, and the cut/subspace metrics used by the benchmarks.

#include <vector>

#include "slg/common.hpp"

namespace slg {

// Symmetric nonnegative adjacency with zero diagonal; the raw observation.
struct WeightedGraph {
  int n = 0;
  Matrix A;
};

// Throws (AsymmetricInput, ZeroDegreeVertex, InvalidParam, DisconnectedGraph)
// when `A` is not a usable observation.  Connectivity is required because the
// model's positive-first-eigenvector constraint presumes it.
void validate_graph(const Matrix& A);
WeightedGraph make_graph(Matrix A);

bool is_connected(const Matrix& A);

// L = D^{-1/2} (D - A) D^{-1/2}, plus d^{1/2} (the kernel direction of L).
struct NormalizedLaplacian {
  Matrix L;
  Vector degree_sqrt;
};

NormalizedLaplacian build_laplacian(const WeightedGraph& g);

// Per-graph spiked parameterization (Q, lambda, theta, eta).
// Conventions: lambda[0] == 0 and eta[0] == 1 always; Q's first column is
// strictly positive; eta is the spike indicator (1 = near-zero spike).
struct SpikedDecomposition {
  Matrix Q;        // n x T, orthonormal columns
  Vector lambda;   // T, in [0,2), lambda[0] == 0
  double theta;    // in (0,2)
  IntVector eta;   // T, binary, eta[0] == 1
};

void validate_decomposition(const SpikedDecomposition& d);

// mu_L = Q (Lambda - theta I_T) Q' + theta I_n.
Matrix spiked_reconstruct(const SpikedDecomposition& d);

// A = D^{1/2} (I - L) D^{1/2} with D = diag(q1(i)^2); inverts build_laplacian
// when q1 is the unnormalized degree-sqrt vector.  Diagonal forced to zero.
WeightedGraph recover_adjacency(const Matrix& L, const Vector& q1);

struct EigenDecomposition {
  Matrix W;      // n x n, orthonormal columns
  Vector omega;  // ascending eigenvalues
};

// Dense symmetric eigendecomposition with a fixed sign convention so results
// are deterministic: column 1 is flipped to be entrywise nonnegative (valid
// for connected-graph Laplacians); every later column is flipped so its
// largest-magnitude entry is positive.
EigenDecomposition full_eigendecomposition(const Matrix& L);

// Sparsest-kappa-cut loss of a labeling (labels take every value in 1..kappa):
//   sum of cross-block weights / min_l sum_{i,j in V \ V_l} A_ij.
double normalized_cut_loss(const WeightedGraph& g, const std::vector<int>& labels);

// Spectral ceiling for the optimal cut: sqrt(2 lambda_(2)) for kappa = 2,
// (8 ln kappa) sqrt(lambda_(kappa)) for kappa >= 3.  Diagnostic only — not a
// guarantee for any heuristic partition.
double cheeger_bound(int kappa, const Vector& lambda_sorted);

// min over orthonormal O of ||Qa O - Qb||_F, via orthogonal Procrustes.
double subspace_distance(const Matrix& Qa, const Matrix& Qb);

}  // namespace slg
