#pragma once

#include <utility>
#include <vector>

#include "slg/common.hpp"
#include "slg/gibbs.hpp"
#include "slg/graph.hpp"

namespace slg {

// Sign-based recursive partitioning of a spiked eigenmatrix, plus posterior
// aggregation of the labels across MCMC samples.

struct PartitionResult {
  IntVector labels;              // length n, values 1..kappa
  int kappa = 1;                 // blocks actually materialized
  double cut_loss = 0.0;         // sparsest-cut loss on the recovered adjacency
  double cheeger_ceiling = 0.0;  // spectral ceiling at the materialized kappa
};

struct SignPartitionOptions {
  double theta = 1.0;      // flat-spectrum fill used when rebuilding the mean
  bool lenient = false;    // skip one-sided splits instead of throwing
  bool compute_cut = true; // set false to skip the adjacency round-trip
};

// Number of spike indicators switched on (the model's own estimate of kappa).
int effective_kappa(const IntVector& eta);

// Split by the signs of successive eigenvectors: round r picks the block
// whose positive/negative sums give the most negative product and divides it,
// zeros staying with the nonnegative side.  Strict mode throws EmptySplit
// when the chosen block is single-signed; lenient mode skips that round.
PartitionResult sign_partition(const Matrix& Q, const Vector& lambda,
                               int kappa,
                               const SignPartitionOptions& opts = {});

struct LabelUncertainty {
  Matrix prob;  // n x reference.kappa, rows sum to 1
  // (kappa, frequency) ascending in kappa; frequencies sum to 1.
  std::vector<std::pair<int, double>> kappa_histogram;
  PartitionResult reference;
};

// Partition every posterior sample of graph s, align each to the
// highest-log-joint sample by maximum label overlap, and tabulate membership
// frequencies.  Needs at least 10 samples.  force_kappa > 0 overrides the
// per-sample spike count.
LabelUncertainty aggregate_uncertainty(const PosteriorSamples& samples, int s,
                                       int force_kappa = 0);

// Assignment maximizing the total score of a square matrix (Hungarian
// method); returns the column picked for each row.
std::vector<int> max_assignment(const Matrix& score);

}  // namespace slg
