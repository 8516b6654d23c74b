#pragma once

#include <string>
#include <vector>

#include "slg/synth.hpp"

namespace slg {

// Benchmark harness: generates datasets at controlled difficulty, fits the
// model, and reduces the comparisons to rows of a results table.

struct BenchRow {
  std::string method;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;  // NaN when replicates < 2 or the sd is not meaningful
  int replicates = 0;
};

// Planted-blocks draw whose measured spectral gap (4th minus 3rd smallest
// eigenvalue of the normalized Laplacian) lands in [lo, hi).  The noise scale
// is first steered toward `target` by bisection, then draws are rejected
// until one lands in the window.  With S > 1 the remaining graphs are
// independent replicates at the same noise scale; the window applies to the
// first graph.
LabeledDataset planted_with_gap(double lo, double hi, double target, int n,
                                const std::vector<int>& blocks,
                                std::uint64_t seed, double* xi_used = nullptr,
                                double* gap_out = nullptr, int S = 1);

// Laplacians + default-prior fit with T spikes; burnin = iters/3 and thinning
// chosen to keep about 200 samples per chain.  Samples from the independent
// chains are pooled, so a chain stuck in a minority posterior mode is
// outvoted in the consensus labels and in posterior means.
PosteriorSamples fit_graphs(const std::vector<WeightedGraph>& graphs, int T,
                            int iters, std::uint64_t seed, int chains = 5);

// Point-estimate labels for graph s: the sample sign partition (forced to
// kappa blocks) whose co-membership matrix is closest in squared distance to
// the posterior-mean co-membership.  Alignment-free, so label switching
// across samples cannot scramble the estimate.
IntVector posterior_labels(const PosteriorSamples& samples, int s, int kappa);

Vector posterior_mean_lambda(const PosteriorSamples& samples, int s);
Vector posterior_mean_eta(const PosteriorSamples& samples, int s);
double posterior_mean_theta(const PosteriorSamples& samples, int s);

// Community recovery vs the spectral baseline across five measured-gap bins.
std::vector<BenchRow> bench_table1(int reps_per_bin, int iters,
                                   std::uint64_t seed);

// Same comparison at n=100 and a single hard gap setting.
std::vector<BenchRow> bench_table2(int replicates, int iters,
                                   std::uint64_t seed);

// Heterogeneous population: per-graph labels and Laplacian reconstruction vs
// the pooled averaged-graph baseline.
std::vector<BenchRow> bench_table3(int iters, std::uint64_t seed);

// Overspecified T: spike indicators beyond the true community count and
// stability of the leading eigenvalues between T=10 and T=30.
std::vector<BenchRow> bench_overspec(int iters, std::uint64_t seed);

// Spectrum lifting on a medium-noise graph: posterior theta vs the raw fourth
// eigenvalue, posterior spikes vs raw.
std::vector<BenchRow> bench_lifting(int iters, std::uint64_t seed);

}  // namespace slg
