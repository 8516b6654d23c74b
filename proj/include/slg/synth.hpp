#pragma once

#include <string>
#include <vector>

#include "slg/common.hpp"
#include "slg/gibbs.hpp"
#include "slg/graph.hpp"
#include "slg/rng.hpp"

namespace slg {

// Synthetic dataset generators plus the evaluation metrics and the spectral
// baseline the benchmarks compare against.

struct SynthSpec {
  std::string scenario = "planted-blocks";  // planted-blocks | latent-manifold |
                                            // hetero-population | prior-draw
  int n = 60;
  int S = 1;
  int T = 6;
  // Scenario-specific noise scale: xi for planted-blocks, sigma2_e for
  // prior-draw, the additive-normal sd for hetero-population.
  double noise = 0.1;
  std::vector<int> block_sizes = {10, 20, 30};  // planted-blocks
  int pattern_count = 5;                        // hetero-population
  int communities = 6;                          // hetero-population
  std::uint64_t seed = 1;
  // Weight floor on cross-block pairs keeping planted graphs connected at low
  // noise; set to 0 to recover the exact zero-cross-weight model.
  double cross_floor = 1e-6;
};

struct LabeledDataset {
  std::vector<WeightedGraph> graphs;
  std::vector<IntVector> true_labels;  // per graph, length n, values 1..kappa
  std::vector<int> true_pattern;       // hetero-population only, 1-based
  std::string manifest;                // key=value record regenerating the data
};

std::string manifest_text(const SynthSpec& spec);
SynthSpec parse_manifest(const std::string& text);

// Dispatch on spec.scenario.
LabeledDataset generate(const SynthSpec& spec, Rng& rng);

// Blocks of Bernoulli(0.5) edges, zero cross-block weight, symmetric
// No(0, noise^2) perturbation on every pair, negatives clamped to 0.
LabeledDataset gen_planted_blocks(const SynthSpec& spec, Rng& rng);

// Two concentric jittered arcs (radius 1 and 1.6, 200 degree span) scored by
// the similarity kernel exp(-10 ||y_i - y_j||).
LabeledDataset gen_latent_manifold(int n, Rng& rng);

// Population of graphs sharing a few one-hot membership patterns: per graph
// A = W diag(u) W' + symmetric noise, u ~ Uniform(0.5, 1.5).
LabeledDataset gen_hetero_population(const SynthSpec& spec, Rng& rng);

// Forward simulation of the model itself: one uniform eigenmatrix and spike
// pattern shared by the dataset, per-graph eigenvalues, Gaussian noise on the
// Laplacian, adjacency recovered from the first column.
LabeledDataset gen_prior_draw(const SynthSpec& spec, Rng& rng);

// Normalized mutual information, 2 I / (H_a + H_b); by convention 1 when the
// partitions are equal up to relabeling, 0 when exactly one side is constant.
double nmi(const IntVector& a, const IntVector& b);

// Entrywise RMS distance between graph s's observed Laplacian and the mean
// over posterior samples of the spike-only reconstruction (non-spike columns
// absorbed into theta).
double rmse_laplacian(const PosteriorSamples& samples, int s,
                      const std::vector<NormalizedLaplacian>& data);

// Community labels from k-means (20 restarts, k-means++ seeding) on the rows
// of the k smallest-eigenvalue eigenvectors of L.
IntVector baseline_spectral_sbm(const Matrix& L, int k, Rng& rng);

}  // namespace slg
