#pragma once
// Full parameter state of the hierarchical model: hyperparameters with the
// published defaults, per-graph spike parameters, the mixture dictionary,
// spectral initialization, and the exact log joint density (up to an additive
// constant that no sampled parameter touches).

#include <vector>

#include "slg/common.hpp"
#include "slg/graph.hpp"
#include "slg/rng.hpp"
#include "slg/stiefel.hpp"

namespace slg {

struct HyperParams {
  int T = 6;             // spike dimensions per graph
  int g = 30;            // mixture truncation level
  double alpha0 = 0.1;   // DP concentration
  double mu_theta = 1.0; // prior mean of theta and of the slab component

  // Inverse-gamma hyperprior on sigma2_theta / sigma2_lambda0 / sigma2_lambda1.
  double ig_shape = 2.0;
  double ig_rate = 0.1;
  // Beta prior on the spike weight w.
  double w_beta_a = 1.0;
  double w_beta_b = 1.0;
  // Inverse-gamma prior on sigma2_e.
  double sigma2_e_shape = 0.01;
  double sigma2_e_rate = 0.01;

  // Langevin base measure etr(omega * M'U); omega = 0 is the uniform measure
  // and makes M irrelevant.
  double omega = 0.0;
  Matrix M;

  // ---- documented algorithmic switches --------------------------------
  // sigma2_e update shape: false = n^2 S / 2 as printed in the sampling
  // recipe; true = S n (n+1) / 4, the exponent the likelihood actually
  // carries.  The two disagree by the diagonal-augmentation accounting;
  // consistency tests use the likelihood-exact mode.
  bool sigma2_e_likelihood_shape = false;
  // Assignment weights: include the interval-mass (log Phi-difference)
  // factors from integrating the truncated conditionals over (0,2).  The
  // printed weights omit them; omitting is exact only when the interval
  // holds all the mass.
  bool assignment_truncation_correction = true;
  // Metropolis correction making the variance-hyperparameter updates exact
  // under truncation (default: plain conjugate update that ignores the
  // truncated-normal normalizing constants).
  bool exact_hyper_mh = false;
};

void validate_hyperparams(const HyperParams& hp);

// Per-graph sampled parameters.  lambda[0] == 0 and eta[0] == 1 are fixed by
// the model and never updated.
struct GraphState {
  int z = 1;       // dictionary assignment, 1-based
  Vector lambda;   // length T
  IntVector eta;   // length T, binary
  double theta = 1.0;
  Vector diagL;    // length n: the augmented working diagonal of L^(s)
};

struct DictionaryState {
  std::vector<StiefelPoint> atoms;  // g atoms
  Vector pi;                        // length g, simplex
};

struct ChainState {
  DictionaryState dict;
  std::vector<GraphState> graphs;
  double sigma2_e = 1e-2;
  double w = 0.5;
  double sigma2_theta = 0.1;
  double sigma2_lambda0 = 0.1;
  double sigma2_lambda1 = 0.1;
};

// Observed L^(s) with the sampled diagonal swapped in.
Matrix working_laplacian(const NormalizedLaplacian& d, const GraphState& gs);

// Q (Lambda - theta I_T) Q' + theta I_n for the graph's assigned atom.
Matrix model_mean(const StiefelPoint& atom, const GraphState& gs);

// Spectral initialization: per-graph eigenvalues seed lambda/theta/eta,
// assignments come from a prior stick draw, and each occupied atom starts at
// the eigenmatrix of its members' mean Laplacian.
ChainState init_chain(const std::vector<NormalizedLaplacian>& data,
                      const HyperParams& hp, Rng& rng);

// Exact log joint (likelihood + every prior), dropping only true constants.
double log_joint(const ChainState& state,
                 const std::vector<NormalizedLaplacian>& data,
                 const HyperParams& hp);

void validate_chain_state(const ChainState& state, const HyperParams& hp,
                          int n, int S);

}  // namespace slg
