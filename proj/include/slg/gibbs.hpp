#pragma once
// The Gibbs sweep: Gaussian-integral augmentation, dictionary/assignment/
// eigenvalue/indicator/flat-value/diagonal/noise updates, hyperparameter
// refreshes, chain orchestration with checkpointing, and the closed-form
// marginal likelihood of an eigenmatrix used as a fit diagnostic.
//
// Index conventions: graph indices s are 0-based container positions;
// model-notation indices (eigenvalue k, atom l) are 1-based as in the
// formulas, so k runs over 2..T and l over 1..g.

#include <array>
#include <functional>
#include <vector>

#include "slg/common.hpp"
#include "slg/distributions.hpp"
#include "slg/graph.hpp"
#include "slg/model.hpp"
#include "slg/rng.hpp"
#include "slg/stiefel.hpp"

namespace slg {

struct SweepReport {
  double log_joint = 0.0;
  LangevinStats stiefel;
  int definiteness_retries = 0;
  // Seconds spent in steps 1..9 plus the hyperparameter block (index 9).
  std::array<double, 10> step_seconds{};
};

struct GibbsConfig {
  int iters = 30000;
  int burnin = 10000;
  int thin = 20;
  std::uint64_t seed = 0;
  int chain = 0;             // distinct chains derive disjoint streams
  int checkpoint_every = 0;  // sweeps between checkpoint snapshots; 0 = off
};

// One thinned posterior draw.  Unoccupied atoms are not stored; atom_ids
// lists the occupied dictionary entries (1-based, ascending) and atom_U the
// matching eigenmatrices.
struct PosteriorSample {
  int sweep = 0;
  double log_joint = 0.0;
  double sigma2_e = 0.0;
  double w = 0.0;
  double sigma2_theta = 0.0;
  double sigma2_lambda0 = 0.0;
  double sigma2_lambda1 = 0.0;
  Vector pi;
  std::vector<GraphState> graphs;
  std::vector<int> atom_ids;
  std::vector<Matrix> atom_U;
};

// The eigenmatrix assigned to graph s within one sample.
const Matrix& sample_atom_for(const PosteriorSample& smp, int s);

struct TraceRow {
  int sweep = 0;
  double log_joint = 0.0;
  double sigma2_e = 0.0;
  int occupied_atoms = 0;
};

struct PosteriorSamples {
  std::vector<PosteriorSample> samples;
  std::vector<TraceRow> trace;
  int iters = 0;
  int burnin = 0;
  int thin = 1;
  std::uint64_t seed = 0;
  int chain = 0;
};

struct Checkpoint {
  int next_sweep = 1;  // 1-based index of the first sweep still to run
  ChainState state;
  PosteriorSamples collected;
};

using CheckpointSink = std::function<void(const Checkpoint&)>;

// ---- individual steps (pure draws; the sweep owns all mutation) ----------

// Quadratic forms m_k = u_k' Lw u_k for all columns of U.
Vector quad_forms(const Matrix& Lw, const Matrix& U);

// Step 1: augmented matrix R_s (T x n).  The quadratic matrix-exponential
// coupling between U and the data is linearized exactly even when the
// printed factors theta I - L / theta I - Lambda are indefinite: the column
// factor is shifted to c I - L (positive-definite by a Gershgorin bound) and
// rows with lambda_k > theta use the complementary factor d I + L, both of
// which change the joint only by U-independent constants.
Matrix augment_R(int s, const ChainState& state,
                 const std::vector<NormalizedLaplacian>& data, Rng& rng);

// Log density of R under the exact law augment_R draws from.
double augment_logpdf(const Matrix& R, int s, const ChainState& state,
                      const std::vector<NormalizedLaplacian>& data);

// Step 2: one Langevin transition for atom l given the augmented matrices of
// its members (concentration sum_{s: z_s = l} R_s' / sigma2_e + omega M).
// Unoccupied atoms are refreshed from the uniform prior.
StiefelPoint update_dictionary_atom(int l, const ChainState& state,
                                    const std::vector<Matrix>& R_all,
                                    const HyperParams& hp, Rng& rng,
                                    LangevinStats* stats = nullptr);

// Step 3: assignment weights with lambda and theta integrated out in closed
// form (they are redrawn in steps 5/7 before any later step reads them).
Vector assignment_logweights(int s, const ChainState& state,
                             const std::vector<NormalizedLaplacian>& data,
                             const HyperParams& hp);
int update_assignment(int s, const ChainState& state,
                      const std::vector<NormalizedLaplacian>& data,
                      const HyperParams& hp, Rng& rng);

// Step 4.
Vector update_weights(const ChainState& state, const HyperParams& hp, Rng& rng);

// Steps 5-7: exact full conditionals (k is 1-based, k >= 2).
TruncatedNormalParams lambda_conditional(int s, int k, const ChainState& state,
                                         const std::vector<NormalizedLaplacian>& data,
                                         const HyperParams& hp);
double update_lambda(int s, int k, const ChainState& state,
                     const std::vector<NormalizedLaplacian>& data,
                     const HyperParams& hp, Rng& rng);

double eta_spike_probability(int s, int k, const ChainState& state,
                             const HyperParams& hp);
int update_eta(int s, int k, const ChainState& state, const HyperParams& hp,
               Rng& rng);

TruncatedNormalParams theta_conditional(int s, const ChainState& state,
                                        const std::vector<NormalizedLaplacian>& data,
                                        const HyperParams& hp);
double update_theta(int s, const ChainState& state,
                    const std::vector<NormalizedLaplacian>& data,
                    const HyperParams& hp, Rng& rng);

// Step 8: redraw the working diagonal, No([Q(Lambda - theta I)Q']_ii + theta,
// 2 sigma2_e) per entry.
Vector update_diag(int s, const ChainState& state, Rng& rng);

// Step 9.
double update_sigma2_e(const ChainState& state,
                       const std::vector<NormalizedLaplacian>& data,
                       const HyperParams& hp, Rng& rng);

// w and the three truncated-normal variances (conjugate by default; exact
// Metropolis-within-Gibbs under hp.exact_hyper_mh).
void update_hyperparams(ChainState& state, const HyperParams& hp, Rng& rng);

int occupied_count(const ChainState& state);

SweepReport sweep(ChainState& state,
                  const std::vector<NormalizedLaplacian>& data,
                  const HyperParams& hp, Rng& rng);

// Fresh chain: init from stream (seed, 0, chain), sweep t from stream
// (seed, t, chain) — so a resumed run replays the identical randomness.
PosteriorSamples run_chain(const std::vector<NormalizedLaplacian>& data,
                           const HyperParams& hp, const GibbsConfig& cfg,
                           const CheckpointSink& sink = {});

PosteriorSamples continue_chain(Checkpoint ck,
                                const std::vector<NormalizedLaplacian>& data,
                                const HyperParams& hp, const GibbsConfig& cfg,
                                const CheckpointSink& sink = {});

// log of the likelihood integrated over the free eigenvalues: lambda_1 fixed
// at zero, lambda_2..lambda_T and theta integrated over (0,2) in closed form
// (Gaussian integrals times interval masses).  Requires T <= n-1.
double marginal_loglik_Q(const Matrix& Q, const Matrix& L, double sigma2_e);

}  // namespace slg
