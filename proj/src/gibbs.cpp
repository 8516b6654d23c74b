#include "slg/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

namespace slg {

namespace {

// Margin added on top of the Gershgorin bounds so the shifted factors stay
// strictly positive-definite.
constexpr double kShiftMargin = 0.05;

double now_sec() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct GershBounds {
  double hi;  // upper bound on lambda_max
  double lo;  // lower bound on lambda_min
};

GershBounds gershgorin(const Matrix& L) {
  const int n = static_cast<int>(L.rows());
  GershBounds gb{-std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()};
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) r += std::abs(L(i, j));
    gb.hi = std::max(gb.hi, L(i, i) + r);
    gb.lo = std::min(gb.lo, L(i, i) - r);
  }
  return gb;
}

// Shifted augmentation factors for one graph.  F = cI - Lw is always
// positive-definite (c beats the spectral radius); K = dI + Lw covers rows
// whose coefficient theta - lambda_k is negative.
struct AugmentFactors {
  double c = 0.0;
  double d = 0.0;
  Matrix F, Lf;
  Matrix K, Lk;
  bool has_K = false;
};

AugmentFactors augment_factors(const Matrix& Lw, const GraphState& gs) {
  const GershBounds gb = gershgorin(Lw);
  AugmentFactors af;
  af.c = std::max(gs.theta, gb.hi + kShiftMargin);
  af.F = -Lw;
  af.F.diagonal().array() += af.c;
  af.Lf = chol_with_jitter(af.F, "augmentation column factor");
  for (int k = 0; k < gs.lambda.size(); ++k)
    if (gs.theta - gs.lambda(k) < 0.0) af.has_K = true;
  if (af.has_K) {
    af.d = std::max(0.0, -gb.lo) + kShiftMargin;
    af.K = Lw;
    af.K.diagonal().array() += af.d;
    af.Lk = chol_with_jitter(af.K, "augmentation complement factor");
  }
  return af;
}

// Full conditional of lambda_k given its quadratic form m_k = q_k' Lw q_k.
TruncatedNormalParams lambda_cond_core(double m_k, int eta_k,
                                       const ChainState& st,
                                       const HyperParams& hp) {
  const double s2l = eta_k == 1 ? st.sigma2_lambda1 : st.sigma2_lambda0;
  const double prior_mean = eta_k == 1 ? 0.0 : hp.mu_theta;
  const double v = 1.0 / (1.0 / s2l + 1.0 / (2.0 * st.sigma2_e));
  const double b = m_k / (2.0 * st.sigma2_e) + prior_mean / s2l;
  return {v * b, v, 0.0, 2.0};
}

TruncatedNormalParams theta_cond_core(double sum_m, double trL, int n, int T,
                                      const ChainState& st,
                                      const HyperParams& hp) {
  const double v =
      1.0 / ((n - T) / (2.0 * st.sigma2_e) + 1.0 / st.sigma2_theta);
  const double b =
      (trL - sum_m) / (2.0 * st.sigma2_e) + hp.mu_theta / st.sigma2_theta;
  return {v * b, v, 0.0, 2.0};
}

double eta_prob_core(double lambda_k, const ChainState& st,
                     const HyperParams& hp) {
  TruncatedNormalParams spike{0.0, st.sigma2_lambda1, 0.0, 2.0};
  TruncatedNormalParams slab{hp.mu_theta, st.sigma2_lambda0, 0.0, 2.0};
  const double l1 = std::log(st.w) + logpdf_truncnorm(lambda_k, spike);
  const double l0 = std::log1p(-st.w) + logpdf_truncnorm(lambda_k, slab);
  const double d = l0 - l1;
  if (d > 700.0) return 0.0;
  if (d < -700.0) return 1.0;
  return 1.0 / (1.0 + std::exp(d));
}

void check_graph_index(int s, const ChainState& st) {
  if (s < 0 || s >= static_cast<int>(st.graphs.size()))
    fail(Errc::InvalidParam, "graph index out of range");
}

void check_k(int k, int T) {
  if (k < 2 || k > T) fail(Errc::InvalidParam, "need 2 <= k <= T");
}

// Interval mass of a truncated normal on (0,2) as a function of its scale;
// the quantity the plain conjugate variance update ignores.
double log_interval_mass(double mu, double s2) {
  const double sd = std::sqrt(s2);
  return log_norm_cdf_diff((2.0 - mu) / sd, (0.0 - mu) / sd);
}

// Conjugate proposal + optional Metropolis correction for one variance
// hyperparameter whose likelihood is `count` truncated-normal terms.
double variance_update(double cur, double shape, double rate, int count,
                       double mu, bool exact_mh, Rng& rng) {
  const double prop = sample_inverse_gamma(shape, rate, rng);
  if (!exact_mh || count == 0) return prop;
  const double la =
      count * (log_interval_mass(mu, cur) - log_interval_mass(mu, prop));
  return std::log(rng.u01p()) < la ? prop : cur;
}

PosteriorSample make_sample(int t, const ChainState& st, double lj) {
  PosteriorSample smp;
  smp.sweep = t;
  smp.log_joint = lj;
  smp.sigma2_e = st.sigma2_e;
  smp.w = st.w;
  smp.sigma2_theta = st.sigma2_theta;
  smp.sigma2_lambda0 = st.sigma2_lambda0;
  smp.sigma2_lambda1 = st.sigma2_lambda1;
  smp.pi = st.dict.pi;
  smp.graphs = st.graphs;
  std::set<int> occupied;
  for (const auto& gs : st.graphs) occupied.insert(gs.z);
  for (int id : occupied) {
    smp.atom_ids.push_back(id);
    smp.atom_U.push_back(st.dict.atoms[id - 1].U);
  }
  return smp;
}

PosteriorSamples advance(Checkpoint ck,
                         const std::vector<NormalizedLaplacian>& data,
                         const HyperParams& hp, const GibbsConfig& cfg,
                         const CheckpointSink& sink) {
  for (int t = ck.next_sweep; t <= cfg.iters; ++t) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(t), cfg.chain);
    const SweepReport rep = sweep(ck.state, data, hp, rng);
    ck.collected.trace.push_back(
        {t, rep.log_joint, ck.state.sigma2_e, occupied_count(ck.state)});
    if (t > cfg.burnin && (t - cfg.burnin) % cfg.thin == 0)
      ck.collected.samples.push_back(make_sample(t, ck.state, rep.log_joint));
    ck.next_sweep = t + 1;
    if (sink && cfg.checkpoint_every > 0 &&
        (t % cfg.checkpoint_every == 0 || t == cfg.iters))
      sink(ck);
  }
  return std::move(ck.collected);
}

}  // namespace

const Matrix& sample_atom_for(const PosteriorSample& smp, int s) {
  if (s < 0 || s >= static_cast<int>(smp.graphs.size()))
    fail(Errc::InvalidParam, "graph index out of range");
  const int z = smp.graphs[s].z;
  const auto it =
      std::lower_bound(smp.atom_ids.begin(), smp.atom_ids.end(), z);
  if (it == smp.atom_ids.end() || *it != z)
    fail(Errc::InvalidParam, "sample does not carry the assigned atom");
  return smp.atom_U[it - smp.atom_ids.begin()];
}

Vector quad_forms(const Matrix& Lw, const Matrix& U) {
  const Matrix X = Lw * U;
  Vector m(U.cols());
  for (int k = 0; k < U.cols(); ++k) m(k) = U.col(k).dot(X.col(k));
  return m;
}

Matrix augment_R(int s, const ChainState& state,
                 const std::vector<NormalizedLaplacian>& data, Rng& rng) {
  check_graph_index(s, state);
  const GraphState& gs = state.graphs[s];
  const Matrix& U = state.dict.atoms[gs.z - 1].U;
  const int n = static_cast<int>(U.rows());
  const int T = static_cast<int>(U.cols());
  const Matrix Lw = working_laplacian(data[s], gs);
  const AugmentFactors af = augment_factors(Lw, gs);
  const double se = std::sqrt(state.sigma2_e);

  Matrix R(T, n);
  Vector z(n);
  for (int k = 0; k < T; ++k) {
    const double gk = gs.theta - gs.lambda(k);
    if (gk == 0.0) {
      R.row(k).setZero();
      continue;
    }
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    if (gk > 0.0)
      R.row(k) =
          (gk * (af.F * U.col(k)) + se * std::sqrt(gk) * (af.Lf * z)).transpose();
    else
      R.row(k) = (-gk * (af.K * U.col(k)) + se * std::sqrt(-gk) * (af.Lk * z))
                     .transpose();
  }
  return R;
}

double augment_logpdf(const Matrix& R, int s, const ChainState& state,
                      const std::vector<NormalizedLaplacian>& data) {
  check_graph_index(s, state);
  const GraphState& gs = state.graphs[s];
  const Matrix& U = state.dict.atoms[gs.z - 1].U;
  const int n = static_cast<int>(U.rows());
  const int T = static_cast<int>(U.cols());
  if (R.rows() != T || R.cols() != n)
    fail(Errc::ShapeMismatch, "R shape differs from (T, n)");
  const Matrix Lw = working_laplacian(data[s], gs);
  const AugmentFactors af = augment_factors(Lw, gs);
  constexpr double kLog2Pi = 1.8378770664093454836;

  double lp = 0.0;
  for (int k = 0; k < T; ++k) {
    const double gk = gs.theta - gs.lambda(k);
    if (gk == 0.0) {
      if (R.row(k).norm() != 0.0)
        return -std::numeric_limits<double>::infinity();
      continue;
    }
    const double a = state.sigma2_e * std::abs(gk);
    const Matrix& Lc = gk > 0.0 ? af.Lf : af.Lk;
    const Vector mean = gk > 0.0 ? Vector(gk * (af.F * U.col(k)))
                                 : Vector(-gk * (af.K * U.col(k)));
    const Vector y = Lc.triangularView<Eigen::Lower>().solve(
        Vector(R.row(k).transpose() - mean));
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(Lc(i, i));
    lp += -0.5 * y.squaredNorm() / a -
          0.5 * n * (kLog2Pi + std::log(a)) - logdet;
  }
  return lp;
}

StiefelPoint update_dictionary_atom(int l, const ChainState& state,
                                    const std::vector<Matrix>& R_all,
                                    const HyperParams& hp, Rng& rng,
                                    LangevinStats* stats) {
  if (l < 1 || l > static_cast<int>(state.dict.atoms.size()))
    fail(Errc::InvalidParam, "atom index out of range");
  const Matrix& U = state.dict.atoms[l - 1].U;
  const int n = static_cast<int>(U.rows());
  const int T = static_cast<int>(U.cols());

  Matrix C = Matrix::Zero(n, T);
  bool occupied = false;
  for (int s = 0; s < static_cast<int>(state.graphs.size()); ++s)
    if (state.graphs[s].z == l) {
      C += R_all[s].transpose();
      occupied = true;
    }
  if (!occupied) return sample_uniform_stiefel_star(n, T, rng);
  C /= state.sigma2_e;
  if (hp.omega != 0.0) C += hp.omega * hp.M;
  return sample_matrix_langevin(LangevinParams{std::move(C)},
                                state.dict.atoms[l - 1], rng, stats);
}

Vector assignment_logweights(int s, const ChainState& state,
                             const std::vector<NormalizedLaplacian>& data,
                             const HyperParams& hp) {
  check_graph_index(s, state);
  const GraphState& gs = state.graphs[s];
  const int g = static_cast<int>(state.dict.atoms.size());
  const int n = static_cast<int>(data[s].L.rows());
  const int T = hp.T;
  const Matrix Lw = working_laplacian(data[s], gs);
  const double trL = gs.diagL.sum();

  // lambda_2..lambda_T and theta are integrated out in closed form: each is
  // a Gaussian-times-truncated-prior integral over (0,2), contributing the
  // completed square v b^2 / 2 plus (optionally) the interval mass.  Factors
  // shared across atoms (prior normalizers, sqrt(2 pi v)) are dropped.
  Vector lw(g);
  for (int l = 0; l < g; ++l) {
    const Vector m = quad_forms(Lw, state.dict.atoms[l].U);
    double acc = std::log(state.dict.pi(l));
    for (int k = 1; k < T; ++k) {
      const TruncatedNormalParams p =
          lambda_cond_core(m(k), gs.eta(k), state, hp);
      acc += 0.5 * p.mean * p.mean / p.variance;
      if (hp.assignment_truncation_correction) {
        const double sd = std::sqrt(p.variance);
        acc += log_norm_cdf_diff((2.0 - p.mean) / sd, -p.mean / sd);
      }
    }
    const TruncatedNormalParams pt =
        theta_cond_core(m.sum(), trL, n, T, state, hp);
    acc += 0.5 * pt.mean * pt.mean / pt.variance;
    if (hp.assignment_truncation_correction) {
      const double sd = std::sqrt(pt.variance);
      acc += log_norm_cdf_diff((2.0 - pt.mean) / sd, -pt.mean / sd);
    }
    lw(l) = acc;
  }
  return lw;
}

int update_assignment(int s, const ChainState& state,
                      const std::vector<NormalizedLaplacian>& data,
                      const HyperParams& hp, Rng& rng) {
  const Vector lw = assignment_logweights(s, state, data, hp);
  const int g = static_cast<int>(lw.size());
  const double mx = lw.maxCoeff();
  Vector w = (lw.array() - mx).exp();
  const double u = rng.u01() * w.sum();
  double acc = 0.0;
  for (int l = 0; l < g; ++l) {
    acc += w(l);
    if (u < acc) return l + 1;
  }
  return g;
}

Vector update_weights(const ChainState& state, const HyperParams& hp,
                      Rng& rng) {
  Vector alpha = Vector::Constant(hp.g, hp.alpha0 / hp.g);
  for (const auto& gs : state.graphs) alpha(gs.z - 1) += 1.0;
  return sample_dirichlet(alpha, rng);
}

TruncatedNormalParams lambda_conditional(
    int s, int k, const ChainState& state,
    const std::vector<NormalizedLaplacian>& data, const HyperParams& hp) {
  check_graph_index(s, state);
  check_k(k, hp.T);
  const GraphState& gs = state.graphs[s];
  const Matrix Lw = working_laplacian(data[s], gs);
  const Vector u = state.dict.atoms[gs.z - 1].U.col(k - 1);
  const double m_k = u.dot(Lw * u);
  return lambda_cond_core(m_k, gs.eta(k - 1), state, hp);
}

double update_lambda(int s, int k, const ChainState& state,
                     const std::vector<NormalizedLaplacian>& data,
                     const HyperParams& hp, Rng& rng) {
  return sample_truncnorm(lambda_conditional(s, k, state, data, hp), rng);
}

double eta_spike_probability(int s, int k, const ChainState& state,
                             const HyperParams& hp) {
  check_graph_index(s, state);
  check_k(k, hp.T);
  return eta_prob_core(state.graphs[s].lambda(k - 1), state, hp);
}

int update_eta(int s, int k, const ChainState& state, const HyperParams& hp,
               Rng& rng) {
  return rng.bernoulli(eta_spike_probability(s, k, state, hp)) ? 1 : 0;
}

TruncatedNormalParams theta_conditional(
    int s, const ChainState& state,
    const std::vector<NormalizedLaplacian>& data, const HyperParams& hp) {
  check_graph_index(s, state);
  const GraphState& gs = state.graphs[s];
  const int n = static_cast<int>(data[s].L.rows());
  const Matrix Lw = working_laplacian(data[s], gs);
  const Vector m = quad_forms(Lw, state.dict.atoms[gs.z - 1].U);
  return theta_cond_core(m.sum(), gs.diagL.sum(), n, hp.T, state, hp);
}

double update_theta(int s, const ChainState& state,
                    const std::vector<NormalizedLaplacian>& data,
                    const HyperParams& hp, Rng& rng) {
  return sample_truncnorm(theta_conditional(s, state, data, hp), rng);
}

Vector update_diag(int s, const ChainState& state, Rng& rng) {
  check_graph_index(s, state);
  const GraphState& gs = state.graphs[s];
  const Matrix mu = model_mean(state.dict.atoms[gs.z - 1], gs);
  const double sd = std::sqrt(2.0 * state.sigma2_e);
  Vector out(mu.rows());
  for (int i = 0; i < mu.rows(); ++i) out(i) = rng.normal(mu(i, i), sd);
  return out;
}

double update_sigma2_e(const ChainState& state,
                       const std::vector<NormalizedLaplacian>& data,
                       const HyperParams& hp, Rng& rng) {
  const int S = static_cast<int>(data.size());
  const int n = static_cast<int>(data[0].L.rows());
  double resid = 0.0;
  for (int s = 0; s < S; ++s) {
    const GraphState& gs = state.graphs[s];
    const Matrix mu = model_mean(state.dict.atoms[gs.z - 1], gs);
    resid += (working_laplacian(data[s], gs) - mu).squaredNorm();
  }
  const double data_shape = hp.sigma2_e_likelihood_shape
                                ? 0.25 * S * n * (n + 1.0)
                                : 0.5 * S * static_cast<double>(n) * n;
  return sample_inverse_gamma(hp.sigma2_e_shape + data_shape,
                              hp.sigma2_e_rate + 0.25 * resid, rng);
}

void update_hyperparams(ChainState& state, const HyperParams& hp, Rng& rng) {
  const int T = hp.T;

  // eta_1 == 1 by assignment and still counts as a Bernoulli(w) success, so
  // the count runs over all T indicators.
  double a = hp.w_beta_a, b = hp.w_beta_b;
  for (const auto& gs : state.graphs)
    for (int k = 0; k < T; ++k)
      (gs.eta(k) == 1 ? a : b) += 1.0;
  state.w = std::min(std::max(rng.beta(a, b), 1e-12), 1.0 - 1e-12);

  double sh_t = hp.ig_shape, ra_t = hp.ig_rate;
  double sh_1 = hp.ig_shape, ra_1 = hp.ig_rate;
  double sh_0 = hp.ig_shape, ra_0 = hp.ig_rate;
  int n_t = 0, n_1 = 0, n_0 = 0;
  for (const auto& gs : state.graphs) {
    const double dt = gs.theta - hp.mu_theta;
    sh_t += 0.5;
    ra_t += 0.5 * dt * dt;
    ++n_t;
    for (int k = 1; k < T; ++k) {
      if (gs.eta(k) == 1) {
        sh_1 += 0.5;
        ra_1 += 0.5 * gs.lambda(k) * gs.lambda(k);
        ++n_1;
      } else {
        const double d = gs.lambda(k) - hp.mu_theta;
        sh_0 += 0.5;
        ra_0 += 0.5 * d * d;
        ++n_0;
      }
    }
  }
  state.sigma2_theta = variance_update(state.sigma2_theta, sh_t, ra_t, n_t,
                                       hp.mu_theta, hp.exact_hyper_mh, rng);
  state.sigma2_lambda1 = variance_update(state.sigma2_lambda1, sh_1, ra_1, n_1,
                                         0.0, hp.exact_hyper_mh, rng);
  state.sigma2_lambda0 = variance_update(state.sigma2_lambda0, sh_0, ra_0, n_0,
                                         hp.mu_theta, hp.exact_hyper_mh, rng);
}

int occupied_count(const ChainState& state) {
  std::set<int> occ;
  for (const auto& gs : state.graphs) occ.insert(gs.z);
  return static_cast<int>(occ.size());
}

SweepReport sweep(ChainState& state,
                  const std::vector<NormalizedLaplacian>& data,
                  const HyperParams& hp, Rng& rng) {
  const int S = static_cast<int>(data.size());
  if (S == 0 || static_cast<int>(state.graphs.size()) != S)
    fail(Errc::DimensionMismatch, "state and data graph counts differ");
  const int n = static_cast<int>(data[0].L.rows());
  const int T = hp.T;
  SweepReport rep;
  double mark = now_sec();
  const auto lap = [&](int idx) {
    const double t = now_sec();
    rep.step_seconds[idx] += t - mark;
    mark = t;
  };

  // 1: augmentation.  If a factor loses definiteness (it should not, by
  // construction), refresh theta from its conditional and retry once.
  std::vector<Matrix> R(S);
  for (int s = 0; s < S; ++s) {
    try {
      R[s] = augment_R(s, state, data, rng);
    } catch (const Error& e) {
      if (e.code() != Errc::NotPositiveDefinite) throw;
      ++rep.definiteness_retries;
      state.graphs[s].theta = update_theta(s, state, data, hp, rng);
      R[s] = augment_R(s, state, data, rng);
    }
  }
  lap(0);

  // 2: dictionary atoms.
  for (int l = 1; l <= hp.g; ++l)
    state.dict.atoms[l - 1] =
        update_dictionary_atom(l, state, R, hp, rng, &rep.stiefel);
  lap(1);

  // 3: assignments (lambda/theta collapsed; both are redrawn below).
  for (int s = 0; s < S; ++s)
    state.graphs[s].z = update_assignment(s, state, data, hp, rng);
  lap(2);

  // 4: mixture weights.
  state.dict.pi = update_weights(state, hp, rng);
  lap(3);

  // 5-8 per graph, reusing one set of quadratic forms.
  for (int s = 0; s < S; ++s) {
    GraphState& gs = state.graphs[s];
    const StiefelPoint& atom = state.dict.atoms[gs.z - 1];
    const Matrix Lw = working_laplacian(data[s], gs);
    const Vector m = quad_forms(Lw, atom.U);
    const double trL = gs.diagL.sum();

    for (int k = 1; k < T; ++k)
      gs.lambda(k) =
          sample_truncnorm(lambda_cond_core(m(k), gs.eta(k), state, hp), rng);
    for (int k = 1; k < T; ++k)
      gs.eta(k) = rng.bernoulli(eta_prob_core(gs.lambda(k), state, hp)) ? 1 : 0;
    gs.theta = sample_truncnorm(
        theta_cond_core(m.sum(), trL, n, T, state, hp), rng);

    const Matrix mu = model_mean(atom, gs);
    const double sd = std::sqrt(2.0 * state.sigma2_e);
    for (int i = 0; i < n; ++i) gs.diagL(i) = rng.normal(mu(i, i), sd);
  }
  lap(4);
  rep.step_seconds[5] = rep.step_seconds[6] = rep.step_seconds[7] = 0.0;

  // 9: noise variance.
  state.sigma2_e = update_sigma2_e(state, data, hp, rng);
  lap(8);

  update_hyperparams(state, hp, rng);
  lap(9);

  rep.log_joint = log_joint(state, data, hp);
  return rep;
}

PosteriorSamples run_chain(const std::vector<NormalizedLaplacian>& data,
                           const HyperParams& hp, const GibbsConfig& cfg,
                           const CheckpointSink& sink) {
  validate_hyperparams(hp);
  if (data.empty()) fail(Errc::DimensionMismatch, "no graphs to fit");
  // burnin == iters would retain zero sweeps: a fit that can never emit a
  // sample is a configuration error, not an empty result.
  if (cfg.burnin < 0 || cfg.burnin >= cfg.iters || cfg.thin < 1)
    fail(Errc::InvalidParam, "bad iters/burnin/thin configuration");

  Rng init_rng = Rng::stream(cfg.seed, 0, cfg.chain);
  Checkpoint ck;
  ck.state = init_chain(data, hp, init_rng);
  ck.next_sweep = 1;
  ck.collected.iters = cfg.iters;
  ck.collected.burnin = cfg.burnin;
  ck.collected.thin = cfg.thin;
  ck.collected.seed = cfg.seed;
  ck.collected.chain = cfg.chain;
  return advance(std::move(ck), data, hp, cfg, sink);
}

PosteriorSamples continue_chain(Checkpoint ck,
                                const std::vector<NormalizedLaplacian>& data,
                                const HyperParams& hp, const GibbsConfig& cfg,
                                const CheckpointSink& sink) {
  validate_hyperparams(hp);
  if (data.empty()) fail(Errc::DimensionMismatch, "no graphs to fit");
  if (ck.collected.seed != cfg.seed || ck.collected.chain != cfg.chain ||
      ck.collected.burnin != cfg.burnin || ck.collected.thin != cfg.thin)
    fail(Errc::InvalidParam, "checkpoint was written under a different run");
  ck.collected.iters = cfg.iters;
  return advance(std::move(ck), data, hp, cfg, sink);
}

double marginal_loglik_Q(const Matrix& Q, const Matrix& L, double sigma2_e) {
  const int n = static_cast<int>(Q.rows());
  const int T = static_cast<int>(Q.cols());
  if (L.rows() != n || L.cols() != n)
    fail(Errc::ShapeMismatch, "L shape differs from Q's row count");
  if (T > n - 1) fail(Errc::InvalidParam, "need T <= n-1 for a flat block");
  if (!(sigma2_e > 0.0)) fail(Errc::InvalidParam, "sigma2_e must be > 0");
  constexpr double kLog4Pi = 2.5310242469692907930;

  const Vector m = quad_forms(L, Q);
  double ll = -0.25 * n * (n + 1.0) * std::log(sigma2_e) -
              L.squaredNorm() / (4.0 * sigma2_e);
  const double sd_l = std::sqrt(2.0 * sigma2_e);
  for (int k = 1; k < T; ++k) {
    ll += m(k) * m(k) / (4.0 * sigma2_e) +
          0.5 * (kLog4Pi + std::log(sigma2_e)) +
          log_norm_cdf_diff((2.0 - m(k)) / sd_l, -m(k) / sd_l);
  }
  const double M_t = L.trace() - m.sum();
  const double mbar = M_t / (n - T);
  const double sd_t = std::sqrt(2.0 * sigma2_e / (n - T));
  ll += M_t * M_t / (4.0 * sigma2_e * (n - T)) +
        0.5 * (kLog4Pi + std::log(sigma2_e / (n - T))) +
        log_norm_cdf_diff((2.0 - mbar) / sd_t, -mbar / sd_t);
  if (!std::isfinite(ll))
    fail(Errc::NonFiniteLogDensity, "marginal log-likelihood not finite");
  return ll;
}

}  // namespace slg
