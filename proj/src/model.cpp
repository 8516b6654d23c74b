#include "slg/model.hpp"

#include <algorithm>
#include <cmath>

#include "slg/distributions.hpp"

namespace slg {

void validate_hyperparams(const HyperParams& hp) {
  if (hp.T < 2) fail(Errc::InvalidParam, "T must be >= 2");
  if (hp.g < 1) fail(Errc::InvalidParam, "g must be >= 1");
  if (!(hp.alpha0 > 0.0)) fail(Errc::InvalidParam, "alpha0 must be > 0");
  if (!(hp.ig_shape > 0.0) || !(hp.ig_rate > 0.0) ||
      !(hp.sigma2_e_shape > 0.0) || !(hp.sigma2_e_rate > 0.0))
    fail(Errc::InvalidParam, "inverse-gamma hyperparameters must be > 0");
  if (!(hp.w_beta_a > 0.0) || !(hp.w_beta_b > 0.0))
    fail(Errc::InvalidParam, "beta hyperparameters must be > 0");
  if (hp.omega != 0.0 && hp.M.size() == 0)
    fail(Errc::InvalidParam, "nonzero omega requires a mean matrix M");
}

Matrix working_laplacian(const NormalizedLaplacian& d, const GraphState& gs) {
  Matrix L = d.L;
  L.diagonal() = gs.diagL;
  return L;
}

Matrix model_mean(const StiefelPoint& atom, const GraphState& gs) {
  const Vector shift = gs.lambda.array() - gs.theta;
  Matrix mu = atom.U * shift.asDiagonal() * atom.U.transpose();
  mu.diagonal().array() += gs.theta;
  return mu;
}

void validate_chain_state(const ChainState& state, const HyperParams& hp,
                          int n, int S) {
  if (static_cast<int>(state.graphs.size()) != S)
    fail(Errc::DimensionMismatch, "graph-state count differs from data");
  if (static_cast<int>(state.dict.atoms.size()) != hp.g ||
      state.dict.pi.size() != hp.g)
    fail(Errc::DimensionMismatch, "dictionary size differs from g");
  for (const auto& atom : state.dict.atoms) {
    if (atom.U.rows() != n || atom.U.cols() != hp.T)
      fail(Errc::DimensionMismatch, "atom shape differs from (n, T)");
    validate_stiefel_point(atom);
  }
  if (std::abs(state.dict.pi.sum() - 1.0) > 1e-8 ||
      (state.dict.pi.array() < 0.0).any())
    fail(Errc::InvalidParam, "pi not on the simplex");
  for (const auto& gs : state.graphs) {
    if (gs.z < 1 || gs.z > hp.g) fail(Errc::InvalidParam, "assignment outside 1..g");
    if (gs.lambda.size() != hp.T || gs.eta.size() != hp.T ||
        gs.diagL.size() != n)
      fail(Errc::DimensionMismatch, "graph-state vector lengths");
    if (gs.lambda(0) != 0.0) fail(Errc::InvalidParam, "lambda[1] must stay 0");
    if (gs.eta(0) != 1) fail(Errc::InvalidParam, "eta[1] must stay 1");
    for (int k = 1; k < hp.T; ++k) {
      if (!(gs.lambda(k) > 0.0 && gs.lambda(k) < 2.0))
        fail(Errc::InvalidParam, "lambda outside (0,2)");
      if (gs.eta(k) != 0 && gs.eta(k) != 1)
        fail(Errc::InvalidParam, "eta not binary");
    }
    if (!(gs.theta > 0.0 && gs.theta < 2.0))
      fail(Errc::InvalidParam, "theta outside (0,2)");
    if (!gs.diagL.allFinite()) fail(Errc::InvalidParam, "non-finite diagonal");
  }
  if (!(state.sigma2_e > 0.0) || !(state.sigma2_theta > 0.0) ||
      !(state.sigma2_lambda0 > 0.0) || !(state.sigma2_lambda1 > 0.0))
    fail(Errc::InvalidParam, "variances must be > 0");
  if (!(state.w > 0.0 && state.w < 1.0))
    fail(Errc::InvalidParam, "w outside (0,1)");
}

namespace {

double clip_eig(double v) {
  return std::min(std::max(v, 1e-6), 2.0 - 1e-6);
}

}  // namespace

ChainState init_chain(const std::vector<NormalizedLaplacian>& data,
                      const HyperParams& hp, Rng& rng) {
  validate_hyperparams(hp);
  const int S = static_cast<int>(data.size());
  if (S < 1) fail(Errc::DimensionMismatch, "need at least one graph");
  const int n = static_cast<int>(data[0].L.rows());
  for (const auto& d : data)
    if (d.L.rows() != n || d.L.cols() != n)
      fail(Errc::DimensionMismatch, "graphs must share the vertex count");
  if (hp.T > n - 1) fail(Errc::TooManySpikes, "T must be <= n-1");

  ChainState st;
  st.w = 0.5;
  const double prior_var =
      hp.ig_shape > 1.0 ? hp.ig_rate / (hp.ig_shape - 1.0) : hp.ig_rate;
  st.sigma2_theta = prior_var;
  st.sigma2_lambda0 = prior_var;
  st.sigma2_lambda1 = prior_var;

  // Per-graph spectral seeds.
  st.graphs.resize(S);
  std::vector<EigenDecomposition> eigs(S);
  for (int s = 0; s < S; ++s) {
    eigs[s] = full_eigendecomposition(data[s].L);
    GraphState& gs = st.graphs[s];
    gs.lambda = Vector::Zero(hp.T);
    gs.eta = IntVector::Zero(hp.T);
    gs.eta(0) = 1;
    for (int k = 1; k < hp.T; ++k) {
      gs.lambda(k) = clip_eig(eigs[s].omega(k));
      gs.eta(k) = gs.lambda(k) < 0.5 * hp.mu_theta ? 1 : 0;
    }
    gs.theta = clip_eig(eigs[s].omega.tail(n - hp.T).mean());
    gs.diagL = data[s].L.diagonal();
  }

  // Assignments from a prior stick draw.
  st.dict.pi = sample_dirichlet(
      Vector::Constant(hp.g, hp.alpha0 / hp.g), rng);
  for (int s = 0; s < S; ++s) {
    double u = rng.u01();
    int z = hp.g;
    double acc = 0.0;
    for (int l = 0; l < hp.g; ++l) {
      acc += st.dict.pi(l);
      if (u < acc) {
        z = l + 1;
        break;
      }
    }
    st.graphs[s].z = z;
  }

  // Occupied atoms start at the eigenmatrix of their members' mean Laplacian;
  // the rest are fresh prior draws.
  st.dict.atoms.resize(hp.g);
  for (int l = 0; l < hp.g; ++l) {
    Matrix mean = Matrix::Zero(n, n);
    int members = 0;
    for (int s = 0; s < S; ++s)
      if (st.graphs[s].z == l + 1) {
        mean += data[s].L;
        ++members;
      }
    bool spectral_ok = false;
    if (members > 0) {
      mean /= members;
      const EigenDecomposition ed = full_eigendecomposition(mean);
      Matrix U = ed.W.leftCols(hp.T);
      if ((U.col(0).array() > 0.0).all()) {
        st.dict.atoms[l] = StiefelPoint{std::move(U)};
        spectral_ok = true;
      }
    }
    if (!spectral_ok)
      st.dict.atoms[l] = sample_uniform_stiefel_star(n, hp.T, rng);
  }

  // sigma2_e from the residual of the assembled fit.
  double resid = 0.0;
  for (int s = 0; s < S; ++s) {
    const Matrix mu = model_mean(st.dict.atoms[st.graphs[s].z - 1], st.graphs[s]);
    resid += (working_laplacian(data[s], st.graphs[s]) - mu).squaredNorm();
  }
  st.sigma2_e = std::max(resid / (static_cast<double>(S) * n * (n + 1)), 1e-8);

  validate_chain_state(st, hp, n, S);
  return st;
}

double log_joint(const ChainState& state,
                 const std::vector<NormalizedLaplacian>& data,
                 const HyperParams& hp) {
  const int S = static_cast<int>(data.size());
  const int n = static_cast<int>(data[0].L.rows());
  const int T = hp.T;
  double lj = 0.0;

  // Likelihood: off-diagonals No(mu_ij, sigma2_e), diagonals No(mu_ii, 2 sigma2_e);
  // together -(n(n+1)/4) log sigma2_e - ||L - mu||_F^2 / (4 sigma2_e) per graph.
  for (int s = 0; s < S; ++s) {
    const GraphState& gs = state.graphs[s];
    const Matrix mu = model_mean(state.dict.atoms[gs.z - 1], gs);
    const double r2 = (working_laplacian(data[s], gs) - mu).squaredNorm();
    lj += -0.25 * n * (n + 1.0) * std::log(state.sigma2_e) -
          r2 / (4.0 * state.sigma2_e);
  }

  // Mixture: assignments and Dirichlet weights.
  for (int s = 0; s < S; ++s) lj += std::log(state.dict.pi(state.graphs[s].z - 1));
  lj += ((hp.alpha0 / hp.g - 1.0) * state.dict.pi.array().log()).sum();

  // Spike values, indicators, flat value.
  for (int s = 0; s < S; ++s) {
    const GraphState& gs = state.graphs[s];
    for (int k = 1; k < T; ++k) {
      const bool spike = gs.eta(k) == 1;
      TruncatedNormalParams p;
      p.mean = spike ? 0.0 : hp.mu_theta;
      p.variance = spike ? state.sigma2_lambda1 : state.sigma2_lambda0;
      lj += logpdf_truncnorm(gs.lambda(k), p);
      lj += spike ? std::log(state.w) : std::log1p(-state.w);
    }
    lj += std::log(state.w);  // eta_1 == 1 counts as a Bernoulli(w) success
    TruncatedNormalParams pt;
    pt.mean = hp.mu_theta;
    pt.variance = state.sigma2_theta;
    lj += logpdf_truncnorm(gs.theta, pt);
  }

  // Langevin base measure (zero under the uniform default).
  if (hp.omega != 0.0)
    for (const auto& atom : state.dict.atoms)
      lj += hp.omega * (hp.M.transpose() * atom.U).trace();

  // Hyperpriors.
  lj += (hp.w_beta_a - 1.0) * std::log(state.w) +
        (hp.w_beta_b - 1.0) * std::log1p(-state.w);
  const auto ig_term = [](double shape, double rate, double v) {
    return -(shape + 1.0) * std::log(v) - rate / v;
  };
  lj += ig_term(hp.ig_shape, hp.ig_rate, state.sigma2_theta);
  lj += ig_term(hp.ig_shape, hp.ig_rate, state.sigma2_lambda0);
  lj += ig_term(hp.ig_shape, hp.ig_rate, state.sigma2_lambda1);
  lj += ig_term(hp.sigma2_e_shape, hp.sigma2_e_rate, state.sigma2_e);

  if (!std::isfinite(lj)) fail(Errc::NonFiniteLogDensity, "log joint blew up");
  return lj;
}

}  // namespace slg
