#include "slg/distributions.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace slg {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kSqrt2 = 1.4142135623730950488;
}  // namespace

double log_norm_pdf(double x) { return -0.5 * (x * x + kLog2Pi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double log_norm_cdf(double x) {
  if (x > -30.0) {
    // erfc stays representable down to x ~ -37; switch well before underflow.
    return std::log(0.5 * std::erfc(-x / kSqrt2));
  }
  // Asymptotic expansion of the Mills ratio: Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6).
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return log_norm_pdf(x) - std::log(-x) + std::log(series);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(Errc::InvalidParam, "quantile needs p in (0,1)");
  // Safeguarded Newton on Phi(x) = p (log-space in the tails); no fitted
  // rational constants to transcribe, and erfc supplies full precision.
  double lo = -40.0, hi = 40.0, x;
  if (p < 0.02 || p > 0.98) {
    const double q = std::min(p, 1.0 - p);
    const double r = std::sqrt(-2.0 * std::log(q));
    x = r - (std::log(r) + 0.5 * kLog2Pi) / r;  // first-order tail inverse
    x = (p < 0.5) ? -x : x;
  } else {
    x = (p - 0.5) * 2.5;
  }
  const double logp = std::log(p);
  for (int it = 0; it < 100; ++it) {
    const double lc = log_norm_cdf(x);
    if (lc > logp)
      hi = std::min(hi, x);
    else
      lo = std::max(lo, x);
    const double step = (lc - logp) * std::exp(lc - log_norm_pdf(x));
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-15 * std::max(1.0, std::abs(x))) return xn;
    x = xn;
  }
  return x;
}

double log_norm_cdf_diff(double hi, double lo) {
  if (!(hi > lo)) fail(Errc::InvalidParam, "log_norm_cdf_diff needs hi > lo");
  if (lo > 0.0) {
    // Both in the right tail: work with survival functions via symmetry.
    const double a = log_norm_cdf(-lo);   // log Phi-bar(lo)
    const double b = log_norm_cdf(-hi);   // log Phi-bar(hi)
    return a + std::log1p(-std::exp(b - a));
  }
  if (hi < 0.0) {
    const double a = log_norm_cdf(hi);
    const double b = log_norm_cdf(lo);
    return a + std::log1p(-std::exp(b - a));
  }
  // Interval straddles 0; the mass is far from underflow.
  return std::log(norm_cdf(hi) - norm_cdf(lo));
}

static void check_tn(const TruncatedNormalParams& p) {
  if (!(p.variance > 0.0)) fail(Errc::InvalidParam, "variance must be > 0");
  if (!(p.lower < p.upper)) fail(Errc::InvalidParam, "need lower < upper");
}

// One-sided Robert-style rejection for an interval [a, b] in the far right
// tail (a >= 0): exponential proposal tilted at lambda = (a + sqrt(a^2+4))/2.
static double tail_truncnorm(double a, double b, Rng& rng) {
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (long attempt = 0; attempt < 100000000L; ++attempt) {
    const double z = a + rng.exponential() / lambda;
    if (z > b) continue;
    const double diff = z - lambda;
    if (std::log(rng.u01p()) <= -0.5 * diff * diff) return z;
  }
  fail(Errc::ConvergenceFailure, "truncated-normal tail rejection stalled");
}

double sample_truncnorm(const TruncatedNormalParams& p, Rng& rng) {
  check_tn(p);
  const double sd = std::sqrt(p.variance);
  double alpha = (p.lower - p.mean) / sd;
  double beta = (p.upper - p.mean) / sd;
  // Mirror right-leaning intervals to the left so the inverse-CDF branch
  // always works with well-conditioned CDF values near 0.
  bool flipped = false;
  if (alpha + beta > 0.0) {
    std::swap(alpha, beta);
    alpha = -alpha;
    beta = -beta;
    flipped = true;
  }
  const double mass = norm_cdf(beta) - norm_cdf(alpha);
  double z;
  if (mass > 1e-6) {
    const double pa = norm_cdf(alpha);
    const double u = pa + rng.u01p() * mass;
    z = norm_quantile(std::min(u, 1.0 - 1e-16));
  } else {
    // Far-tail interval.  After mirroring, the interval sits in the left
    // tail: sample -Z truncated to [-beta, -alpha] in the right tail.
    z = -tail_truncnorm(-beta, -alpha, rng);
  }
  if (flipped) z = -z;
  double x = p.mean + sd * z;
  // The contract is a draw strictly inside the interval.
  if (x <= p.lower) x = std::nextafter(p.lower, p.upper);
  if (x >= p.upper) x = std::nextafter(p.upper, p.lower);
  return x;
}

double logpdf_truncnorm(double x, const TruncatedNormalParams& p) {
  check_tn(p);
  if (!(x > p.lower && x < p.upper))
    fail(Errc::OutOfSupport, "x outside the truncation interval");
  const double sd = std::sqrt(p.variance);
  const double z = (x - p.mean) / sd;
  const double lmass =
      log_norm_cdf_diff((p.upper - p.mean) / sd, (p.lower - p.mean) / sd);
  return log_norm_pdf(z) - std::log(sd) - lmass;
}

double truncnorm_mean(const TruncatedNormalParams& p) {
  check_tn(p);
  const double sd = std::sqrt(p.variance);
  const double a = (p.lower - p.mean) / sd;
  const double b = (p.upper - p.mean) / sd;
  const double lmass = log_norm_cdf_diff(b, a);
  const double t = std::exp(log_norm_pdf(a) - lmass) - std::exp(log_norm_pdf(b) - lmass);
  return p.mean + sd * t;
}

double sample_inverse_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    fail(Errc::InvalidParam, "inverse-gamma needs shape, rate > 0");
  return rng.inverse_gamma(shape, rate);
}

Vector sample_dirichlet(const Vector& alpha, Rng& rng) {
  const int k = static_cast<int>(alpha.size());
  if (k < 1) fail(Errc::InvalidParam, "dirichlet needs >= 1 component");
  Vector out(k);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    if (!(alpha(i) > 0.0)) fail(Errc::InvalidParam, "dirichlet alpha must be > 0");
    out(i) = rng.gamma(alpha(i));
    sum += out(i);
  }
  if (!(sum > 0.0)) fail(Errc::DegenerateDenominator, "dirichlet draws sum to 0");
  // Small-alpha gamma draws can underflow to exact zero; keep every
  // component strictly positive so downstream log(pi) stays finite.
  return (out / sum).cwiseMax(1e-300);
}

Matrix chol_with_jitter(const Matrix& S, const char* what) {
  const int n = static_cast<int>(S.rows());
  const double scale = std::max(1e-300, S.diagonal().cwiseAbs().mean());
  for (double jitter : {0.0, 1e-10, 1e-8, 1e-6}) {
    Matrix Sj = S;
    Sj.diagonal().array() += jitter * scale;
    Eigen::LLT<Matrix> llt(Sj);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  (void)n;
  fail(Errc::NotPositiveDefinite, std::string(what) + " not positive-definite");
}

Matrix sample_matrix_normal(const MatrixNormalParams& p, Rng& rng) {
  const int T = static_cast<int>(p.rowCov.rows());
  const int n = static_cast<int>(p.colCov.rows());
  if (p.M.rows() != T || p.M.cols() != n || p.rowCov.cols() != T ||
      p.colCov.cols() != n)
    fail(Errc::ShapeMismatch, "matrix-normal parameter shapes disagree");
  if (!(p.scale > 0.0)) fail(Errc::InvalidParam, "scale must be > 0");
  const Matrix Lr = chol_with_jitter(p.rowCov, "row covariance");
  const Matrix Lc = chol_with_jitter(p.colCov, "column covariance");
  Matrix Z(T, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < T; ++i) Z(i, j) = rng.normal();
  return p.M + std::sqrt(p.scale) * (Lr * Z * Lc.transpose());
}

double log_sum_exp(const Vector& v) {
  if (v.size() == 0) fail(Errc::InvalidParam, "log_sum_exp of empty vector");
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace slg
