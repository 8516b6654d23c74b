#pragma once
// Scalar and matrix-variate primitives for the sampler: stable normal
// CDF/quantile machinery, interval-truncated normals that stay robust when
// the conditional mean sits far outside the interval, inverse-gamma /
// Dirichlet draws, and the matrix Gaussian used by the augmentation step.

#include "slg/common.hpp"
#include "slg/rng.hpp"

namespace slg {

double log_norm_pdf(double x);          // standard normal
double norm_cdf(double x);
double log_norm_cdf(double x);          // safe into the far left tail
double norm_quantile(double p);         // inverse CDF, p in (0,1)

// log( Phi(hi) - Phi(lo) ) for lo < hi, stable when both arguments share a
// far tail (the difference is formed in log space, never by subtraction of
// two values near 0 or 1).
double log_norm_cdf_diff(double hi, double lo);

struct TruncatedNormalParams {
  double mean = 0.0;
  double variance = 1.0;
  double lower = 0.0;
  double upper = 2.0;
};

// Draw strictly inside (lower, upper).  Inverse-CDF when the interval holds
// non-negligible mass; exponential-tilted tail rejection otherwise, so means
// many sigma outside the interval cannot stall the sampler.
double sample_truncnorm(const TruncatedNormalParams& p, Rng& rng);
double logpdf_truncnorm(double x, const TruncatedNormalParams& p);
double truncnorm_mean(const TruncatedNormalParams& p);  // analytic phi/Phi form

double sample_inverse_gamma(double shape, double rate, Rng& rng);
Vector sample_dirichlet(const Vector& alpha, Rng& rng);

struct MatrixNormalParams {
  Matrix M;       // T x n mean
  Matrix rowCov;  // T x T SPD
  Matrix colCov;  // n x n SPD
  double scale = 1.0;  // multiplies rowCov (the sigma^2_e factor)
};

// Draw M + sqrt(scale) * chol(rowCov) Z chol(colCov)', Z iid standard normal;
// vec() covariance is scale * (colCov (x) rowCov).
Matrix sample_matrix_normal(const MatrixNormalParams& p, Rng& rng);

// Lower Cholesky with a jitter ladder (1e-10, 1e-8, 1e-6 added to the
// diagonal, scaled by mean diagonal magnitude) before giving up.
Matrix chol_with_jitter(const Matrix& S, const char* what);

double log_sum_exp(const Vector& v);

}  // namespace slg
