#include "slg/rng.hpp"

#include <cmath>

#include "slg/common.hpp"

namespace slg {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng Rng::stream(uint64_t seed, uint64_t a, uint64_t b) {
  // Mix the key components through splitmix64 so that nearby keys (seed,
  // sweep t, slot k) land far apart in mt19937_64's seed space.
  uint64_t s = seed;
  uint64_t h = splitmix64(s);
  s ^= a * 0xFF51AFD7ED558CCDULL;
  h ^= splitmix64(s);
  s ^= b * 0xC4CEB9FE1A85EC53ULL;
  h ^= splitmix64(s);
  return Rng(h);
}

double Rng::u01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::u01p() {
  double u;
  do {
    u = u01();
  } while (u == 0.0);
  return u;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

int Rng::uniform_int(int n) {
  if (n < 1) fail(Errc::InvalidParam, "uniform_int needs n >= 1");
  // Rejection on the top bits keeps the draw exactly uniform.
  const uint64_t un = static_cast<uint64_t>(n);
  const uint64_t lim = UINT64_MAX - UINT64_MAX % un;
  uint64_t x;
  do {
    x = gen_();
  } while (x >= lim);
  return static_cast<int>(x % un);
}

double Rng::normal() {
  const double u1 = u01p();
  const double u2 = u01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

double Rng::exponential() { return -std::log(u01p()); }

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    fail(Errc::InvalidParam, "gamma needs shape, scale > 0");
  if (shape < 1.0) {
    // Boost a sub-unit shape: X ~ Gamma(shape+1), U^(1/shape) multiplier.
    const double u = u01p();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = u01p();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v * scale;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  const double s = x + y;
  if (s <= 0.0) fail(Errc::DegenerateDenominator, "beta draw collapsed to 0/0");
  return x / s;
}

double Rng::inverse_gamma(double shape, double rate) {
  // If X ~ Gamma(shape, scale = 1/rate) then 1/X ~ InvGamma(shape, rate).
  const double g = gamma(shape, 1.0 / rate);
  if (g <= 0.0) fail(Errc::DegenerateDenominator, "inverse_gamma underflow");
  return 1.0 / g;
}

}  // namespace slg
