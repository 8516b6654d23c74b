#pragma once
// Self-contained random number generation.
//
// All stochastic code in the library draws from this class instead of
// <random>'s distribution objects.  The standard distributions are allowed to
// differ between libstdc++ versions (and between stdlib implementations),
// which would silently break the reproducibility guarantees: identical seeds
// must yield bit-identical chains, and a run resumed from a checkpoint must
// match an uninterrupted run exactly.  The generators below are fixed
// algorithms on top of std::mt19937_64, which *is* specified bit-exactly.

#include <cstdint>

#include <random>

namespace slg {

uint64_t splitmix64(uint64_t& state);

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Derive an independent stream keyed by (seed, a, b).  Sweep-indexed keys
  // let a resumed sampler re-create the exact stream for sweep t without
  // replaying sweeps 0..t-1 or serializing generator state.
  static Rng stream(uint64_t seed, uint64_t a, uint64_t b);

  uint64_t raw() { return gen_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double u01();
  // Uniform on (0,1); never returns 0 (safe under log()).
  double u01p();
  double uniform(double lo, double hi);
  // Uniform integer in {0, ..., n-1}; n >= 1.
  int uniform_int(int n);

  double normal();                      // standard normal, Box-Muller
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential();                 // rate 1
  double gamma(double shape, double scale = 1.0);  // Marsaglia-Tsang
  double beta(double a, double b);
  double inverse_gamma(double shape, double rate);
  bool bernoulli(double p) { return u01() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace slg
