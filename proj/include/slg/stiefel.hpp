#pragma once

#include "slg/common.hpp"
#include "slg/rng.hpp"

namespace slg {

// Point on the submanifold V*^{T,n}: orthonormal columns, first column
// strictly positive in every entry.
struct StiefelPoint {
  Matrix U;  // n x T
};

// Natural parameter of the matrix Langevin density ~ etr(C'U) on V*.
struct LangevinParams {
  Matrix C;  // n x T
};

// Bookkeeping for the first-column positivity rejection inside a transition.
struct LangevinStats {
  long long positivity_attempts = 0;   // vMF draws spent on column 1
  long long positivity_exhausted = 0;  // transitions that kept the old column
};

void validate_stiefel_point(const StiefelPoint& pt);

// von Mises-Fisher draw on the unit sphere of R^m, m = direction.size().
// kappa = 0 degenerates to the uniform distribution; m = 1 is the two-point
// distribution on {-1, +1}.
Vector vmf_sample(const Vector& direction, double kappa, Rng& rng);

// Uniform draw on V*^{T,n}.
StiefelPoint sample_uniform_stiefel_star(int n, int T, Rng& rng);

// One column-wise Gibbs transition leaving ~ etr(C'U) on V* invariant.
// Columns are visited in random order; each is redrawn from its exact von
// Mises-Fisher conditional on the null space of the others.  Column 1 draws
// are rejected into the positive orthant (capped; cap exhaustion keeps the
// previous column, a valid "reject" move).
StiefelPoint sample_matrix_langevin(const LangevinParams& p,
                                    const StiefelPoint& current, Rng& rng,
                                    LangevinStats* stats = nullptr);

}  // namespace slg
