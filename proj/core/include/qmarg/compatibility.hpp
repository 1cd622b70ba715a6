#pragma once

#include "qmarg/gamma_system.hpp"
#include "qmarg/sampling.hpp"
#include "qmarg/tolerances.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

/// Quadratic compatibility system on the kernel coordinates x:
///   sum_ab x_a x_b v^a_ij conj(v^b_ij) = sqrt(l_i l_j) sum_a x_a (v^a_ij + conj(v^a_ij))
/// Solving uses the pairs (1, j) as in the dimension-counting argument (the
/// vacuous (1,1) row is dropped); every pair is evaluated when reporting the
/// residual of a found solution.
struct CompatibilitySystem {
  int r = 0;
  RVec lambdas;
  std::vector<CVec> v;  // per kernel direction a: the complex gamma pairs

  int unknowns() const { return static_cast<int>(v.size()); }
  /// max |F_ij(x)| over the selected (i=1) pairs or over all pairs.
  double residual(const RVec& x, bool all_pairs) const;
};

CompatibilitySystem make_compatibility_system(const NullspaceBasis& basis, const RVec& lambdas,
                                              int r);

struct CompatibilitySolution {
  RVec x;
  double residual_selected = 0.0;
  double residual_all_pairs = 0.0;
};

struct CompatibilityOutcome {
  std::vector<CompatibilitySolution> solutions;  // converged, deduplicated
  int restarts = 0;
  int failed_restarts = 0;           // recorded, not fatal
  double max_nontrivial_norm = 0.0;  // largest ||x|| among full-residual-valid roots
  int full_solutions() const;        // roots passing the all-pairs check
};

/// Damped Newton iterations from `restarts` random points in the box
/// ||x||_inf <= 2.
CompatibilityOutcome solve_compatibility(const NullspaceBasis& basis, const RVec& lambdas,
                                         int restarts, const RandomSource& rs,
                                         const Tolerances& tol = {});

}  // namespace qmarg
