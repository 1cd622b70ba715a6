#pragma once

#include "qmarg/types.hpp"

namespace qmarg {

/// Schmidt decomposition of a pure state across a bipartition:
///   |psi> = sum_i sqrt(coefficients[i]) |left_i> (x) |right_i>
/// with decreasing coefficients and orthonormal basis columns. Each left
/// column is phase-fixed so that its first entry of largest modulus is real
/// non-negative; the matching right column carries the compensating phase so
/// the expansion reproduces the source state exactly, not just up to phase.
struct SchmidtDecomposition {
  SubsystemSet left, right;
  std::vector<int> left_dims, right_dims;
  RVec coefficients;    // lambda, decreasing, sum = 1
  CMat left_basis;      // columns |i>_left in the computational basis
  CMat right_basis;     // columns |i>_right

  /// Number of coefficients with sqrt(lambda) above rel_tol * largest.
  int rank(double rel_tol = 1e-10) const;

  /// sum_i sqrt(lambda_i) e^{i phases_i} |left_i>|right_i| as a state over
  /// the ORIGINAL label order. Empty phases means all zero. `terms` < 0 uses
  /// every stored term.
  PureState reconstruct(const std::vector<std::string>& original_labels,
                        const std::vector<int>& original_dims, const RVec& phases = RVec(),
                        int terms = -1) const;
};

/// Schmidt decomposition across (left | complement).
SchmidtDecomposition schmidt_decompose(const PureState& state, const SubsystemSet& left);

/// Schmidt decomposition for an explicit bipartition; throws if the two sets
/// do not partition the state's labels.
SchmidtDecomposition schmidt_decompose(const PureState& state, const SubsystemSet& left,
                                       const SubsystemSet& right);

}  // namespace qmarg
