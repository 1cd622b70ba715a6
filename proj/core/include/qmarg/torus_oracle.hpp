#pragma once

#include "qmarg/blocks.hpp"
#include "qmarg/sampling.hpp"
#include "qmarg/tolerances.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

struct TorusMinimizer {
  RVec phases;      // wrapped to (-pi, pi], gauge phases[0] = 0
  double residual;  // marginal distance at the minimizer
};

struct TorusOracleResult {
  RVec phases;              // selected minimizer
  double residual = 0.0;
  double max_phase_deviation = 0.0;  // max |phases_k| of the selected minimizer
  std::vector<TorusMinimizer> minimizers;  // distinct local minima found
  int restarts = 0;

  bool all_phases_equal(double tol) const { return max_phase_deviation <= tol; }
};

/// Multi-start quasi-Newton minimization of the third-marginal distance
/// between the phase-rotated Schmidt expansion and the original state, over
/// the phase torus with the global phase gauge-fixed to phases[0] = 0.
/// Among minimizers reaching the marginal-match tolerance the one of largest
/// phase deviation is reported (it is the interesting one); otherwise the
/// lowest-residual minimizer.
TorusOracleResult torus_oracle(const PureState& state, const std::vector<SubsystemSet>& config,
                               int grid_restarts, const RandomSource& rs,
                               const Tolerances& tol = {});

/// Same search on pre-built operator blocks (used inside certify). A
/// non-empty `target_phases` (length r) matches against the sibling at those
/// phases instead of the state itself.
TorusOracleResult torus_oracle_on_blocks(const OperatorBlocks& blocks, int grid_restarts,
                                         const RandomSource& rs, const Tolerances& tol = {},
                                         const RVec& target_phases = RVec());

/// Wraps an angle to (-pi, pi].
double wrap_angle(double phi);

}  // namespace qmarg
