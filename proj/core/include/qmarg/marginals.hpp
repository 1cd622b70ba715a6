#pragma once

#include <map>

#include "qmarg/types.hpp"

namespace qmarg {

/// Reduced density operator of the kept parties, Tr over the complement.
DensityOperator partial_trace(const PureState& state, const SubsystemSet& keep);
DensityOperator partial_trace(const DensityOperator& rho, const SubsystemSet& keep);

/// One marginal per requested subsystem set.
MarginalSet marginal_set(const PureState& state, const std::vector<SubsystemSet>& config);

/// All two-body subsystem sets of a state, in lexicographic position order.
std::vector<SubsystemSet> all_pair_sets(const PureState& state);

/// sqrt of the summed squared Hilbert-Schmidt distances between matching
/// marginals. Throws if the configs differ.
double marginal_distance(const MarginalSet& m1, const MarginalSet& m2);

/// |<s1|s2>|; 1 iff the states agree up to a global phase.
double fidelity(const PureState& s1, const PureState& s2);

/// Applies one unitary per listed label (identity on the others). Inputs are
/// checked for unitarity within 1e-10.
PureState apply_local_unitaries(const PureState& state,
                                const std::map<std::string, CMat>& unitaries);

/// Offsets of the basis indices of the sub-register `positions` within the
/// full register: offsets[m] = sum_k digit_k(m) * stride[positions[k]].
std::vector<Eigen::Index> subsystem_offsets(const std::vector<int>& dims,
                                            const std::vector<int>& positions);

/// Tr over the complement of |a><b| (same register), kept parties `keep`.
CMat dyad_partial_trace(const PureState& a, const PureState& b, const SubsystemSet& keep);

/// (op (x) identity) |amps> with `op` acting on the listed positions.
CVec apply_operator_on(const CVec& amps, const std::vector<int>& dims,
                       const std::vector<int>& positions, const CMat& op);

}  // namespace qmarg
