#pragma once

#include <string>

#include "qmarg/types.hpp"

namespace qmarg {

/// JSON wire format for states:
///   {"labels":["A","B"],"dims":[2,2],"re":[...],"im":[...]}
/// with the amplitude index convention of PureState.
std::string state_to_json(const PureState& state);

/// Parses the wire format. Inputs whose norm deviates from 1 by more than
/// 1e-8 are rejected unless `renormalize` is set.
PureState state_from_json(const std::string& text, bool renormalize = false);

void save_state(const PureState& state, const std::string& path);
PureState load_state(const std::string& path, bool renormalize = false);

/// Density operators are emitted with flattened row-major re/im arrays:
///   {"labels":[...],"dims":[...],"re":[...],"im":[...]}
std::string density_to_json(const DensityOperator& rho);

}  // namespace qmarg
