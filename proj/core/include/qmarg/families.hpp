#pragma once

#include <array>
#include <string>
#include <vector>

#include "qmarg/types.hpp"

namespace qmarg {

/// |W4> = (|0001> + |0010> + |0100> + |1000>) / 2
PureState w4_state();
/// |D2^4>, the four-qubit Dicke state with two excitations.
PureState dicke2_state();
/// |D3^4> = bit-flip image of |W4>, three excitations.
PureState dicke3_state();

/// a|0000> + b|W4> + s e^{i phi} |1111>, normalized. These share every
/// two-body marginal for all phi at fixed (a, b, s).
PureState family_a(double a, double b, cplx s, double phi);

/// (1/2)|0000> + (1/sqrt2) e^{i phi} |D2^4> - (1/2) e^{2i phi} |1111>;
/// shares every two-body marginal for all phi.
PureState family_b(double phi);

struct FamilyCPair {
  PureState psi;        // a|0000> + r|D2^4> + s|1111>
  PureState phi_state;  // same with r -> r e^{i phi_r}, s -> s e^{i phi_s}
  bool feasible = false;
  double condition_residual = 0.0;  // |lhs - rhs| of the sharing condition
};

/// Builds the pair and evaluates the sharing condition
///   conj(r) s e^{i phi_s} = a r e^{i phi_r}(1 - e^{i phi_r}) + conj(r) s e^{i phi_r};
/// when it holds (within 1e-10) the two states share all two-body marginals.
FamilyCPair family_c(double a, cplx r, cplx s, double phi_r, double phi_s);

/// Applies the bit flip on every party; maps the D2-based families onto the
/// three-excitation Dicke picture and preserves shared-marginal relations.
PureState bit_flip_image(const PureState& state);

struct FamilyRow {
  std::string family;
  std::string parameters;
  double max_marginal_deviation;  // over all six two-body marginals and the grid
  double min_pairwise_fidelity;
};

/// Shared-marginal verification grid over the two-parameter families:
/// family A at the three stock parameter settings, family B, and family C
/// with a = 0. `grid_points` phases are used per family.
std::vector<FamilyRow> verify_families(int grid_points);

/// The stock family-A parameter settings used by verify_families.
std::vector<std::array<double, 3>> family_a_settings();

std::string family_rows_to_csv(const std::vector<FamilyRow>& rows);

}  // namespace qmarg
