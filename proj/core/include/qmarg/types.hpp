#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmarg/tolerances.hpp"

namespace qmarg {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Pure state over labeled qudit subsystems. Amplitudes are stored in
/// lexicographic order over the subsystem basis indices with the LAST
/// subsystem varying fastest, i.e. for dims (d0, d1, ..., dn-1) the basis
/// ket |i0 i1 ... in-1> sits at offset ((i0*d1 + i1)*d2 + i2)*...
struct PureState {
  std::vector<std::string> labels;
  std::vector<int> dims;
  CVec amplitudes;

  PureState() = default;
  /// Validates shapes and unit norm (norm tolerance 1e-12).
  PureState(std::vector<std::string> labels_, std::vector<int> dims_, CVec amplitudes_);

  /// Same as the constructor but rescales the amplitudes to unit norm first.
  static PureState normalized(std::vector<std::string> labels_, std::vector<int> dims_,
                              CVec amplitudes_);

  int num_parties() const { return static_cast<int>(dims.size()); }
  Eigen::Index total_dim() const { return amplitudes.size(); }
  /// Position of a label; throws std::invalid_argument for unknown labels.
  int position_of(const std::string& label) const;
};

/// Density operator over labeled qudit subsystems, same index convention as
/// PureState along both matrix dimensions.
struct DensityOperator {
  std::vector<std::string> labels;
  std::vector<int> dims;
  CMat matrix;

  /// Checks Hermiticity, unit trace and eigenvalue floor; throws on violation.
  void validate(const Tolerances& tol = {}) const;
  Eigen::Index total_dim() const { return matrix.rows(); }
};

/// A subset of a state's parties, canonicalized to the parent label order.
/// The complement is always derived from the parent, never stored.
struct SubsystemSet {
  std::vector<std::string> labels;  // in parent order
  std::vector<int> positions;       // ascending positions within the parent

  bool operator==(const SubsystemSet& other) const { return labels == other.labels; }
  std::string str() const;  // concatenated labels, e.g. "BD"
};

/// Builds a SubsystemSet from the given labels; validates that the subset is
/// non-empty, duplicate-free and contained in `parent_labels`.
SubsystemSet make_subsystem_set(const std::vector<std::string>& parent_labels,
                                const std::vector<std::string>& subset);

/// Complement positions (ascending) of `set` within a parent with n parties.
std::vector<int> complement_positions(const SubsystemSet& set, int num_parties);

/// Named marginals of one state.
struct MarginalSet {
  std::vector<SubsystemSet> sets;
  std::vector<DensityOperator> marginals;

  std::size_t size() const { return marginals.size(); }
};

/// Row strides for the "last subsystem fastest" convention.
std::vector<Eigen::Index> index_strides(const std::vector<int>& dims);

/// Product of dims (total Hilbert-space dimension).
Eigen::Index dims_product(const std::vector<int>& dims);

/// Default party names: A, B, C, D for n <= 4, then E1, E2, ... as in
/// five-or-more particle setups.
std::vector<std::string> default_labels(int num_parties);

/// Splits a compact config token such as "BD" or "ABE1" into labels of the
/// given state (greedy longest match). Throws on unparseable tokens.
std::vector<std::string> split_label_token(const std::vector<std::string>& parent_labels,
                                           const std::string& token);

/// Parses "AB,CD,BD" into SubsystemSets of `state`.
std::vector<SubsystemSet> parse_config(const PureState& state, const std::string& config);

}  // namespace qmarg
