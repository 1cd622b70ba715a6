#include "qmarg/types.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qmarg {

PureState::PureState(std::vector<std::string> labels_, std::vector<int> dims_, CVec amplitudes_)
    : labels(std::move(labels_)), dims(std::move(dims_)), amplitudes(std::move(amplitudes_)) {
  if (labels.size() != dims.size()) {
    throw std::invalid_argument("PureState: labels and dims must have equal length");
  }
  if (labels.empty()) {
    throw std::invalid_argument("PureState: at least one subsystem required");
  }
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size()) {
    throw std::invalid_argument("PureState: duplicate subsystem labels");
  }
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("PureState: dimensions must be positive");
  }
  if (amplitudes.size() != dims_product(dims)) {
    throw std::invalid_argument("PureState: amplitude length does not match dims product");
  }
  const double n2 = amplitudes.squaredNorm();
  if (std::abs(n2 - 1.0) > 1e-12) {
    throw std::invalid_argument("PureState: squared norm deviates from 1 by more than 1e-12");
  }
}

PureState PureState::normalized(std::vector<std::string> labels_, std::vector<int> dims_,
                                CVec amplitudes_) {
  const double n = amplitudes_.norm();
  if (n == 0.0) throw std::invalid_argument("PureState: cannot normalize the zero vector");
  amplitudes_ /= n;
  return PureState(std::move(labels_), std::move(dims_), std::move(amplitudes_));
}

int PureState::position_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw std::invalid_argument("unknown subsystem label: " + label);
  }
  return static_cast<int>(it - labels.begin());
}

void DensityOperator::validate(const Tolerances& tol) const {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("DensityOperator: matrix must be square");
  }
  if (matrix.rows() != dims_product(dims)) {
    throw std::invalid_argument("DensityOperator: matrix side does not match dims product");
  }
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.hermiticity) {
    throw std::invalid_argument("DensityOperator: not Hermitian within tolerance");
  }
  if (std::abs(matrix.trace() - cplx(1.0, 0.0)) > tol.trace) {
    throw std::invalid_argument("DensityOperator: trace deviates from 1");
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (matrix + matrix.adjoint()),
                                         Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol.eig_floor) {
    throw std::invalid_argument("DensityOperator: negative eigenvalue below floor");
  }
}

std::string SubsystemSet::str() const {
  std::string out;
  for (const auto& l : labels) out += l;
  return out;
}

SubsystemSet make_subsystem_set(const std::vector<std::string>& parent_labels,
                                const std::vector<std::string>& subset) {
  if (subset.empty()) {
    throw std::invalid_argument("SubsystemSet: empty subset");
  }
  std::set<std::string> seen;
  std::vector<int> positions;
  for (const auto& l : subset) {
    if (!seen.insert(l).second) {
      throw std::invalid_argument("SubsystemSet: duplicate label " + l);
    }
    auto it = std::find(parent_labels.begin(), parent_labels.end(), l);
    if (it == parent_labels.end()) {
      throw std::invalid_argument("unknown subsystem label: " + l);
    }
    positions.push_back(static_cast<int>(it - parent_labels.begin()));
  }
  std::sort(positions.begin(), positions.end());
  SubsystemSet out;
  out.positions = positions;
  for (int p : positions) out.labels.push_back(parent_labels[p]);
  return out;
}

std::vector<int> complement_positions(const SubsystemSet& set, int num_parties) {
  std::vector<int> out;
  auto it = set.positions.begin();
  for (int p = 0; p < num_parties; ++p) {
    if (it != set.positions.end() && *it == p) {
      ++it;
    } else {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<Eigen::Index> index_strides(const std::vector<int>& dims) {
  std::vector<Eigen::Index> strides(dims.size());
  Eigen::Index acc = 1;
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    strides[k] = acc;
    acc *= dims[k];
  }
  return strides;
}

Eigen::Index dims_product(const std::vector<int>& dims) {
  Eigen::Index acc = 1;
  for (int d : dims) acc *= d;
  return acc;
}

std::vector<std::string> default_labels(int num_parties) {
  if (num_parties < 1) throw std::invalid_argument("default_labels: need at least one party");
  static const char* first[4] = {"A", "B", "C", "D"};
  std::vector<std::string> out;
  for (int k = 0; k < num_parties; ++k) {
    if (k < 4) {
      out.emplace_back(first[k]);
    } else {
      out.push_back("E" + std::to_string(k - 3));
    }
  }
  return out;
}

std::vector<std::string> split_label_token(const std::vector<std::string>& parent_labels,
                                           const std::string& token) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < token.size()) {
    std::size_t best = 0;
    for (const auto& l : parent_labels) {
      if (l.size() > best && token.compare(pos, l.size(), l) == 0) best = l.size();
    }
    if (best == 0) {
      throw std::invalid_argument("cannot parse subsystem token '" + token + "' at position " +
                                  std::to_string(pos));
    }
    out.push_back(token.substr(pos, best));
    pos += best;
  }
  return out;
}

std::vector<SubsystemSet> parse_config(const PureState& state, const std::string& config) {
  std::vector<SubsystemSet> out;
  std::stringstream ss(config);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    out.push_back(make_subsystem_set(state.labels, split_label_token(state.labels, token)));
  }
  if (out.empty()) throw std::invalid_argument("empty marginal config");
  return out;
}

}  // namespace qmarg
