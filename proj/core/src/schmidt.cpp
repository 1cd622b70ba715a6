#include "qmarg/schmidt.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/SVD>

namespace qmarg {

namespace {

// Reshapes the amplitude vector into the (left x right) coefficient matrix,
// both sub-registers read in parent order with their last party fastest.
CMat bipartition_matrix(const PureState& state, const std::vector<int>& left_pos,
                        const std::vector<int>& right_pos) {
  const auto strides = index_strides(state.dims);
  Eigen::Index dl = 1, dr = 1;
  for (int p : left_pos) dl *= state.dims[p];
  for (int p : right_pos) dr *= state.dims[p];

  auto offsets = [&](const std::vector<int>& pos, Eigen::Index total) {
    std::vector<Eigen::Index> off(static_cast<std::size_t>(total), 0);
    Eigen::Index repeat = total;
    for (int p : pos) {
      const int d = state.dims[p];
      repeat /= d;
      for (Eigen::Index m = 0; m < total; ++m) off[m] += ((m / repeat) % d) * strides[p];
    }
    return off;
  };
  const auto lo = offsets(left_pos, dl);
  const auto ro = offsets(right_pos, dr);

  CMat m(dl, dr);
  for (Eigen::Index l = 0; l < dl; ++l) {
    for (Eigen::Index r = 0; r < dr; ++r) m(l, r) = state.amplitudes[lo[l] + ro[r]];
  }
  return m;
}

}  // namespace

int SchmidtDecomposition::rank(double rel_tol) const {
  if (coefficients.size() == 0) return 0;
  const double smax = std::sqrt(coefficients[0]);
  if (smax == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
    if (std::sqrt(coefficients[i]) > rel_tol * smax) ++r;
  }
  return r;
}

PureState SchmidtDecomposition::reconstruct(const std::vector<std::string>& original_labels,
                                            const std::vector<int>& original_dims,
                                            const RVec& phases, int terms) const {
  const int n_terms = terms < 0 ? static_cast<int>(coefficients.size()) : terms;
  const Eigen::Index dl = left_basis.rows();
  const Eigen::Index dr = right_basis.rows();

  CMat m = CMat::Zero(dl, dr);
  for (int k = 0; k < n_terms; ++k) {
    const cplx phase =
        phases.size() > k ? std::polar(1.0, phases[k]) : cplx(1.0, 0.0);
    m += phase * std::sqrt(coefficients[k]) * left_basis.col(k) * right_basis.col(k).transpose();
  }

  // Scatter back into the original index order.
  const auto strides = index_strides(original_dims);
  auto offsets = [&](const std::vector<int>& pos, Eigen::Index total) {
    std::vector<Eigen::Index> off(static_cast<std::size_t>(total), 0);
    Eigen::Index repeat = total;
    for (int p : pos) {
      const int d = original_dims[p];
      repeat /= d;
      for (Eigen::Index q = 0; q < total; ++q) off[q] += ((q / repeat) % d) * strides[p];
    }
    return off;
  };
  const auto lo = offsets(left.positions, dl);
  const auto ro = offsets(right.positions, dr);

  CVec amps(dims_product(original_dims));
  for (Eigen::Index l = 0; l < dl; ++l) {
    for (Eigen::Index r = 0; r < dr; ++r) amps[lo[l] + ro[r]] = m(l, r);
  }
  return PureState::normalized(original_labels, original_dims, std::move(amps));
}

SchmidtDecomposition schmidt_decompose(const PureState& state, const SubsystemSet& left) {
  const auto right_pos = complement_positions(left, state.num_parties());
  std::vector<std::string> right_labels;
  for (int p : right_pos) right_labels.push_back(state.labels[p]);
  return schmidt_decompose(state, left, make_subsystem_set(state.labels, right_labels));
}

SchmidtDecomposition schmidt_decompose(const PureState& state, const SubsystemSet& left,
                                       const SubsystemSet& right) {
  if (left.positions.size() + right.positions.size() !=
      static_cast<std::size_t>(state.num_parties())) {
    throw std::invalid_argument("schmidt_decompose: bipartition must cover every party");
  }
  for (int p : left.positions) {
    if (std::find(right.positions.begin(), right.positions.end(), p) != right.positions.end()) {
      throw std::invalid_argument("schmidt_decompose: bipartition sides overlap");
    }
  }

  const CMat m = bipartition_matrix(state, left.positions, right.positions);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SchmidtDecomposition out;
  out.left = left;
  out.right = right;
  for (int p : left.positions) out.left_dims.push_back(state.dims[p]);
  for (int p : right.positions) out.right_dims.push_back(state.dims[p]);

  const RVec& sv = svd.singularValues();
  out.coefficients = sv.array().square();
  out.left_basis = svd.matrixU();
  // m = U S V^H, so |psi> = sum_k s_k u_k (x) conj(v_k).
  out.right_basis = svd.matrixV().conjugate();

  // Phase convention: first entry of largest modulus in each left column is
  // made real non-negative; the right column absorbs the opposite phase.
  for (Eigen::Index k = 0; k < out.left_basis.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.left_basis.rows(); ++i) {
      const double mag = std::abs(out.left_basis(i, k));
      if (mag > best + 1e-15) {
        best = mag;
        arg = i;
      }
    }
    const cplx pivot = out.left_basis(arg, k);
    if (std::abs(pivot) > 0.0) {
      const cplx phase = pivot / std::abs(pivot);
      out.left_basis.col(k) *= std::conj(phase);
      out.right_basis.col(k) *= phase;
    }
  }
  return out;
}

}  // namespace qmarg
