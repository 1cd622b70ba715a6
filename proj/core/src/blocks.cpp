#include "qmarg/blocks.hpp"

#include <stdexcept>

#include <Eigen/SVD>

namespace qmarg {

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMat OperatorBlocks::O(int i, int j) const { return kron(Q(i, j), R(i, j)); }

namespace {

// Partial trace of the dyad |i><j| over one party of a two-party register in
// column vectors of a pair basis (first party slow). keep_second selects
// Tr over the first party.
CMat dyad_one_party_trace(const CVec& vi, const CVec& vj, int d, bool keep_second) {
  CMat out = CMat::Zero(d, d);
  if (keep_second) {
    // out[b,b'] = sum_a vi[a*d+b] conj(vj[a*d+b'])
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        for (int bp = 0; bp < d; ++bp) {
          out(b, bp) += vi[a * d + b] * std::conj(vj[a * d + bp]);
        }
      }
    }
  } else {
    // out[a,a'] = sum_b vi[a*d+b] conj(vj[a'*d+b])
    for (int a = 0; a < d; ++a) {
      for (int ap = 0; ap < d; ++ap) {
        for (int b = 0; b < d; ++b) {
          out(a, ap) += vi[a * d + b] * std::conj(vj[ap * d + b]);
        }
      }
    }
  }
  return out;
}

}  // namespace

OperatorBlocks build_operator_blocks(const SchmidtDecomposition& sd,
                                     const SubsystemSet& third_pair, int rank,
                                     double rank_rel) {
  if (sd.left_dims.size() != 2 || sd.right_dims.size() != 2) {
    throw std::invalid_argument("build_operator_blocks: each side must hold two parties");
  }
  const int d = sd.left_dims[0];
  if (sd.left_dims[1] != d || sd.right_dims[0] != d || sd.right_dims[1] != d) {
    throw std::invalid_argument("build_operator_blocks: all local dimensions must be equal");
  }
  if (third_pair.labels.size() != 2) {
    throw std::invalid_argument("build_operator_blocks: third marginal must name two parties");
  }

  auto side_index = [](const SubsystemSet& side, const std::string& label) -> int {
    for (std::size_t k = 0; k < side.labels.size(); ++k) {
      if (side.labels[k] == label) return static_cast<int>(k);
    }
    return -1;
  };
  int left_kept = -1, right_kept = -1;
  std::string left_keep_label, right_keep_label;
  for (const auto& label : third_pair.labels) {
    if (int k = side_index(sd.left, label); k >= 0) {
      if (left_kept >= 0) {
        throw std::invalid_argument(
            "unsupported configuration: third marginal lies on one Schmidt side");
      }
      left_kept = k;
      left_keep_label = label;
    } else if (int k2 = side_index(sd.right, label); k2 >= 0) {
      if (right_kept >= 0) {
        throw std::invalid_argument(
            "unsupported configuration: third marginal lies on one Schmidt side");
      }
      right_kept = k2;
      right_keep_label = label;
    } else {
      throw std::invalid_argument("unknown subsystem label: " + label);
    }
  }
  if (left_kept < 0 || right_kept < 0) {
    throw std::invalid_argument(
        "unsupported configuration: third marginal must span both Schmidt sides");
  }

  OperatorBlocks out;
  out.d = d;
  out.r = rank >= 0 ? rank : sd.rank(rank_rel);
  out.lambdas = sd.coefficients.head(out.r);
  out.left_keep = left_keep_label;
  out.right_keep = right_keep_label;
  out.q.resize(static_cast<std::size_t>(out.r) * out.r);
  out.rr.resize(static_cast<std::size_t>(out.r) * out.r);

  const bool left_keep_second = left_kept == 1;
  const bool right_keep_second = right_kept == 1;
  for (int i = 0; i < out.r; ++i) {
    for (int j = 0; j < out.r; ++j) {
      out.q[static_cast<std::size_t>(i) * out.r + j] = dyad_one_party_trace(
          sd.left_basis.col(i), sd.left_basis.col(j), d, left_keep_second);
      out.rr[static_cast<std::size_t>(i) * out.r + j] = dyad_one_party_trace(
          sd.right_basis.col(i), sd.right_basis.col(j), d, right_keep_second);
    }
  }
  return out;
}

int operator_span_dimension(const OperatorBlocks& blocks, double rel_tol) {
  const int r = blocks.r;
  const Eigen::Index n = static_cast<Eigen::Index>(blocks.d) * blocks.d;
  CMat stacked(static_cast<Eigen::Index>(r) * r, n * n);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const CMat o = blocks.O(i, j);
      stacked.row(static_cast<Eigen::Index>(i) * r + j) =
          Eigen::Map<const CVec>(o.data(), o.size()).transpose();
    }
  }
  Eigen::JacobiSVD<CMat> svd(stacked);
  const RVec& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > rel_tol * sv[0]) ++rank;
  }
  return rank;
}

}  // namespace qmarg
