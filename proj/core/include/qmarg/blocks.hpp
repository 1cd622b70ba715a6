#pragma once

#include "qmarg/schmidt.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

/// One-party traces of the Schmidt dyads |i><j| on both sides of an AB|CD
/// style bipartition:
///   Q_ij = Tr_{left \ keep}(|i><j|_left),  R_ij = Tr_{right \ keep}(|i><j|_right)
/// and the third-marginal operators O_ij = Q_ij (x) R_ij acting on
/// (left_keep, right_keep). Only the first `r` Schmidt terms participate.
struct OperatorBlocks {
  int d = 0;  // common local dimension
  int r = 0;  // number of Schmidt terms
  RVec lambdas;
  std::string left_keep, right_keep;
  std::vector<CMat> q;  // r*r entries, index i*r + j
  std::vector<CMat> rr;

  const CMat& Q(int i, int j) const { return q[static_cast<std::size_t>(i) * r + j]; }
  const CMat& R(int i, int j) const { return rr[static_cast<std::size_t>(i) * r + j]; }
  CMat O(int i, int j) const;  // kron(Q_ij, R_ij)
};

/// Builds the blocks for the marginal named by `third_pair`, which must take
/// exactly one party from each side of the decomposition. `rank` < 0 keeps
/// every term whose singular value clears the relative cutoff.
OperatorBlocks build_operator_blocks(const SchmidtDecomposition& sd,
                                     const SubsystemSet& third_pair, int rank = -1,
                                     double rank_rel = 1e-10);

/// Dimension of the complex span of the r^2 operators O_ij at a relative
/// SVD cutoff.
int operator_span_dimension(const OperatorBlocks& blocks, double rel_tol = 1e-8);

/// Kronecker product helper (left factor indexes the slower axis).
CMat kron(const CMat& a, const CMat& b);

}  // namespace qmarg
