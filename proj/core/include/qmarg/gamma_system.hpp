#pragma once

#include "qmarg/blocks.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

/// Real-packed linear system for the unknowns gamma_ij (i < j); gamma_ii = 0
/// and gamma_ji = conj(gamma_ij) are implicit. Column 2p holds Re(gamma) and
/// column 2p+1 holds Im(gamma) of pair p. For a full-rank decomposition of
/// local dimension d the system has (d^2-1)^2 rows and d^2(d^2-1) columns.
struct GammaLinearSystem {
  int d = 0;
  int r = 0;
  RVec lambdas;
  RMat matrix;

  int num_pairs() const { return r * (r - 1) / 2; }
  static int pair_index(int i, int j, int r);

  /// gamma for the phase vector (size r): (1 - e^{i(phi_i - phi_j)}) sqrt(l_i l_j).
  CVec gamma_from_phases(const RVec& phases) const;

  RVec pack(const CVec& gamma) const;
  CVec unpack(const RVec& x) const;
};

/// The (d^2-1)^2 real coordinates of a Hermitian matrix with vanishing
/// partial traces over both tensor factors, in the fixed row order used by
/// the assembled system. Applying this to the third-marginal difference of a
/// phase-rotated sibling reproduces matrix * pack(gamma) exactly.
RVec extract_row_coords(const CMat& m, int d);

GammaLinearSystem assemble_linear_system(const OperatorBlocks& blocks);

struct NullspaceBasis {
  RMat basis;  // orthonormal columns spanning the kernel
  int dim = 0;
  RVec singular_values;
};

/// Kernel of the system matrix at a relative SVD cutoff. A zero matrix has a
/// full kernel (dimension = column count).
NullspaceBasis solve_nullspace(const GammaLinearSystem& sys, double rel_tol = 1e-8);
NullspaceBasis nullspace_of(const RMat& m, double rel_tol = 1e-8);

}  // namespace qmarg
