#include "qmarg/gamma_system.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace qmarg {

int GammaLinearSystem::pair_index(int i, int j, int r) {
  return (i * (2 * r - i - 1)) / 2 + (j - i - 1);
}

CVec GammaLinearSystem::gamma_from_phases(const RVec& phases) const {
  if (phases.size() != r) {
    throw std::invalid_argument("gamma_from_phases: need one phase per Schmidt term");
  }
  CVec g(num_pairs());
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      const cplx rot = std::polar(1.0, phases[i] - phases[j]);
      g[pair_index(i, j, r)] = (cplx(1.0, 0.0) - rot) * std::sqrt(lambdas[i] * lambdas[j]);
    }
  }
  return g;
}

RVec GammaLinearSystem::pack(const CVec& gamma) const {
  RVec x(2 * gamma.size());
  for (Eigen::Index p = 0; p < gamma.size(); ++p) {
    x[2 * p] = gamma[p].real();
    x[2 * p + 1] = gamma[p].imag();
  }
  return x;
}

CVec GammaLinearSystem::unpack(const RVec& x) const {
  CVec g(x.size() / 2);
  for (Eigen::Index p = 0; p < g.size(); ++p) g[p] = cplx(x[2 * p], x[2 * p + 1]);
  return g;
}

RVec extract_row_coords(const CMat& m, int d) {
  const int rows = (d * d - 1) * (d * d - 1);
  RVec out(rows);
  int r = 0;
  // Diagonal blocks b = 0..d-2: the block is Hermitian and the missing block
  // and entry follow from tracelessness over each factor.
  for (int b = 0; b < d - 1; ++b) {
    for (int k = 0; k < d - 1; ++k) {
      out[r++] = m(b * d + k, b * d + k).real();
    }
    for (int k = 0; k < d; ++k) {
      for (int l = k + 1; l < d; ++l) {
        out[r++] = m(b * d + k, b * d + l).real();
        out[r++] = m(b * d + k, b * d + l).imag();
      }
    }
  }
  // Off-diagonal blocks b < b': all entries except (d-1, d-1).
  for (int b = 0; b < d; ++b) {
    for (int bp = b + 1; bp < d; ++bp) {
      for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
          if (k == d - 1 && l == d - 1) continue;
          out[r++] = m(b * d + k, bp * d + l).real();
          out[r++] = m(b * d + k, bp * d + l).imag();
        }
      }
    }
  }
  return out;
}

GammaLinearSystem assemble_linear_system(const OperatorBlocks& blocks) {
  GammaLinearSystem sys;
  sys.d = blocks.d;
  sys.r = blocks.r;
  sys.lambdas = blocks.lambdas;

  const int rows = (sys.d * sys.d - 1) * (sys.d * sys.d - 1);
  const int cols = sys.r * (sys.r - 1);
  sys.matrix.resize(rows, std::max(cols, 0));
  for (int i = 0; i < sys.r; ++i) {
    for (int j = i + 1; j < sys.r; ++j) {
      const CMat o = blocks.O(i, j);
      const CMat oh = o.adjoint();
      const int p = GammaLinearSystem::pair_index(i, j, sys.r);
      sys.matrix.col(2 * p) = extract_row_coords(o + oh, sys.d);
      sys.matrix.col(2 * p + 1) = extract_row_coords(cplx(0.0, 1.0) * (o - oh), sys.d);
    }
  }
  return sys;
}

NullspaceBasis nullspace_of(const RMat& m, double rel_tol) {
  NullspaceBasis out;
  if (m.cols() == 0) {
    out.dim = 0;
    return out;
  }
  Eigen::JacobiSVD<RMat> svd(m, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
  int rank = 0;
  if (smax > 0.0) {
    for (Eigen::Index k = 0; k < out.singular_values.size(); ++k) {
      if (out.singular_values[k] > rel_tol * smax) ++rank;
    }
  }
  out.dim = static_cast<int>(m.cols()) - rank;
  out.basis = svd.matrixV().rightCols(out.dim);
  return out;
}

NullspaceBasis solve_nullspace(const GammaLinearSystem& sys, double rel_tol) {
  return nullspace_of(sys.matrix, rel_tol);
}

}  // namespace qmarg
