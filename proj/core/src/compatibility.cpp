#include "qmarg/compatibility.hpp"

#include <cmath>

#include <Eigen/QR>

namespace qmarg {

namespace {

// F over the selected pairs (0, j), j = 1..r-1, and its Jacobian.
void evaluate(const CompatibilitySystem& sys, const RVec& x, RVec* f, RMat* jac) {
  const int m = sys.unknowns();
  const int neq = sys.r - 1;
  if (f) f->resize(neq);
  if (jac) jac->resize(neq, m);
  for (int j = 1; j < sys.r; ++j) {
    const int p = GammaLinearSystem::pair_index(0, j, sys.r);
    cplx w = 0.0;
    for (int a = 0; a < m; ++a) w += x[a] * sys.v[a][p];
    const double scale = 2.0 * std::sqrt(sys.lambdas[0] * sys.lambdas[j]);
    if (f) (*f)[j - 1] = std::norm(w) - scale * w.real();
    if (jac) {
      for (int a = 0; a < m; ++a) {
        const cplx va = sys.v[a][p];
        (*jac)(j - 1, a) = 2.0 * (std::conj(w) * va).real() - scale * va.real();
      }
    }
  }
}

}  // namespace

int CompatibilityOutcome::full_solutions() const {
  int n = 0;
  for (const auto& sol : solutions) {
    if (sol.residual_all_pairs <= 1e-10) ++n;
  }
  return n;
}

double CompatibilitySystem::residual(const RVec& x, bool all_pairs) const {
  const int m = unknowns();
  double worst = 0.0;
  const int i_max = all_pairs ? r : 1;
  for (int i = 0; i < i_max; ++i) {
    for (int j = i + 1; j < r; ++j) {
      const int p = GammaLinearSystem::pair_index(i, j, r);
      cplx w = 0.0;
      for (int a = 0; a < m; ++a) w += x[a] * v[a][p];
      const double f = std::norm(w) - 2.0 * std::sqrt(lambdas[i] * lambdas[j]) * w.real();
      worst = std::max(worst, std::abs(f));
    }
  }
  return worst;
}

CompatibilitySystem make_compatibility_system(const NullspaceBasis& basis, const RVec& lambdas,
                                              int r) {
  CompatibilitySystem sys;
  sys.r = r;
  sys.lambdas = lambdas;
  const int npairs = r * (r - 1) / 2;
  for (int a = 0; a < basis.dim; ++a) {
    CVec va(npairs);
    for (int p = 0; p < npairs; ++p) {
      va[p] = cplx(basis.basis(2 * p, a), basis.basis(2 * p + 1, a));
    }
    sys.v.push_back(std::move(va));
  }
  return sys;
}

CompatibilityOutcome solve_compatibility(const NullspaceBasis& basis, const RVec& lambdas,
                                         int restarts, const RandomSource& rs,
                                         const Tolerances& tol) {
  const int r = static_cast<int>(lambdas.size());
  const CompatibilitySystem sys = make_compatibility_system(basis, lambdas, r);
  const int m = sys.unknowns();

  CompatibilityOutcome out;
  out.restarts = restarts;
  if (m == 0 || r < 2) return out;

  auto eng = rs.engine();
  std::uniform_real_distribution<double> box(-2.0, 2.0);

  for (int trial = 0; trial < restarts; ++trial) {
    RVec x(m);
    for (int a = 0; a < m; ++a) x[a] = box(eng);

    RVec f;
    RMat jac;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
      evaluate(sys, x, &f, &jac);
      if (f.lpNorm<Eigen::Infinity>() <= tol.newton_tol) {
        converged = true;
        break;
      }
      const RVec step = jac.colPivHouseholderQr().solve(-f);
      if (!step.allFinite()) break;
      // Backtrack on ||F||^2.
      const double f0 = f.squaredNorm();
      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-12) {
        const RVec x_try = x + alpha * step;
        RVec f_try;
        evaluate(sys, x_try, &f_try, nullptr);
        if (f_try.squaredNorm() <= (1.0 - 1e-4 * alpha) * f0) {
          x = x_try;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;  // stalled at a non-root stationary point
    }
    if (!converged) {
      evaluate(sys, x, &f, nullptr);
      converged = f.lpNorm<Eigen::Infinity>() <= tol.newton_tol;
    }
    if (!converged) {
      ++out.failed_restarts;
      continue;
    }

    const double res_sel = sys.residual(x, false);
    if (res_sel > tol.newton_residual) {
      ++out.failed_restarts;
      continue;
    }
    bool duplicate = false;
    for (const auto& sol : out.solutions) {
      if ((sol.x - x).norm() <= tol.dedup) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    CompatibilitySolution sol;
    sol.x = x;
    sol.residual_selected = res_sel;
    sol.residual_all_pairs = sys.residual(x, true);
    out.solutions.push_back(std::move(sol));
  }

  // Roots of the selected (i = 1) equations that fail the full-pair residual
  // are spurious for the phase ansatz; only validated roots count against
  // uniqueness.
  for (const auto& sol : out.solutions) {
    const double n = sol.x.norm();
    if (n > tol.trivial_norm && sol.residual_all_pairs <= tol.newton_residual) {
      out.max_nontrivial_norm = std::max(out.max_nontrivial_norm, n);
    }
  }
  return out;
}

}  // namespace qmarg
