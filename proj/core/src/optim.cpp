#include "qmarg/optim.hpp"

#include <cmath>

namespace qmarg {

BfgsResult minimize_bfgs(const ObjectiveFn& fg, RVec x0, const BfgsOptions& options,
                         const RetractionFn& retract) {
  const int n = static_cast<int>(x0.size());
  BfgsResult res;
  if (retract) retract(x0);
  RVec x = x0;
  RVec g(n);
  double f = fg(x, &g);

  RMat h_inv = RMat::Identity(n, n);
  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    const double gnorm = g.norm();
    if (gnorm <= options.grad_tol) {
      res.converged = true;
      break;
    }

    RVec dir = -(h_inv * g);
    double slope = dir.dot(g);
    if (!(slope < 0.0)) {
      h_inv = RMat::Identity(n, n);
      dir = -g;
      slope = -gnorm * gnorm;
    }

    // Backtracking Armijo line search.
    double step = 1.0;
    bool accepted = false;
    RVec x_new, g_new(n);
    double f_new = f;
    while (step > 1e-14) {
      x_new = x + step * dir;
      if (retract) retract(x_new);
      f_new = fg(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!h_inv.isIdentity(0.0)) {
        h_inv = RMat::Identity(n, n);  // retry with steepest descent next round
        continue;
      }
      break;  // stalled
    }

    f_new = fg(x_new, &g_new);
    const RVec s = x_new - x;
    const RVec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const RMat vy = RMat::Identity(n, n) - rho * s * y.transpose();
      h_inv = vy * h_inv * vy.transpose() + rho * s * s.transpose();
    }
    x = x_new;
    g = g_new;
    f = f_new;
  }

  res.x = x;
  res.value = f;
  res.grad_norm = g.norm();
  res.iters = iter;
  if (!res.converged) res.converged = res.grad_norm <= options.grad_tol;
  return res;
}

RVec numeric_gradient(const std::function<double(const RVec&)>& f, const RVec& x, double h) {
  RVec g(x.size());
  RVec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace qmarg
