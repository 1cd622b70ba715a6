#pragma once

#include <functional>

#include "qmarg/types.hpp"

namespace qmarg {

struct BfgsOptions {
  int max_iters = 500;
  double grad_tol = 1e-10;  // 2-norm of the (projected) gradient
};

struct BfgsResult {
  RVec x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
};

/// Objective callback: returns f(x) and, when grad != nullptr, writes the
/// gradient. For constrained problems the callback should return the
/// Riemannian (projected) gradient and `retract` should map an ambient point
/// back to the manifold; BFGS curvature pairs are built from the projected
/// gradients.
using ObjectiveFn = std::function<double(const RVec&, RVec*)>;
using RetractionFn = std::function<void(RVec&)>;

BfgsResult minimize_bfgs(const ObjectiveFn& fg, RVec x0, const BfgsOptions& options = {},
                         const RetractionFn& retract = nullptr);

/// Central-difference gradient for objectives without an analytic one.
RVec numeric_gradient(const std::function<double(const RVec&)>& f, const RVec& x,
                      double h = 1e-6);

}  // namespace qmarg
