#include "qmarg/torus_oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qmarg/optim.hpp"
#include "qmarg/schmidt.hpp"

namespace qmarg {

double wrap_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  phi = std::fmod(phi, two_pi);
  if (phi > std::numbers::pi) phi -= two_pi;
  if (phi <= -std::numbers::pi) phi += two_pi;
  return phi;
}

namespace {

// The third-marginal difference of a phase-rotated sibling is
//   Delta(phi) = sum_{i != j} (e^{i(phi_i - phi_j)} - 1) T_ij,
// with T_ij = sqrt(l_i l_j) O_ij and T_ji = T_ij^dag. Precomputing the Gram
// matrix of the T's makes one objective evaluation O(r^4) scalars instead of
// O(r^2 d^4).
struct TorusObjective {
  int r;
  std::vector<std::pair<int, int>> ordered;  // all (i, j), i != j
  CMat gram;                                 // <T_p, T_q> Frobenius

  explicit TorusObjective(const OperatorBlocks& blocks) : r(blocks.r) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        if (i != j) ordered.emplace_back(i, j);
      }
    }
    std::vector<CMat> t;
    t.reserve(ordered.size());
    for (auto [i, j] : ordered) {
      t.push_back(std::sqrt(blocks.lambdas[i] * blocks.lambdas[j]) * blocks.O(i, j));
    }
    const int n = static_cast<int>(t.size());
    gram.resize(n, n);
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q <= p; ++q) {
        const cplx ip = (t[p].adjoint() * t[q]).trace();
        gram(p, q) = ip;
        gram(q, p) = std::conj(ip);
      }
    }
  }

  RVec target = RVec();  // non-empty: match the sibling at these phases instead

  // phases: full length r with phases[0] fixed to 0 by the caller.
  CVec coeffs(const RVec& phases) const {
    CVec c(ordered.size());
    for (std::size_t p = 0; p < ordered.size(); ++p) {
      const auto [i, j] = ordered[p];
      const cplx ref = target.size() == r
                           ? std::polar(1.0, target[i] - target[j])
                           : cplx(1.0, 0.0);
      c[static_cast<Eigen::Index>(p)] = std::polar(1.0, phases[i] - phases[j]) - ref;
    }
    return c;
  }

  // f = c^dag G c; gradient w.r.t. the free phases (indices 1..r-1).
  double eval(const RVec& free_phases, RVec* grad) const {
    RVec phases(r);
    phases[0] = 0.0;
    for (int k = 1; k < r; ++k) phases[k] = free_phases[k - 1];
    const CVec c = coeffs(phases);
    const CVec gc = gram * c;
    const double f = std::max(0.0, c.dot(gc).real());  // c.dot conjugates c
    if (grad) {
      grad->setZero(r - 1);
      for (std::size_t p = 0; p < ordered.size(); ++p) {
        const auto [i, j] = ordered[p];
        // dc_p/dphi_k = i (delta_ik - delta_jk) e^{i(phi_i - phi_j)}
        const cplx e = std::polar(1.0, phases[i] - phases[j]);
        const cplx base = 2.0 * std::conj(gc[static_cast<Eigen::Index>(p)]) * cplx(0.0, 1.0) * e;
        if (i > 0) (*grad)[i - 1] += base.real();
        if (j > 0) (*grad)[j - 1] -= base.real();
      }
    }
    return f;
  }
};

}  // namespace

TorusOracleResult torus_oracle_on_blocks(const OperatorBlocks& blocks, int grid_restarts,
                                         const RandomSource& rs, const Tolerances& tol,
                                         const RVec& target_phases) {
  TorusOracleResult out;
  out.restarts = grid_restarts;
  const int r = blocks.r;
  if (r < 2) {
    out.phases = RVec::Zero(std::max(r, 1));
    out.residual = 0.0;
    out.minimizers.push_back({out.phases, 0.0});
    return out;
  }

  TorusObjective objective(blocks);
  objective.target = target_phases;
  auto fg = [&](const RVec& x, RVec* g) { return objective.eval(x, g); };

  auto eng = rs.engine();
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);

  BfgsOptions opts;
  opts.max_iters = 300;
  opts.grad_tol = tol.newton_tol;

  for (int trial = 0; trial < std::max(grid_restarts, 1); ++trial) {
    RVec x0 = RVec::Zero(r - 1);
    if (trial > 0) {
      for (int k = 0; k < r - 1; ++k) x0[k] = angle(eng);
    }
    const BfgsResult res = minimize_bfgs(fg, x0, opts);
    if (!res.converged && res.value > tol.marginal_match * tol.marginal_match) continue;

    RVec phases(r);
    phases[0] = 0.0;
    for (int k = 1; k < r; ++k) phases[k] = wrap_angle(res.x[k - 1]);
    const double residual = std::sqrt(std::max(0.0, res.value));

    bool duplicate = false;
    for (const auto& m : out.minimizers) {
      double dist = 0.0;
      for (int k = 0; k < r; ++k) {
        dist = std::max(dist, std::abs(wrap_angle(m.phases[k] - phases[k])));
      }
      if (dist <= tol.dedup) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.minimizers.push_back({phases, residual});
  }

  // Selection: the most nontrivial minimizer among those matching the
  // marginal, otherwise the best residual.
  int selected = -1;
  double best_dev = -1.0;
  for (std::size_t k = 0; k < out.minimizers.size(); ++k) {
    if (out.minimizers[k].residual <= tol.marginal_match) {
      const double dev = out.minimizers[k].phases.cwiseAbs().maxCoeff();
      if (dev > best_dev) {
        best_dev = dev;
        selected = static_cast<int>(k);
      }
    }
  }
  if (selected < 0) {
    double best_res = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < out.minimizers.size(); ++k) {
      if (out.minimizers[k].residual < best_res) {
        best_res = out.minimizers[k].residual;
        selected = static_cast<int>(k);
      }
    }
  }
  if (selected >= 0) {
    out.phases = out.minimizers[selected].phases;
    out.residual = out.minimizers[selected].residual;
    out.max_phase_deviation = out.phases.cwiseAbs().maxCoeff();
  } else {
    out.phases = RVec::Zero(r);
    out.residual = std::numeric_limits<double>::infinity();
    out.max_phase_deviation = 0.0;
  }
  return out;
}

TorusOracleResult torus_oracle(const PureState& state, const std::vector<SubsystemSet>& config,
                               int grid_restarts, const RandomSource& rs,
                               const Tolerances& tol) {
  // Identify the two disjoint pair marginals and the third one.
  int li = -1, ri = -1, ti = -1;
  for (std::size_t a = 0; a < config.size() && li < 0; ++a) {
    for (std::size_t b = 0; b < config.size(); ++b) {
      if (a == b) continue;
      std::vector<int> joint = config[a].positions;
      joint.insert(joint.end(), config[b].positions.begin(), config[b].positions.end());
      std::sort(joint.begin(), joint.end());
      if (joint == std::vector<int>{0, 1, 2, 3}) {
        li = static_cast<int>(std::min(a, b));
        ri = static_cast<int>(std::max(a, b));
        break;
      }
    }
  }
  if (li < 0 || config.size() != 3) {
    throw std::invalid_argument(
        "torus_oracle: config must hold two disjoint pairs covering all parties plus a third");
  }
  for (int k = 0; k < 3; ++k) {
    if (k != li && k != ri) ti = k;
  }

  const SchmidtDecomposition sd = schmidt_decompose(state, config[li], config[ri]);
  const OperatorBlocks blocks = build_operator_blocks(sd, config[ti], sd.rank(tol.rank_rel));
  return torus_oracle_on_blocks(blocks, grid_restarts, rs, tol);
}

}  // namespace qmarg
