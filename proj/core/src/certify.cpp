#include "qmarg/certify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "qmarg/marginals.hpp"
#include "qmarg/optim.hpp"

namespace qmarg {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kUnique: return "UNIQUE";
    case Verdict::kNotGeneric: return "NOT_GENERIC";
    case Verdict::kNonuniqueWitness: return "NONUNIQUE_WITNESS";
    case Verdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

namespace {

struct ConfigSplit {
  int left = -1, right = -1, third = -1;
};

ConfigSplit split_config(const std::vector<SubsystemSet>& config) {
  if (config.size() != 3) {
    throw std::invalid_argument("certify: config must list exactly three marginals");
  }
  for (const auto& s : config) {
    if (s.positions.size() != 2) {
      throw std::invalid_argument("certify: every config entry must be a two-body marginal");
    }
  }
  ConfigSplit out;
  for (int a = 0; a < 3 && out.left < 0; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      std::vector<int> joint = config[a].positions;
      joint.insert(joint.end(), config[b].positions.begin(), config[b].positions.end());
      std::sort(joint.begin(), joint.end());
      if (joint == std::vector<int>{0, 1, 2, 3}) {
        out.left = a;
        out.right = b;
        break;
      }
    }
  }
  if (out.left < 0) {
    throw std::invalid_argument(
        "unsupported configuration: certify needs two disjoint pairs covering all four parties");
  }
  out.third = 3 - out.left - out.right;
  return out;
}

// sum_{k,l} C(k,l) |u_k>|w_l> scattered back into the original label order.
PureState reconstruct_with_matrix(const SchmidtDecomposition& sd,
                                  const std::vector<std::string>& labels,
                                  const std::vector<int>& dims, const CMat& coeff) {
  const Eigen::Index dl = sd.left_basis.rows();
  const Eigen::Index dr = sd.right_basis.rows();
  CMat m = sd.left_basis.leftCols(coeff.rows()) * coeff *
           sd.right_basis.leftCols(coeff.cols()).transpose();

  const auto strides = index_strides(dims);
  auto offsets = [&](const std::vector<int>& pos, Eigen::Index total) {
    std::vector<Eigen::Index> off(static_cast<std::size_t>(total), 0);
    Eigen::Index repeat = total;
    for (int p : pos) {
      const int d = dims[p];
      repeat /= d;
      for (Eigen::Index q = 0; q < total; ++q) off[q] += ((q / repeat) % d) * strides[p];
    }
    return off;
  };
  const auto lo = offsets(sd.left.positions, dl);
  const auto ro = offsets(sd.right.positions, dr);
  CVec amps(dims_product(dims));
  for (Eigen::Index l = 0; l < dl; ++l) {
    for (Eigen::Index r = 0; r < dr; ++r) amps[lo[l] + ro[r]] = m(l, r);
  }
  return PureState::normalized(labels, dims, std::move(amps));
}

struct WitnessCandidate {
  PureState state;
  double marginal_distance;
  double fidelity;
};

// Groups the first r coefficients into clusters of near-equal values.
std::vector<std::pair<int, int>> degenerate_clusters(const RVec& lambdas, int r, double gap) {
  std::vector<std::pair<int, int>> clusters;  // [begin, end)
  int start = 0;
  for (int k = 1; k <= r; ++k) {
    if (k == r || lambdas[k - 1] - lambdas[k] > gap) {
      clusters.emplace_back(start, k);
      start = k;
    }
  }
  return clusters;
}

CMat hermitian_from_params(const RVec& theta, int m) {
  CMat h(m, m);
  int idx = 0;
  for (int k = 0; k < m; ++k) h(k, k) = theta[idx++];
  for (int k = 0; k < m; ++k) {
    for (int l = k + 1; l < m; ++l) {
      h(k, l) = cplx(theta[idx], theta[idx + 1]);
      h(l, k) = std::conj(h(k, l));
      idx += 2;
    }
  }
  return h;
}

CMat unitary_exp(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const CVec phases = (cplx(0.0, 1.0) * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Witness search over block-unitary mixing inside degenerate clusters; this
// is the correct completion of the phase ansatz when Schmidt coefficients
// coincide (the Schmidt bases are then fixed only up to a unitary on each
// degenerate eigenspace, not up to phases).
std::optional<WitnessCandidate> mixing_witness_search(
    const PureState& state, const std::vector<SubsystemSet>& config,
    const SchmidtDecomposition& sd, int r, int restarts, const RandomSource& rs,
    const Tolerances& tol) {
  const auto clusters = degenerate_clusters(sd.coefficients, r, tol.gap);
  bool any_block = false;
  for (auto [b, e] : clusters) any_block |= (e - b) > 1;
  if (!any_block) return std::nullopt;

  int dof = 0;
  for (auto [b, e] : clusters) dof += (e - b) * (e - b);

  const MarginalSet target = marginal_set(state, config);

  auto build = [&](const RVec& theta) {
    CMat coeff = CMat::Zero(r, r);
    int offset = 0;
    for (auto [b, e] : clusters) {
      const int m = e - b;
      const CMat v = unitary_exp(hermitian_from_params(theta.segment(offset, m * m), m));
      double mean = 0.0;
      for (int k = b; k < e; ++k) mean += sd.coefficients[k];
      mean /= m;
      coeff.block(b, b, m, m) = std::sqrt(mean) * v;
      offset += m * m;
    }
    return reconstruct_with_matrix(sd, state.labels, state.dims, coeff);
  };
  auto value = [&](const RVec& theta) {
    const PureState trial = build(theta);
    const MarginalSet got = marginal_set(trial, config);
    double acc = 0.0;
    for (std::size_t k = 0; k < got.size(); ++k) {
      acc += (got.marginals[k].matrix - target.marginals[k].matrix).squaredNorm();
    }
    return acc;
  };
  auto fg = [&](const RVec& theta, RVec* grad) {
    if (grad) *grad = numeric_gradient(value, theta);
    return value(theta);
  };

  BfgsOptions opts;
  opts.max_iters = 400;
  opts.grad_tol = 1e-11;

  auto eng = rs.engine();
  std::normal_distribution<double> normal(0.0, 0.8);
  std::optional<WitnessCandidate> best;
  for (int trial = 0; trial < restarts; ++trial) {
    RVec theta(dof);
    for (int k = 0; k < dof; ++k) theta[k] = normal(eng);
    const BfgsResult res = minimize_bfgs(fg, theta, opts);
    if (res.value > tol.marginal_match * tol.marginal_match) continue;

    PureState candidate = build(res.x);
    const double dist = marginal_distance(marginal_set(candidate, config), target);
    const double fid = fidelity(state, candidate);
    if (dist <= tol.marginal_match && fid <= 1.0 - tol.witness_fidelity_gap) {
      if (!best || fid < best->fidelity) {
        best = WitnessCandidate{std::move(candidate), dist, fid};
      }
    }
  }
  return best;
}

nlohmann::json tolerances_json(const Tolerances& t) {
  return nlohmann::json{{"norm", t.norm},
                        {"hermiticity", t.hermiticity},
                        {"trace", t.trace},
                        {"eig_floor", t.eig_floor},
                        {"rank_rel", t.rank_rel},
                        {"span_rel", t.span_rel},
                        {"kernel_rel", t.kernel_rel},
                        {"gap", t.gap},
                        {"newton_tol", t.newton_tol},
                        {"newton_residual", t.newton_residual},
                        {"dedup", t.dedup},
                        {"trivial_norm", t.trivial_norm},
                        {"phase_equal", t.phase_equal},
                        {"marginal_match", t.marginal_match},
                        {"witness_fidelity_gap", t.witness_fidelity_gap},
                        {"distinct_mismatch", t.distinct_mismatch},
                        {"distinct_fidelity_gap", t.distinct_fidelity_gap},
                        {"grad_tol", t.grad_tol}};
}

}  // namespace

UdpCertificate certify(const PureState& state, const std::vector<SubsystemSet>& config,
                       const RandomSource& rs, const CertifyOptions& options) {
  const Tolerances& tol = options.tol;
  if (state.num_parties() != 4) {
    throw std::invalid_argument("certify: exactly four parties required");
  }
  const int d = state.dims[0];
  for (int dim : state.dims) {
    if (dim != d) throw std::invalid_argument("certify: equal local dimensions required");
  }

  const ConfigSplit split = split_config(config);

  UdpCertificate cert;
  cert.d = d;
  cert.tolerances = tol;
  for (const auto& s : config) cert.config.push_back(s.str());
  cert.bipartition = config[split.left].str() + "|" + config[split.right].str();
  cert.third_pair = config[split.third].str();

  const SchmidtDecomposition sd =
      schmidt_decompose(state, config[split.left], config[split.right]);
  cert.genericity = genericity_check(sd, tol.gap, tol.rank_rel);
  cert.schmidt_rank = cert.genericity.schmidt_rank;
  const int r = cert.schmidt_rank;

  std::optional<WitnessCandidate> witness;
  const MarginalSet target = marginal_set(state, config);

  if (r >= 2) {
    const OperatorBlocks blocks = build_operator_blocks(sd, config[split.third], r);
    cert.span_dim = operator_span_dimension(blocks, tol.span_rel);

    const GammaLinearSystem sys = assemble_linear_system(blocks);
    const NullspaceBasis kernel = solve_nullspace(sys, tol.kernel_rel);
    cert.nullspace_dim = kernel.dim;

    const CompatibilityOutcome compat =
        solve_compatibility(kernel, sys.lambdas, options.compat_restarts, rs.substream(1), tol);
    cert.compat_restarts = compat.restarts;
    cert.compat_failed_restarts = compat.failed_restarts;
    cert.compat_solutions = static_cast<int>(compat.solutions.size());
    cert.max_nontrivial_norm = compat.max_nontrivial_norm;

    const TorusOracleResult oracle =
        torus_oracle_on_blocks(blocks, options.torus_restarts, rs.substream(2), tol);
    cert.torus_phases = oracle.phases;
    cert.torus_residual = oracle.residual;
    cert.torus_minimizers = static_cast<int>(oracle.minimizers.size());

    // Phase-vector witness candidates from both paths.
    std::vector<RVec> phase_candidates;
    for (const auto& sol : compat.solutions) {
      if (sol.x.norm() <= tol.trivial_norm) continue;
      if (sol.residual_all_pairs > tol.newton_residual) continue;
      const CVec gamma = sys.unpack(kernel.basis * sol.x);
      RVec phases = RVec::Zero(r);
      bool valid = true;
      for (int j = 1; j < r; ++j) {
        const cplx u = cplx(1.0, 0.0) -
                       gamma[GammaLinearSystem::pair_index(0, j, r)] /
                           std::sqrt(sys.lambdas[0] * sys.lambdas[j]);
        if (std::abs(std::abs(u) - 1.0) > 1e-6) {
          valid = false;
          break;
        }
        phases[j] = -std::arg(u);
      }
      if (valid) phase_candidates.push_back(std::move(phases));
    }
    for (const auto& m : oracle.minimizers) {
      if (m.residual <= tol.marginal_match &&
          m.phases.cwiseAbs().maxCoeff() > tol.phase_equal) {
        phase_candidates.push_back(m.phases);
      }
    }
    for (const auto& phases : phase_candidates) {
      PureState candidate = sd.reconstruct(state.labels, state.dims, phases, r);
      const double dist = marginal_distance(marginal_set(candidate, config), target);
      const double fid = fidelity(state, candidate);
      if (dist <= tol.marginal_match && fid <= 1.0 - tol.witness_fidelity_gap) {
        if (!witness || fid < witness->fidelity) {
          witness = WitnessCandidate{std::move(candidate), dist, fid};
        }
      }
    }

    // Degenerate spectra admit compatible states beyond phase rotations.
    if (!witness && !cert.genericity.is_generic) {
      witness = mixing_witness_search(state, config, sd, r, options.mixing_restarts,
                                      rs.substream(3), tol);
    }
  }

  if (witness) {
    cert.verdict = Verdict::kNonuniqueWitness;
    cert.witness_fidelity = witness->fidelity;
    cert.witness_marginal_distance = witness->marginal_distance;
    cert.witness = std::move(witness->state);
    return cert;
  }
  if (!cert.genericity.is_generic) {
    cert.verdict = Verdict::kNotGeneric;
    return cert;
  }

  const bool algebraic_unique =
      cert.nullspace_dim == d * d - 1 && cert.max_nontrivial_norm <= tol.trivial_norm;
  const bool oracle_unique = cert.torus_residual <= tol.marginal_match &&
                             cert.torus_phases.cwiseAbs().maxCoeff() <= tol.phase_equal;
  cert.verdict = (algebraic_unique && oracle_unique) ? Verdict::kUnique : Verdict::kInconclusive;
  return cert;
}

std::string certificate_to_json(const UdpCertificate& cert) {
  nlohmann::json j;
  j["verdict"] = to_string(cert.verdict);
  j["d"] = cert.d;
  j["config"] = cert.config;
  j["bipartition"] = cert.bipartition;
  j["third_pair"] = cert.third_pair;
  j["genericity"] = {{"schmidt_rank", cert.genericity.schmidt_rank},
                     {"min_coefficient", cert.genericity.min_coefficient},
                     {"min_pairwise_gap", cert.genericity.min_pairwise_gap},
                     {"is_generic", cert.genericity.is_generic}};
  j["span_dim"] = cert.span_dim;
  j["nullspace_dim"] = cert.nullspace_dim;
  j["compat"] = {{"restarts", cert.compat_restarts},
                 {"failed_restarts", cert.compat_failed_restarts},
                 {"solutions", cert.compat_solutions},
                 {"max_nontrivial_norm", cert.max_nontrivial_norm}};
  std::vector<double> phases(cert.torus_phases.data(),
                             cert.torus_phases.data() + cert.torus_phases.size());
  j["torus"] = {{"phases", phases},
                {"residual", cert.torus_residual},
                {"minimizers", cert.torus_minimizers}};
  j["witness"]["present"] = cert.witness.has_value();
  if (cert.witness) {
    j["witness"]["fidelity"] = cert.witness_fidelity;
    j["witness"]["marginal_distance"] = cert.witness_marginal_distance;
    std::vector<double> re(cert.witness->amplitudes.size()), im(cert.witness->amplitudes.size());
    for (Eigen::Index i = 0; i < cert.witness->amplitudes.size(); ++i) {
      re[i] = cert.witness->amplitudes[i].real();
      im[i] = cert.witness->amplitudes[i].imag();
    }
    j["witness"]["state"] = {{"labels", cert.witness->labels},
                             {"dims", cert.witness->dims},
                             {"re", re},
                             {"im", im}};
  }
  j["tolerances"] = tolerances_json(cert.tolerances);
  return j.dump(2);
}

}  // namespace qmarg
