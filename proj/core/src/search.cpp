#include "qmarg/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <numbers>
#include <thread>
#include <atomic>
#include <array>

#include <json.hpp>

#include "qmarg/optim.hpp"
#include "qmarg/schmidt.hpp"

namespace qmarg {

namespace {

CVec unpack_state(const RVec& x) {
  CVec psi(x.size() / 2);
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = cplx(x[2 * i], x[2 * i + 1]);
  return psi;
}

RVec pack_state(const CVec& psi) {
  RVec x(2 * psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    x[2 * i] = psi[i].real();
    x[2 * i + 1] = psi[i].imag();
  }
  return x;
}

// Objective sum_S || rho_S(psi) - T_S ||_F^2 on the unit sphere of the
// real-packed amplitudes, with its Riemannian gradient.
struct MarginalObjective {
  const PureState* reference;
  const MarginalSet* target;

  double operator()(const RVec& x, RVec* grad) const {
    const CVec psi = unpack_state(x);
    PureState trial;  // bypass the norm check: x is unit up to rounding
    trial.labels = reference->labels;
    trial.dims = reference->dims;
    trial.amplitudes = psi;

    double f = 0.0;
    CVec w = CVec::Zero(psi.size());
    for (std::size_t k = 0; k < target->size(); ++k) {
      const DensityOperator rho = partial_trace(trial, target->sets[k]);
      const CMat delta = rho.matrix - target->marginals[k].matrix;
      f += delta.squaredNorm();
      if (grad) {
        w += apply_operator_on(psi, trial.dims, target->sets[k].positions, delta);
      }
    }
    if (grad) {
      grad->resize(x.size());
      for (Eigen::Index i = 0; i < psi.size(); ++i) {
        (*grad)[2 * i] = 4.0 * w[i].real();
        (*grad)[2 * i + 1] = 4.0 * w[i].imag();
      }
      *grad -= grad->dot(x) * x;  // tangent projection
    }
    return f;
  }
};

}  // namespace

SearchResult compatibility_search(const MarginalSet& target, const PureState& reference,
                                  int restarts, const RandomSource& rs,
                                  const SearchOptions& options) {
  for (const auto& m : target.marginals) {
    if (m.dims.empty() || m.matrix.rows() != dims_product(m.dims)) {
      throw std::invalid_argument("compatibility_search: malformed target marginal");
    }
    for (std::size_t k = 0; k < m.dims.size(); ++k) {
      const int pos = reference.position_of(m.labels[k]);
      if (reference.dims[pos] != m.dims[k]) {
        throw std::invalid_argument("compatibility_search: target dims do not match reference");
      }
    }
  }

  const Tolerances& tol = options.tol;
  const MarginalObjective objective{&reference, &target};
  auto fg = [&](const RVec& x, RVec* g) { return objective(x, g); };
  RetractionFn retract = [](RVec& x) { x /= x.norm(); };

  BfgsOptions bfgs;
  bfgs.max_iters = options.max_iters;
  bfgs.grad_tol = tol.grad_tol;

  auto eng = rs.engine();
  std::normal_distribution<double> normal(0.0, 1.0);

  SearchResult out;
  out.best_state = reference;
  out.mismatch = std::numeric_limits<double>::infinity();
  out.fidelity_to_reference = 1.0;

  bool have_distinct = false;
  double best_distinct_fid = 2.0;
  double best_mismatch = std::numeric_limits<double>::infinity();
  PureState best_by_mismatch = reference;
  double best_by_mismatch_fid = 1.0;

  const int total = restarts + (options.include_reference_start ? 1 : 0);
  int used = 0;
  for (int trial = 0; trial < total; ++trial) {
    RVec x0;
    if (options.include_reference_start && trial == 0) {
      x0 = pack_state(reference.amplitudes);
    } else {
      x0.resize(2 * reference.total_dim());
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = normal(eng);
    }
    const BfgsResult res = minimize_bfgs(fg, std::move(x0), bfgs, retract);
    ++used;
    out.converged |= res.converged;

    PureState candidate =
        PureState::normalized(reference.labels, reference.dims, unpack_state(res.x));
    const double mismatch = std::sqrt(std::max(0.0, res.value));
    const double fid = fidelity(reference, candidate);

    if (mismatch < best_mismatch) {
      best_mismatch = mismatch;
      best_by_mismatch = candidate;
      best_by_mismatch_fid = fid;
    }
    if (mismatch <= tol.distinct_mismatch && fid < best_distinct_fid) {
      have_distinct = true;
      best_distinct_fid = fid;
      out.best_state = std::move(candidate);
      out.mismatch = mismatch;
      out.fidelity_to_reference = fid;
      // A clearly distinct compatible state settles the verdict.
      if (fid <= 1.0 - 2.0 * tol.distinct_fidelity_gap && mismatch <= 0.01 * tol.distinct_mismatch) {
        break;
      }
    }
  }
  if (!have_distinct) {
    out.best_state = std::move(best_by_mismatch);
    out.mismatch = best_mismatch;
    out.fidelity_to_reference = best_by_mismatch_fid;
  }
  out.restarts_used = used;
  return out;
}

std::string to_string(SurveyVerdict v) {
  return v == SurveyVerdict::kDistinctFound ? "DISTINCT_FOUND" : "NO_DISTINCT_FOUND";
}

int SurveyTable::num_distinct() const {
  int n = 0;
  for (const auto& row : rows) {
    if (row.verdict == SurveyVerdict::kDistinctFound) ++n;
  }
  return n;
}

SurveyTable survey(const std::string& config, int num_states, int restarts,
                   const RandomSource& rs, int jobs, const SearchOptions& options) {
  SurveyTable table;
  table.tol = options.tol;
  table.rows.resize(num_states);

  auto run_trial = [&](int trial) {
    const RandomSource rs_trial = rs.substream(static_cast<std::uint64_t>(trial));
    const PureState state = haar_state({2, 2, 2, 2}, rs_trial.substream(0));
    const auto sets = parse_config(state, config);
    const MarginalSet target = marginal_set(state, sets);
    const SearchResult res =
        compatibility_search(target, state, restarts, rs_trial.substream(1), options);

    SurveyRow row;
    row.seed = static_cast<std::uint64_t>(trial);
    row.config = config;
    row.mismatch = res.mismatch;
    row.fidelity_gap = 1.0 - res.fidelity_to_reference;
    row.verdict = res.distinct_found(options.tol) ? SurveyVerdict::kDistinctFound
                                                  : SurveyVerdict::kNoDistinctFound;
    table.rows[trial] = std::move(row);
  };

  if (jobs <= 1) {
    for (int trial = 0; trial < num_states; ++trial) run_trial(trial);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      while (true) {
        const int trial = next.fetch_add(1);
        if (trial >= num_states) break;
        run_trial(trial);
      }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, num_states);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return table;
}

std::string survey_to_csv(const SurveyTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "# mismatch_tol=" << table.tol.distinct_mismatch
      << " fidelity_gap_tol=" << table.tol.distinct_fidelity_gap << "\n";
  out << "seed,config,mismatch,fidelity_gap,verdict\n";
  for (const auto& row : table.rows) {
    out << row.seed << ",\"" << row.config << "\"," << row.mismatch << "," << row.fidelity_gap
        << "," << to_string(row.verdict) << "\n";
  }
  return out.str();
}

Fig2aWitness fig2a_witness(const PureState& state, const RandomSource& rs,
                           const Tolerances& tol) {
  if (state.num_parties() != 4) {
    throw std::invalid_argument("fig2a_witness: four parties required");
  }
  const auto abc = make_subsystem_set(
      state.labels, {state.labels[0], state.labels[1], state.labels[2]});
  const SchmidtDecomposition sd = schmidt_decompose(state, abc);
  const int rank = sd.rank(tol.rank_rel);

  auto eng = rs.engine();
  CMat u;
  if (rank >= 2) {
    u = haar_unitary(state.dims[3], eng);
  } else {
    // Product across ABC|D: any unitary diagonal in the basis of rho_D only
    // multiplies the state by a phase, so no distinct witness exists this
    // way; the returned witness makes that explicit.
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const CVec chi = sd.right_basis.col(0);
    const cplx rot = std::polar(1.0, angle(eng));
    u = CMat::Identity(state.dims[3], state.dims[3]) +
        (rot - cplx(1.0, 0.0)) * chi * chi.adjoint();
  }
  Fig2aWitness out;
  out.witness = apply_local_unitaries(state, {{state.labels[3], u}});
  out.distinct = rank >= 2;
  out.fidelity = fidelity(state, out.witness);

  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const auto pair = make_subsystem_set(state.labels, {state.labels[i], state.labels[j]});
      out.max_marginal_deviation = std::max(
          out.max_marginal_deviation, (partial_trace(state, pair).matrix -
                                       partial_trace(out.witness, pair).matrix)
                                          .cwiseAbs()
                                          .maxCoeff());
    }
  }
  return out;
}

namespace {

// <vi|_E rho |vj>_E for a density operator whose E parties sit at
// `e_positions` of its own register.
CMat e_block(const DensityOperator& rho, const std::vector<int>& e_positions, const CVec& vi,
             const CVec& vj) {
  std::vector<int> kept;
  {
    auto it = e_positions.begin();
    for (int p = 0; p < static_cast<int>(rho.dims.size()); ++p) {
      if (it != e_positions.end() && *it == p) {
        ++it;
      } else {
        kept.push_back(p);
      }
    }
  }
  const auto keep_off = subsystem_offsets(rho.dims, kept);
  const auto e_off = subsystem_offsets(rho.dims, e_positions);
  const auto nk = static_cast<Eigen::Index>(keep_off.size());
  const auto ne = static_cast<Eigen::Index>(e_off.size());

  CMat out = CMat::Zero(nk, nk);
  for (Eigen::Index m = 0; m < nk; ++m) {
    for (Eigen::Index mp = 0; mp < nk; ++mp) {
      cplx acc = 0.0;
      for (Eigen::Index e = 0; e < ne; ++e) {
        for (Eigen::Index ep = 0; ep < ne; ++ep) {
          acc += std::conj(vi[e]) * rho.matrix(keep_off[m] + e_off[e], keep_off[mp] + e_off[ep]) *
                 vj[ep];
        }
      }
      out(m, mp) = acc;
    }
  }
  return out;
}

}  // namespace

CorollaryReport corollary_check_state(const PureState& psi, const RandomSource& rs,
                                      const CertifyOptions& options) {
  if (psi.num_parties() != 5 && psi.num_parties() != 6) {
    throw std::invalid_argument("corollary_check: five or six parties required");
  }
  for (int d : psi.dims) {
    if (d != 2) throw std::invalid_argument("corollary_check: qubits only");
  }
  const Tolerances& tol = options.tol;
  const int n = psi.num_parties();
  CorollaryReport report;
  report.n = n;

  std::vector<std::string> abcd_labels(psi.labels.begin(), psi.labels.begin() + 4);
  std::vector<std::string> e_labels(psi.labels.begin() + 4, psi.labels.end());
  const auto abcd = make_subsystem_set(psi.labels, abcd_labels);
  const auto e_set = make_subsystem_set(psi.labels, e_labels);

  const SchmidtDecomposition sd = schmidt_decompose(psi, abcd, e_set);
  const int r = sd.rank(tol.rank_rel);
  report.e_spectrum = sd.coefficients;
  report.schmidt_terms = r;

  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      if (std::abs(sd.coefficients[i] - sd.coefficients[j]) <= tol.gap) {
        report.not_generic = true;
        report.note = "degenerate spectrum across ABCD|E";
        return report;
      }
    }
  }

  // The three (n-2)-body marginals of the corollary.
  const auto abe_labels = [&] {
    std::vector<std::string> l = {psi.labels[0], psi.labels[1]};
    l.insert(l.end(), e_labels.begin(), e_labels.end());
    return l;
  }();
  const auto cde_labels = [&] {
    std::vector<std::string> l = {psi.labels[2], psi.labels[3]};
    l.insert(l.end(), e_labels.begin(), e_labels.end());
    return l;
  }();
  const auto bde_labels = [&] {
    std::vector<std::string> l = {psi.labels[1], psi.labels[3]};
    l.insert(l.end(), e_labels.begin(), e_labels.end());
    return l;
  }();
  const DensityOperator rho_abe = partial_trace(psi, make_subsystem_set(psi.labels, abe_labels));
  const DensityOperator rho_cde = partial_trace(psi, make_subsystem_set(psi.labels, cde_labels));
  const DensityOperator rho_bde = partial_trace(psi, make_subsystem_set(psi.labels, bde_labels));

  // Constituents |psi_i> on ABCD and their extracted pair marginals.
  std::vector<PureState> constituents;
  for (int i = 0; i < r; ++i) {
    constituents.push_back(PureState::normalized(abcd_labels, {2, 2, 2, 2},
                                                 sd.left_basis.col(i)));
  }

  const std::vector<int> e_pos_in_marginal = [&] {
    std::vector<int> out;
    for (std::size_t k = 2; k < abe_labels.size(); ++k) out.push_back(static_cast<int>(k));
    return out;
  }();

  double extraction_dev = 0.0;
  for (int i = 0; i < r; ++i) {
    const CVec ei = sd.right_basis.col(i);
    struct Extract {
      const DensityOperator* rho;
      const char* l1;
      const char* l2;
    };
    const std::array<Extract, 3> extracts = {
        Extract{&rho_abe, "A", "B"}, Extract{&rho_cde, "C", "D"}, Extract{&rho_bde, "B", "D"}};
    for (const auto& ex : extracts) {
      const CMat block = e_block(*ex.rho, e_pos_in_marginal, ei, ei) / sd.coefficients[i];
      const auto pair = make_subsystem_set(constituents[i].labels, {ex.l1, ex.l2});
      const CMat direct = partial_trace(constituents[i], pair).matrix;
      extraction_dev = std::max(extraction_dev, (block - direct).cwiseAbs().maxCoeff());
    }
  }
  report.extraction_deviation = extraction_dev;

  // Certify every constituent on the {AB, CD, BD} configuration.
  bool all_unique = true;
  for (int i = 0; i < r; ++i) {
    const auto config = parse_config(constituents[i], "AB,CD,BD");
    const UdpCertificate cert =
        certify(constituents[i], config, rs.substream(100 + i), options);
    report.constituent_verdicts.push_back(cert.verdict);
    all_unique &= cert.verdict == Verdict::kUnique;
  }

  // Phase locking through the blocks of rho_ABE: for i != j the block must
  // equal e^{i(phi_i - phi_j)} sqrt(l_i l_j) Tr_CD |psi_i><psi_j|.
  RVec phases = RVec::Zero(r);
  report.phases_locked = true;
  double lock_residual = 0.0;
  if (r > 1) {
    const auto ab_pair = make_subsystem_set(constituents[0].labels, {"A", "B"});
    std::vector<bool> assigned(r, false);
    assigned[0] = true;
    // The lock graph is complete wherever T_ij is nonzero; propagate from 0.
    std::vector<std::vector<std::pair<int, cplx>>> theta(r, std::vector<std::pair<int, cplx>>());
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        if (i == j) continue;
        const CMat t_ij = std::sqrt(sd.coefficients[i] * sd.coefficients[j]) *
                          dyad_partial_trace(constituents[i], constituents[j], ab_pair);
        if (t_ij.norm() <= 1e-8) continue;
        const CMat b_ij = e_block(rho_abe, e_pos_in_marginal, sd.right_basis.col(i),
                                  sd.right_basis.col(j));
        const cplx ratio = (t_ij.conjugate().cwiseProduct(b_ij)).sum() / t_ij.squaredNorm();
        lock_residual =
            std::max(lock_residual, (ratio * t_ij - b_ij).cwiseAbs().maxCoeff());
        theta[i].emplace_back(j, ratio);
      }
    }
    // BFS assignment phi_j = phi_i - arg(ratio_ij)  [since ratio = e^{i(phi_i - phi_j)}]
    std::vector<int> queue = {0};
    while (!queue.empty()) {
      const int i = queue.back();
      queue.pop_back();
      for (const auto& [j, ratio] : theta[i]) {
        if (assigned[j]) continue;
        phases[j] = phases[i] - std::arg(ratio);
        assigned[j] = true;
        queue.push_back(j);
      }
    }
    for (int i = 0; i < r; ++i) report.phases_locked &= assigned[i];
    report.phase_lock_residual = lock_residual;
  }

  const PureState reconstruction = sd.reconstruct(psi.labels, psi.dims, phases, r);
  report.reconstruction_fidelity = fidelity(psi, reconstruction);
  report.unique = all_unique && report.phases_locked &&
                  report.reconstruction_fidelity >= 1.0 - 1e-8;

  if (r > 1) {
    RVec perturbed = phases;
    perturbed[1] += 0.3;
    const PureState wrong = sd.reconstruct(psi.labels, psi.dims, perturbed, r);
    const auto abe_set = make_subsystem_set(psi.labels, abe_labels);
    report.perturbed_abe_mismatch =
        (partial_trace(wrong, abe_set).matrix - rho_abe.matrix).norm();
  }
  return report;
}

CorollaryReport corollary_check(int n, const RandomSource& rs, const CertifyOptions& options) {
  if (n != 5 && n != 6) {
    throw std::invalid_argument("corollary_check: n must be 5 or 6");
  }
  const std::vector<int> dims(n, 2);
  return corollary_check_state(haar_state(dims, rs.substream(0)), rs, options);
}

std::string corollary_report_to_json(const CorollaryReport& report) {
  nlohmann::json j;
  j["n"] = report.n;
  j["not_generic"] = report.not_generic;
  j["note"] = report.note;
  std::vector<double> spectrum(report.e_spectrum.data(),
                               report.e_spectrum.data() + report.e_spectrum.size());
  j["e_spectrum"] = spectrum;
  j["schmidt_terms"] = report.schmidt_terms;
  std::vector<std::string> verdicts;
  for (const auto v : report.constituent_verdicts) verdicts.push_back(to_string(v));
  j["constituent_verdicts"] = verdicts;
  j["extraction_deviation"] = report.extraction_deviation;
  j["phases_locked"] = report.phases_locked;
  j["phase_lock_residual"] = report.phase_lock_residual;
  j["reconstruction_fidelity"] = report.reconstruction_fidelity;
  j["unique"] = report.unique;
  j["perturbed_abe_mismatch"] = report.perturbed_abe_mismatch;
  return j.dump(2);
}

}  // namespace qmarg
