#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmarg/certify.hpp"
#include "qmarg/marginals.hpp"
#include "qmarg/sampling.hpp"
#include "qmarg/tolerances.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

struct SearchOptions {
  int max_iters = 500;
  bool include_reference_start = false;
  Tolerances tol;
};

struct SearchResult {
  PureState best_state;
  double mismatch = 0.0;              // marginal distance of best_state to the target
  double fidelity_to_reference = 0.0;
  int restarts_used = 0;
  bool converged = false;

  bool distinct_found(const Tolerances& tol = {}) const {
    return mismatch <= tol.distinct_mismatch &&
           fidelity_to_reference <= 1.0 - tol.distinct_fidelity_gap;
  }
};

/// Multi-start quasi-Newton minimization of the summed squared marginal
/// distances over the normalized amplitude manifold. Among candidates that
/// match the target within the mismatch tolerance the one farthest from the
/// reference is reported; otherwise the best-matching candidate.
SearchResult compatibility_search(const MarginalSet& target, const PureState& reference,
                                  int restarts, const RandomSource& rs,
                                  const SearchOptions& options = {});

enum class SurveyVerdict { kNoDistinctFound, kDistinctFound };
std::string to_string(SurveyVerdict v);

struct SurveyRow {
  std::uint64_t seed = 0;  // trial stream drawn from the survey RandomSource
  std::string config;
  double mismatch = 0.0;
  double fidelity_gap = 0.0;  // 1 - fidelity
  SurveyVerdict verdict = SurveyVerdict::kNoDistinctFound;
};

struct SurveyTable {
  std::vector<SurveyRow> rows;
  Tolerances tol;
  int num_distinct() const;
};

/// Runs compatibility_search on the config marginals of `num_states`
/// Haar-random four-qubit states. Trials are independent; `jobs` > 1 runs
/// them on a thread pool with output ordered by trial regardless of
/// scheduling.
SurveyTable survey(const std::string& config, int num_states, int restarts,
                   const RandomSource& rs, int jobs = 1, const SearchOptions& options = {});

std::string survey_to_csv(const SurveyTable& table);

struct Fig2aWitness {
  PureState witness;
  bool distinct = false;  // false iff the state is product across ABC|D
  double fidelity = 1.0;
  double max_marginal_deviation = 0.0;  // over the D-free pair marginals
};

/// Rotates party D by a Haar unitary: every marginal not involving D is
/// preserved exactly, and for states entangled across ABC|D the result is a
/// distinct compatible state.
Fig2aWitness fig2a_witness(const PureState& state, const RandomSource& rs,
                           const Tolerances& tol = {});

struct CorollaryReport {
  int n = 0;
  bool not_generic = false;
  std::string note;
  RVec e_spectrum;  // Schmidt coefficients across ABCD|E
  int schmidt_terms = 0;
  std::vector<Verdict> constituent_verdicts;
  double extraction_deviation = 0.0;  // block-extracted vs direct constituent marginals
  bool phases_locked = false;
  double phase_lock_residual = 0.0;
  double reconstruction_fidelity = 0.0;
  bool unique = false;
  double perturbed_abe_mismatch = 0.0;  // rho_ABE mismatch after an injected phase flip
};

/// Checks the n-particle reduction (n = 5 or 6, qubits): decomposes a
/// Haar-random state across ABCD|E, certifies every four-party constituent
/// from its extracted pair marginals, locks the relative phases through the
/// blocks of rho_ABE and reports whether the reconstruction is unique.
CorollaryReport corollary_check(int n, const RandomSource& rs,
                                const CertifyOptions& options = {});

/// Same pipeline on a caller-supplied state (parties A, B, C, D, E1, ...).
CorollaryReport corollary_check_state(const PureState& psi, const RandomSource& rs,
                                      const CertifyOptions& options = {});

std::string corollary_report_to_json(const CorollaryReport& report);

}  // namespace qmarg
