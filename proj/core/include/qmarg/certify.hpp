#pragma once

#include <optional>
#include <string>

#include "qmarg/compatibility.hpp"
#include "qmarg/sampling.hpp"
#include "qmarg/schmidt.hpp"
#include "qmarg/tolerances.hpp"
#include "qmarg/torus_oracle.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

enum class Verdict {
  kUnique,            // determined among pure states by the config marginals
  kNotGeneric,        // genericity preconditions failed, no witness found
  kNonuniqueWitness,  // a distinct compatible pure state was constructed
  kInconclusive,      // algebraic and oracle paths disagree
};

std::string to_string(Verdict v);

struct CertifyOptions {
  int compat_restarts = 50;
  int torus_restarts = 50;
  int mixing_restarts = 30;  // degenerate-cluster witness search
  Tolerances tol;
};

struct UdpCertificate {
  Verdict verdict = Verdict::kInconclusive;
  int d = 0;
  std::vector<std::string> config;  // e.g. {"AB","CD","BD"}
  std::string bipartition;          // e.g. "AB|CD"
  std::string third_pair;           // e.g. "BD"

  GenericityReport genericity;
  int schmidt_rank = 0;
  int span_dim = 0;
  int nullspace_dim = 0;

  int compat_restarts = 0;
  int compat_failed_restarts = 0;
  int compat_solutions = 0;
  double max_nontrivial_norm = 0.0;

  RVec torus_phases;
  double torus_residual = 0.0;
  int torus_minimizers = 0;

  std::optional<PureState> witness;
  double witness_fidelity = 1.0;
  double witness_marginal_distance = 0.0;

  Tolerances tolerances;
};

/// Full uniqueness pipeline for a four-party state of equal local dimension
/// and a config of three two-body marginals, two of which must be disjoint
/// (they fix the Schmidt decomposition) while the third spans both sides.
UdpCertificate certify(const PureState& state, const std::vector<SubsystemSet>& config,
                       const RandomSource& rs, const CertifyOptions& options = {});

/// Certificate serialized with every diagnostic and the tolerances used.
std::string certificate_to_json(const UdpCertificate& cert);

}  // namespace qmarg
