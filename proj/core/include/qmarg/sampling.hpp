#pragma once

#include <cstdint>
#include <random>

#include "qmarg/schmidt.hpp"
#include "qmarg/types.hpp"

namespace qmarg {

/// Deterministic RNG descriptor. The same (seed, stream) always reproduces
/// the same draws on one platform; distinct streams are independent and may
/// run concurrently.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Fresh engine; repeated calls return identically seeded engines.
  std::mt19937_64 engine() const;

  /// Derived source for sub-task k (trials, restarts, ...).
  RandomSource substream(std::uint64_t k) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

struct GenericityReport {
  int schmidt_rank = 0;
  double min_coefficient = 0.0;
  double min_pairwise_gap = 0.0;
  bool is_generic = false;
};

/// Vector of iid standard complex Gaussians (re and im each N(0, 1/2)-free;
/// entries drawn as N(0,1) pairs, order: real then imaginary, index 0 first).
CVec gaussian_vector(Eigen::Index n, std::mt19937_64& eng);

/// Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// R-diagonal phase correction.
CMat haar_unitary(int dim, std::mt19937_64& eng);
CMat haar_unitary(int dim, const RandomSource& rs);

/// Haar-random pure state over the given dimensions (labels are the default
/// A, B, C, D, E1, ...).
PureState haar_state(const std::vector<int>& dims, const RandomSource& rs);

struct GenericSchmidtState {
  PureState state;
  SchmidtDecomposition schmidt;
};

/// Four-party state of local dimension d built directly in Schmidt form:
/// independent Haar bases on the AB and CD pair spaces and coefficients
/// distributed as the reduced-state spectrum of a Haar bipartite vector.
GenericSchmidtState generic_schmidt_state(int d, const RandomSource& rs);

/// Rank / degeneracy diagnostics for a decomposition. `rank_rel` is applied
/// to singular values (sqrt of the coefficients).
GenericityReport genericity_check(const SchmidtDecomposition& sd, double gap_tol = 1e-8,
                                  double rank_rel = 1e-10);

}  // namespace qmarg
