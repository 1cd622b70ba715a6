#pragma once

namespace qmarg {

/// Numerical thresholds used across the toolkit. Every consumer of a
/// certificate or search result should read the tolerances it was produced
/// with instead of assuming the defaults.
struct Tolerances {
  double norm = 1e-12;           // |<psi|psi> - 1| for state validity
  double hermiticity = 1e-12;    // max elementwise deviation from M = M^dag
  double trace = 1e-12;          // |Tr(rho) - 1|
  double eig_floor = 1e-10;      // smallest admissible eigenvalue is -eig_floor
  double basis_orth = 1e-10;     // orthonormality of basis columns
  double unitary = 1e-10;        // ||U^dag U - 1||_max for inputs
  double rank_rel = 1e-10;       // singular values below rank_rel * s_max are zero
  double span_rel = 1e-8;        // relative SVD cutoff for operator span dimension
  double kernel_rel = 1e-8;      // relative SVD cutoff for nullspace dimension
  double gap = 1e-8;             // pairwise Schmidt-coefficient gap for genericity
  double newton_tol = 1e-12;     // Newton stationarity tolerance
  double newton_residual = 1e-10;  // max residual of an accepted root
  double dedup = 1e-6;           // solutions closer than this are identified
  double trivial_norm = 1e-6;    // ||x|| below this counts as the trivial solution
  double phase_equal = 1e-6;     // phases within this of 0 (mod 2pi) are "all equal"
  double marginal_match = 1e-10;   // marginal distance for a valid witness
  double witness_fidelity_gap = 1e-6;  // a witness must have fidelity <= 1 - this
  double distinct_mismatch = 1e-6;     // survey: compatible candidate threshold
  double distinct_fidelity_gap = 1e-3; // survey: distinctness threshold
  double io_norm = 1e-8;         // norm deviation accepted by the JSON reader
  double grad_tol = 1e-10;       // optimizer convergence on the gradient norm
};

}  // namespace qmarg
