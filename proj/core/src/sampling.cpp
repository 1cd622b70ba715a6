#include "qmarg/sampling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace qmarg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 RandomSource::engine() const {
  // Mix seed and stream so that streams differing in either word decouple.
  const std::uint64_t a = splitmix64(seed_);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream_ + 0x632be59bd9b4e019ull));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

RandomSource RandomSource::substream(std::uint64_t k) const {
  return RandomSource(seed_, splitmix64(stream_ ^ splitmix64(k + 1)));
}

CVec gaussian_vector(Eigen::Index n, std::mt19937_64& eng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = normal(eng);
    const double im = normal(eng);
    v[i] = cplx(re, im);
  }
  return v;
}

CMat haar_unitary(int dim, std::mt19937_64& eng) {
  if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be >= 1");
  CMat g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const CVec row = gaussian_vector(dim, eng);
    g.row(r) = row.transpose();
  }
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ() * CMat::Identity(dim, dim);
  const CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const cplx rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return q;
}

CMat haar_unitary(int dim, const RandomSource& rs) {
  auto eng = rs.engine();
  return haar_unitary(dim, eng);
}

PureState haar_state(const std::vector<int>& dims, const RandomSource& rs) {
  for (int d : dims) {
    if (d < 2) throw std::invalid_argument("haar_state: all dims must be >= 2");
  }
  auto eng = rs.engine();
  CVec amps = gaussian_vector(dims_product(dims), eng);
  return PureState::normalized(default_labels(static_cast<int>(dims.size())), dims,
                               std::move(amps));
}

GenericSchmidtState generic_schmidt_state(int d, const RandomSource& rs) {
  if (d < 2) throw std::invalid_argument("generic_schmidt_state: d must be >= 2");
  const int d2 = d * d;

  const CMat u_ab = haar_unitary(d2, rs.substream(1));
  const CMat u_cd = haar_unitary(d2, rs.substream(2));

  // Coefficients: spectrum of the reduced state of a Haar bipartite vector,
  // realized as normalized squared singular values of a Ginibre matrix.
  auto eng = rs.substream(3).engine();
  CMat g(d2, d2);
  for (int r = 0; r < d2; ++r) g.row(r) = gaussian_vector(d2, eng).transpose();
  Eigen::JacobiSVD<CMat> svd(g);
  RVec lambda = svd.singularValues().array().square();
  lambda /= lambda.sum();  // already sorted decreasing

  const Eigen::Index dim = static_cast<Eigen::Index>(d2) * d2;
  CVec amps = CVec::Zero(dim);
  for (int k = 0; k < d2; ++k) {
    const double w = std::sqrt(lambda[k]);
    for (int ab = 0; ab < d2; ++ab) {
      const cplx lft = u_ab(ab, k);
      if (lft == cplx(0.0, 0.0)) continue;
      for (int cd = 0; cd < d2; ++cd) {
        amps[static_cast<Eigen::Index>(ab) * d2 + cd] += w * lft * u_cd(cd, k);
      }
    }
  }

  const auto labels = default_labels(4);
  PureState state = PureState::normalized(labels, {d, d, d, d}, std::move(amps));

  SchmidtDecomposition sd;
  sd.left = make_subsystem_set(labels, {"A", "B"});
  sd.right = make_subsystem_set(labels, {"C", "D"});
  sd.left_dims = {d, d};
  sd.right_dims = {d, d};
  sd.coefficients = lambda;
  sd.left_basis = u_ab;
  sd.right_basis = u_cd;

  // Same phase convention as schmidt_decompose, for determinism.
  for (int k = 0; k < d2; ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < sd.left_basis.rows(); ++i) {
      const double mag = std::abs(sd.left_basis(i, k));
      if (mag > best + 1e-15) {
        best = mag;
        arg = i;
      }
    }
    const cplx pivot = sd.left_basis(arg, k);
    if (std::abs(pivot) > 0.0) {
      const cplx phase = pivot / std::abs(pivot);
      sd.left_basis.col(k) *= std::conj(phase);
      sd.right_basis.col(k) *= phase;
    }
  }
  return GenericSchmidtState{std::move(state), std::move(sd)};
}

GenericityReport genericity_check(const SchmidtDecomposition& sd, double gap_tol,
                                  double rank_rel) {
  GenericityReport rep;
  const Eigen::Index n = sd.coefficients.size();
  if (n == 0) return rep;

  rep.schmidt_rank = sd.rank(rank_rel);
  rep.min_coefficient = sd.coefficients.minCoeff();
  double min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      min_gap = std::min(min_gap, std::abs(sd.coefficients[i] - sd.coefficients[j]));
    }
  }
  rep.min_pairwise_gap = n > 1 ? min_gap : 0.0;

  const double lambda_floor = rank_rel * rank_rel * sd.coefficients.maxCoeff();
  rep.is_generic = rep.schmidt_rank == static_cast<int>(n) &&
                   rep.min_coefficient > lambda_floor && rep.min_pairwise_gap > gap_tol;
  return rep;
}

}  // namespace qmarg
