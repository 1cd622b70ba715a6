#include "qmarg/families.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qmarg/marginals.hpp"

namespace qmarg {

namespace {

CVec basis_ket(const char* bits) {
  CVec v = CVec::Zero(16);
  int idx = 0;
  for (const char* p = bits; *p; ++p) idx = idx * 2 + (*p - '0');
  v[idx] = 1.0;
  return v;
}

PureState qubit_state(CVec amps) {
  return PureState::normalized(default_labels(4), {2, 2, 2, 2}, std::move(amps));
}

double max_pair_marginal_deviation(const PureState& a, const PureState& b) {
  const auto pairs = all_pair_sets(a);
  double worst = 0.0;
  for (const auto& s : pairs) {
    worst = std::max(
        worst, (partial_trace(a, s).matrix - partial_trace(b, s).matrix).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

PureState w4_state() {
  CVec v = (basis_ket("0001") + basis_ket("0010") + basis_ket("0100") + basis_ket("1000")) / 2.0;
  return qubit_state(std::move(v));
}

PureState dicke2_state() {
  CVec v = (basis_ket("0011") + basis_ket("0101") + basis_ket("1001") + basis_ket("0110") +
            basis_ket("1010") + basis_ket("1100")) /
           std::sqrt(6.0);
  return qubit_state(std::move(v));
}

PureState dicke3_state() { return bit_flip_image(w4_state()); }

PureState family_a(double a, double b, cplx s, double phi) {
  if (a == 0.0 && b == 0.0 && s == cplx(0.0, 0.0)) {
    throw std::invalid_argument("family_a: all parameters zero");
  }
  CVec v = a * basis_ket("0000") + b * w4_state().amplitudes +
           s * std::polar(1.0, phi) * basis_ket("1111");
  return qubit_state(std::move(v));
}

PureState family_b(double phi) {
  CVec v = 0.5 * basis_ket("0000") +
           std::polar(1.0, phi) / std::sqrt(2.0) * dicke2_state().amplitudes -
           0.5 * std::polar(1.0, 2.0 * phi) * basis_ket("1111");
  return qubit_state(std::move(v));
}

FamilyCPair family_c(double a, cplx r, cplx s, double phi_r, double phi_s) {
  FamilyCPair out;
  CVec base = a * basis_ket("0000") + r * dicke2_state().amplitudes + s * basis_ket("1111");
  const double norm = base.norm();
  if (norm == 0.0) throw std::invalid_argument("family_c: all parameters zero");

  CVec phased = a * basis_ket("0000") + r * std::polar(1.0, phi_r) * dicke2_state().amplitudes +
                s * std::polar(1.0, phi_s) * basis_ket("1111");
  out.psi = qubit_state(std::move(base));
  out.phi_state = qubit_state(std::move(phased));

  const cplx er = std::polar(1.0, phi_r);
  const cplx es = std::polar(1.0, phi_s);
  const cplx lhs = std::conj(r) * s * es;
  const cplx rhs = a * r * er * (cplx(1.0, 0.0) - er) + std::conj(r) * s * er;
  out.condition_residual = std::abs(lhs - rhs) / (norm * norm);
  out.feasible = out.condition_residual <= 1e-10;
  return out;
}

PureState bit_flip_image(const PureState& state) {
  CMat x(2, 2);
  x << 0, 1, 1, 0;
  std::map<std::string, CMat> flips;
  for (const auto& label : state.labels) flips[label] = x;
  return apply_local_unitaries(state, flips);
}

std::vector<std::array<double, 3>> family_a_settings() {
  const double t = 1.0 / std::sqrt(3.0);
  return {{t, t, t}, {0.2, 0.8, std::sqrt(1.0 - 0.04 - 0.64)}, {0.6, 0.4, std::sqrt(1.0 - 0.36 - 0.16)}};
}

std::vector<FamilyRow> verify_families(int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("verify_families: need at least two points");
  std::vector<FamilyRow> rows;
  const double step = 2.0 * std::numbers::pi / grid_points;

  for (const auto& [a, b, s] : family_a_settings()) {
    std::vector<PureState> members;
    for (int k = 0; k < grid_points; ++k) members.push_back(family_a(a, b, s, k * step));
    double dev = 0.0, fid = 1.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        dev = std::max(dev, max_pair_marginal_deviation(members[i], members[j]));
        fid = std::min(fid, fidelity(members[i], members[j]));
      }
    }
    std::ostringstream params;
    params << "a=" << a << ";b=" << b << ";s=" << s;
    rows.push_back({"A", params.str(), dev, fid});
  }

  {
    std::vector<PureState> members;
    for (int k = 0; k < grid_points; ++k) members.push_back(family_b(k * step));
    double dev = 0.0, fid = 1.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        dev = std::max(dev, max_pair_marginal_deviation(members[i], members[j]));
        fid = std::min(fid, fidelity(members[i], members[j]));
      }
    }
    rows.push_back({"B", "a=0.5;r=1/sqrt2;s=-0.5", dev, fid});
  }

  {
    // a = 0: the sharing condition forces phi_s = phi_r, and the paired
    // states then coincide up to a global phase (fidelity stays 1).
    const cplx r = 1.0 / std::sqrt(2.0);
    const cplx s = 1.0 / std::sqrt(2.0);
    double dev = 0.0, fid = 1.0;
    for (int k = 0; k < grid_points; ++k) {
      const FamilyCPair pair = family_c(0.0, r, s, k * step, k * step);
      if (!pair.feasible) continue;
      dev = std::max(dev, max_pair_marginal_deviation(pair.psi, pair.phi_state));
      fid = std::min(fid, fidelity(pair.psi, pair.phi_state));
    }
    rows.push_back({"C", "a=0;r=1/sqrt2;s=1/sqrt2", dev, fid});
  }
  return rows;
}

std::string family_rows_to_csv(const std::vector<FamilyRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "family,parameters,max_marginal_deviation,min_pairwise_fidelity\n";
  for (const auto& row : rows) {
    out << row.family << "," << row.parameters << "," << row.max_marginal_deviation << ","
        << row.min_pairwise_fidelity << "\n";
  }
  return out.str();
}

}  // namespace qmarg
