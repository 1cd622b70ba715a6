#include "qmarg/marginals.hpp"

#include <cmath>
#include <stdexcept>

namespace qmarg {

std::vector<Eigen::Index> subsystem_offsets(const std::vector<int>& dims,
                                            const std::vector<int>& positions) {
  const auto strides = index_strides(dims);
  std::vector<int> sub_dims;
  sub_dims.reserve(positions.size());
  for (int p : positions) sub_dims.push_back(dims[p]);
  const Eigen::Index total = dims_product(sub_dims);

  std::vector<Eigen::Index> offsets(static_cast<std::size_t>(total), 0);
  Eigen::Index repeat = total;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const int d = sub_dims[k];
    repeat /= d;
    const Eigen::Index stride = strides[positions[k]];
    for (Eigen::Index m = 0; m < total; ++m) {
      offsets[m] += ((m / repeat) % d) * stride;
    }
  }
  return offsets;
}

namespace {

std::vector<int> select_dims(const std::vector<int>& dims, const std::vector<int>& positions) {
  std::vector<int> out;
  out.reserve(positions.size());
  for (int p : positions) out.push_back(dims[p]);
  return out;
}

}  // namespace

DensityOperator partial_trace(const PureState& state, const SubsystemSet& keep) {
  const auto traced = complement_positions(keep, state.num_parties());
  const auto keep_off = subsystem_offsets(state.dims, keep.positions);
  const auto traced_off = subsystem_offsets(state.dims, traced);
  const auto nk = static_cast<Eigen::Index>(keep_off.size());

  CMat rho = CMat::Zero(nk, nk);
  for (Eigen::Index m = 0; m < nk; ++m) {
    for (Eigen::Index mp = 0; mp <= m; ++mp) {
      cplx acc = 0.0;
      for (const Eigen::Index t : traced_off) {
        acc += state.amplitudes[keep_off[m] + t] * std::conj(state.amplitudes[keep_off[mp] + t]);
      }
      rho(m, mp) = acc;
      if (mp != m) rho(mp, m) = std::conj(acc);
    }
  }
  return DensityOperator{keep.labels, select_dims(state.dims, keep.positions), std::move(rho)};
}

DensityOperator partial_trace(const DensityOperator& rho, const SubsystemSet& keep) {
  const auto traced = complement_positions(keep, static_cast<int>(rho.dims.size()));
  const auto keep_off = subsystem_offsets(rho.dims, keep.positions);
  const auto traced_off = subsystem_offsets(rho.dims, traced);
  const auto nk = static_cast<Eigen::Index>(keep_off.size());

  CMat out = CMat::Zero(nk, nk);
  for (Eigen::Index m = 0; m < nk; ++m) {
    for (Eigen::Index mp = 0; mp < nk; ++mp) {
      cplx acc = 0.0;
      for (const Eigen::Index t : traced_off) {
        acc += rho.matrix(keep_off[m] + t, keep_off[mp] + t);
      }
      out(m, mp) = acc;
    }
  }
  return DensityOperator{keep.labels, select_dims(rho.dims, keep.positions), std::move(out)};
}

MarginalSet marginal_set(const PureState& state, const std::vector<SubsystemSet>& config) {
  MarginalSet out;
  out.sets = config;
  out.marginals.reserve(config.size());
  for (const auto& s : config) out.marginals.push_back(partial_trace(state, s));
  return out;
}

std::vector<SubsystemSet> all_pair_sets(const PureState& state) {
  std::vector<SubsystemSet> out;
  const int n = state.num_parties();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      out.push_back(make_subsystem_set(state.labels, {state.labels[i], state.labels[j]}));
    }
  }
  return out;
}

double marginal_distance(const MarginalSet& m1, const MarginalSet& m2) {
  if (m1.sets.size() != m2.sets.size()) {
    throw std::invalid_argument("marginal_distance: configs differ in size");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < m1.sets.size(); ++k) {
    if (!(m1.sets[k] == m2.sets[k])) {
      throw std::invalid_argument("marginal_distance: config mismatch at entry " +
                                  std::to_string(k));
    }
    acc += (m1.marginals[k].matrix - m2.marginals[k].matrix).squaredNorm();
  }
  return std::sqrt(acc);
}

double fidelity(const PureState& s1, const PureState& s2) {
  if (s1.labels != s2.labels || s1.dims != s2.dims) {
    throw std::invalid_argument("fidelity: states live on different registers");
  }
  return std::abs(s1.amplitudes.dot(s2.amplitudes));
}

PureState apply_local_unitaries(const PureState& state,
                                const std::map<std::string, CMat>& unitaries) {
  CVec amps = state.amplitudes;
  const auto strides = index_strides(state.dims);
  for (const auto& [label, u] : unitaries) {
    const int pos = state.position_of(label);
    const int d = state.dims[pos];
    if (u.rows() != d || u.cols() != d) {
      throw std::invalid_argument("apply_local_unitaries: matrix for " + label +
                                  " does not match the subsystem dimension");
    }
    if ((u.adjoint() * u - CMat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
      throw std::invalid_argument("apply_local_unitaries: matrix for " + label +
                                  " is not unitary within 1e-10");
    }
    const Eigen::Index stride = strides[pos];
    const Eigen::Index block = stride * d;
    CVec tmp(d);
    for (Eigen::Index base = 0; base < amps.size(); base += block) {
      for (Eigen::Index inner = 0; inner < stride; ++inner) {
        const Eigen::Index anchor = base + inner;
        for (int i = 0; i < d; ++i) tmp[i] = amps[anchor + i * stride];
        for (int i = 0; i < d; ++i) {
          cplx acc = 0.0;
          for (int j = 0; j < d; ++j) acc += u(i, j) * tmp[j];
          amps[anchor + i * stride] = acc;
        }
      }
    }
  }
  return PureState(state.labels, state.dims, std::move(amps));
}

CMat dyad_partial_trace(const PureState& a, const PureState& b, const SubsystemSet& keep) {
  if (a.dims != b.dims) {
    throw std::invalid_argument("dyad_partial_trace: register mismatch");
  }
  const auto traced = complement_positions(keep, a.num_parties());
  const auto keep_off = subsystem_offsets(a.dims, keep.positions);
  const auto traced_off = subsystem_offsets(a.dims, traced);
  const auto nk = static_cast<Eigen::Index>(keep_off.size());

  CMat out(nk, nk);
  for (Eigen::Index m = 0; m < nk; ++m) {
    for (Eigen::Index mp = 0; mp < nk; ++mp) {
      cplx acc = 0.0;
      for (const Eigen::Index t : traced_off) {
        acc += a.amplitudes[keep_off[m] + t] * std::conj(b.amplitudes[keep_off[mp] + t]);
      }
      out(m, mp) = acc;
    }
  }
  return out;
}

CVec apply_operator_on(const CVec& amps, const std::vector<int>& dims,
                       const std::vector<int>& positions, const CMat& op) {
  std::vector<int> rest;
  {
    auto it = positions.begin();
    for (int p = 0; p < static_cast<int>(dims.size()); ++p) {
      if (it != positions.end() && *it == p) {
        ++it;
      } else {
        rest.push_back(p);
      }
    }
  }
  const auto on_off = subsystem_offsets(dims, positions);
  const auto rest_off = subsystem_offsets(dims, rest);
  const auto nk = static_cast<Eigen::Index>(on_off.size());
  if (op.rows() != nk || op.cols() != nk) {
    throw std::invalid_argument("apply_operator_on: operator does not match the sub-register");
  }

  CVec out = CVec::Zero(amps.size());
  for (const Eigen::Index t : rest_off) {
    for (Eigen::Index mp = 0; mp < nk; ++mp) {
      cplx acc = 0.0;
      for (Eigen::Index m = 0; m < nk; ++m) acc += op(mp, m) * amps[on_off[m] + t];
      out[on_off[mp] + t] = acc;
    }
  }
  return out;
}

}  // namespace qmarg
