#include "qmarg/state_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qmarg {

using nlohmann::json;

std::string state_to_json(const PureState& state) {
  json j;
  j["labels"] = state.labels;
  j["dims"] = state.dims;
  std::vector<double> re(state.amplitudes.size()), im(state.amplitudes.size());
  for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
    re[i] = state.amplitudes[i].real();
    im[i] = state.amplitudes[i].imag();
  }
  j["re"] = re;
  j["im"] = im;
  return j.dump();
}

PureState state_from_json(const std::string& text, bool renormalize) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("state JSON parse error: ") + e.what());
  }
  for (const char* key : {"labels", "dims", "re", "im"}) {
    if (!j.contains(key)) throw std::runtime_error(std::string("state JSON missing key ") + key);
  }
  const auto labels = j["labels"].get<std::vector<std::string>>();
  const auto dims = j["dims"].get<std::vector<int>>();
  const auto re = j["re"].get<std::vector<double>>();
  const auto im = j["im"].get<std::vector<double>>();
  if (re.size() != im.size()) throw std::runtime_error("state JSON: re/im length mismatch");

  CVec amps(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) amps[static_cast<Eigen::Index>(i)] = cplx(re[i], im[i]);

  const double norm = amps.norm();
  if (std::abs(norm - 1.0) > 1e-8) {
    if (!renormalize) {
      throw std::runtime_error("state JSON is not normalized (deviation " +
                               std::to_string(std::abs(norm - 1.0)) +
                               "); pass --renormalize to accept");
    }
    if (norm == 0.0) throw std::runtime_error("state JSON: zero vector");
    amps /= norm;
  } else if (norm != 1.0 && norm > 0.0) {
    amps /= norm;  // remove harmless rounding so the PureState invariant holds
  }
  return PureState(labels, dims, std::move(amps));
}

void save_state(const PureState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << state_to_json(state) << "\n";
}

PureState load_state(const std::string& path, bool renormalize) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return state_from_json(text, renormalize);
}

std::string density_to_json(const DensityOperator& rho) {
  json j;
  j["labels"] = rho.labels;
  j["dims"] = rho.dims;
  const Eigen::Index n = rho.matrix.rows();
  std::vector<double> re, im;
  re.reserve(n * n);
  im.reserve(n * n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      re.push_back(rho.matrix(r, c).real());
      im.push_back(rho.matrix(r, c).imag());
    }
  }
  j["re"] = re;
  j["im"] = im;
  return j.dump();
}

}  // namespace qmarg
