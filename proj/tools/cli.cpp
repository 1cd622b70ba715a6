#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmarg/certify.hpp"
#include "qmarg/families.hpp"
#include "qmarg/marginals.hpp"
#include "qmarg/sampling.hpp"
#include "qmarg/search.hpp"
#include "qmarg/state_io.hpp"

namespace qmarg {

namespace {

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) dims.push_back(std::stoi(token));
  }
  if (dims.empty()) throw std::runtime_error("empty --dims");
  return dims;
}

void add_tolerance_flags(CLI::App* cmd, Tolerances* tol) {
  cmd->add_option("--tol-marginal-match", tol->marginal_match,
                  "marginal distance accepted for witnesses / oracle zeros");
  cmd->add_option("--tol-gap", tol->gap, "pairwise Schmidt-coefficient gap for genericity");
  cmd->add_option("--tol-kernel", tol->kernel_rel, "relative SVD cutoff for the nullspace");
  cmd->add_option("--tol-span", tol->span_rel, "relative SVD cutoff for the operator span");
  cmd->add_option("--tol-rank", tol->rank_rel, "relative singular-value cutoff for ranks");
  cmd->add_option("--tol-newton-residual", tol->newton_residual,
                  "max residual of an accepted compatibility root");
  cmd->add_option("--tol-phase-equal", tol->phase_equal,
                  "phases within this of zero count as all-equal");
  cmd->add_option("--tol-distinct-mismatch", tol->distinct_mismatch,
                  "survey: marginal mismatch below which a candidate is compatible");
  cmd->add_option("--tol-distinct-fidelity-gap", tol->distinct_fidelity_gap,
                  "survey: fidelity gap above which a candidate is distinct");
}

struct CliState {
  // sample
  std::string sample_dims = "2,2,2,2";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t stream = 0;
  std::string output;
  // marginals
  std::string state_path;
  std::string config;
  bool renormalize = false;
  // certify
  int d = 2;
  int restarts = 50;
  int torus_restarts = 50;
  int mixing_restarts = 30;
  // families
  int grid = 20;
  // survey
  int states = 20;
  int jobs = 1;
  // corollary
  int n = 5;
  Tolerances tol;
};

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"qmarg - uniqueness of pure states from their few-body marginals"};
  app.require_subcommand(1);
  CliState st;

  auto* sample = app.add_subcommand("sample", "draw a Haar-random state and emit its JSON");
  sample->add_option("--dims", st.sample_dims, "comma-separated local dimensions")
      ->capture_default_str();
  sample->add_option("--seed", st.seed, "RNG seed")->required();
  sample->add_option("--stream", st.stream, "RNG stream id")->capture_default_str();
  sample->add_option("-o,--output", st.output, "output file (default stdout)");

  auto* marginals_cmd = app.add_subcommand("marginals", "compute marginals of a state file");
  marginals_cmd->add_option("state", st.state_path, "state JSON file")->required();
  marginals_cmd->add_option("--config", st.config, "e.g. AB or AB,CD,BD")->required();
  marginals_cmd->add_flag("--renormalize", st.renormalize,
                          "accept non-normalized input and rescale");
  marginals_cmd->add_option("-o,--output", st.output, "output file (default stdout)");

  auto* certify_cmd =
      app.add_subcommand("certify", "decide uniqueness among pure states for a config");
  certify_cmd->add_option("--state", st.state_path, "state JSON file (otherwise Haar draw)");
  certify_cmd->add_option("--seed", st.seed, "RNG seed (required; also draws the state)")
      ->required();
  certify_cmd->add_option("--stream", st.stream, "RNG stream id")->capture_default_str();
  certify_cmd->add_option("--d", st.d, "local dimension of the Haar draw")
      ->capture_default_str();
  certify_cmd->add_option("--config", st.config, "three two-body marginals, e.g. AB,CD,BD")
      ->capture_default_str()
      ->default_val("AB,CD,BD");
  certify_cmd->add_option("--restarts", st.restarts, "compatibility Newton restarts")
      ->capture_default_str();
  certify_cmd->add_option("--torus-restarts", st.torus_restarts, "torus oracle restarts")
      ->capture_default_str();
  certify_cmd->add_option("--mixing-restarts", st.mixing_restarts,
                          "degenerate-cluster witness restarts")
      ->capture_default_str();
  certify_cmd->add_flag("--renormalize", st.renormalize,
                        "accept non-normalized state input and rescale");
  certify_cmd->add_option("-o,--output", st.output, "output file (default stdout)");
  add_tolerance_flags(certify_cmd, &st.tol);

  auto* families_cmd =
      app.add_subcommand("families", "verify the shared-marginal state families");
  auto* families_verify = families_cmd->add_subcommand("verify", "emit the verification CSV");
  families_cmd->add_option("--grid", st.grid, "phase grid points")->capture_default_str();
  families_verify->add_option("--grid", st.grid, "phase grid points");
  families_cmd->add_option("-o,--output", st.output, "output file (default stdout)");
  families_verify->add_option("-o,--output", st.output, "output file (default stdout)");

  auto* survey_cmd =
      app.add_subcommand("survey", "search random states for distinct compatible siblings");
  survey_cmd->add_option("--config", st.config, "marginal config, e.g. AB,AC,AD")->required();
  survey_cmd->add_option("--states", st.states, "number of Haar-random states")
      ->capture_default_str();
  survey_cmd->add_option("--restarts", st.restarts, "optimizer restarts per state")
      ->capture_default_str();
  survey_cmd->add_option("--seed", st.seed, "RNG seed")->required();
  survey_cmd->add_option("--stream", st.stream, "RNG stream id")->capture_default_str();
  survey_cmd->add_option("--jobs", st.jobs, "parallel trials")->capture_default_str();
  survey_cmd->add_option("-o,--output", st.output, "output file (default stdout)");
  add_tolerance_flags(survey_cmd, &st.tol);

  auto* corollary_cmd =
      app.add_subcommand("corollary", "n-particle reduction check (n = 5 or 6)");
  corollary_cmd->add_option("--n", st.n, "number of parties")->capture_default_str();
  corollary_cmd->add_option("--seed", st.seed, "RNG seed")->required();
  corollary_cmd->add_option("--stream", st.stream, "RNG stream id")->capture_default_str();
  corollary_cmd->add_option("--restarts", st.restarts, "certifier restarts")
      ->capture_default_str();
  corollary_cmd->add_option("-o,--output", st.output, "output file (default stdout)");
  add_tolerance_flags(corollary_cmd, &st.tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (sample->parsed()) {
      const PureState state = haar_state(parse_dims(st.sample_dims),
                                         RandomSource(st.seed, st.stream));
      write_output(state_to_json(state), st.output);
      return 0;
    }

    if (marginals_cmd->parsed()) {
      const PureState state = load_state(st.state_path, st.renormalize);
      const auto sets = parse_config(state, st.config);
      const MarginalSet ms = marginal_set(state, sets);
      nlohmann::json j;
      j["config"] = st.config;
      j["marginals"] = nlohmann::json::array();
      for (std::size_t k = 0; k < ms.size(); ++k) {
        j["marginals"].push_back(nlohmann::json::parse(density_to_json(ms.marginals[k])));
      }
      write_output(j.dump(2), st.output);
      return 0;
    }

    if (certify_cmd->parsed()) {
      PureState state = st.state_path.empty()
                            ? haar_state(std::vector<int>(4, st.d),
                                         RandomSource(st.seed, st.stream).substream(0))
                            : load_state(st.state_path, st.renormalize);
      const auto config = parse_config(state, st.config);
      CertifyOptions options;
      options.compat_restarts = st.restarts;
      options.torus_restarts = st.torus_restarts;
      options.mixing_restarts = st.mixing_restarts;
      options.tol = st.tol;
      const UdpCertificate cert =
          certify(state, config, RandomSource(st.seed, st.stream).substream(1), options);
      write_output(certificate_to_json(cert), st.output);
      return cert.verdict == Verdict::kInconclusive ? 2 : 0;
    }

    if (families_cmd->parsed()) {
      write_output(family_rows_to_csv(verify_families(st.grid)), st.output);
      return 0;
    }

    if (survey_cmd->parsed()) {
      SearchOptions options;
      options.tol = st.tol;
      const SurveyTable table = survey(st.config, st.states, st.restarts,
                                       RandomSource(st.seed, st.stream), st.jobs, options);
      write_output(survey_to_csv(table), st.output);
      return 0;
    }

    if (corollary_cmd->parsed()) {
      CertifyOptions options;
      options.compat_restarts = st.restarts;
      options.tol = st.tol;
      const CorollaryReport report =
          corollary_check(st.n, RandomSource(st.seed, st.stream), options);
      write_output(corollary_report_to_json(report), st.output);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace qmarg
