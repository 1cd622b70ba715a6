#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "qmarg/families.hpp"
#include "qmarg/marginals.hpp"
#include "qmarg/sampling.hpp"
#include "qmarg/schmidt.hpp"
#include "qmarg/state_io.hpp"
#include "qmarg/types.hpp"

using namespace qmarg;

namespace {

PureState basis_state(const std::string& bits) {
  CVec v = CVec::Zero(1 << bits.size());
  int idx = 0;
  for (char c : bits) idx = idx * 2 + (c - '0');
  v[idx] = 1.0;
  return PureState(default_labels(static_cast<int>(bits.size())),
                   std::vector<int>(bits.size(), 2), std::move(v));
}

// Brute-force oracle: form the full dyad and sum the traced indices by
// explicit digit arithmetic. Independent of the library's stride tables.
CMat brute_partial_trace(const PureState& s, const std::vector<int>& keep) {
  const int n = s.num_parties();
  std::vector<int> traced;
  for (int p = 0; p < n; ++p) {
    if (std::find(keep.begin(), keep.end(), p) == keep.end()) traced.push_back(p);
  }
  auto digits = [&](Eigen::Index idx) {
    std::vector<int> out(n);
    for (int p = n - 1; p >= 0; --p) {
      out[p] = static_cast<int>(idx % s.dims[p]);
      idx /= s.dims[p];
    }
    return out;
  };
  Eigen::Index dk = 1;
  for (int p : keep) dk *= s.dims[p];
  CMat rho = CMat::Zero(dk, dk);
  const Eigen::Index dim = s.total_dim();
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      const auto da = digits(a);
      const auto db = digits(b);
      bool same_traced = true;
      for (int p : traced) same_traced &= da[p] == db[p];
      if (!same_traced) continue;
      Eigen::Index ra = 0, rb = 0;
      for (int p : keep) {
        ra = ra * s.dims[p] + da[p];
        rb = rb * s.dims[p] + db[p];
      }
      rho(ra, rb) += s.amplitudes[a] * std::conj(s.amplitudes[b]);
    }
  }
  return rho;
}

}  // namespace

TEST_CASE("partial trace of a product state") {
  const PureState s = basis_state("00");
  const auto keep_a = make_subsystem_set(s.labels, {"A"});
  const DensityOperator rho = partial_trace(s, keep_a);
  CHECK(rho.matrix.rows() == 2);
  CHECK(std::abs(rho.matrix(0, 0) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(rho.matrix.cwiseAbs().sum() == doctest::Approx(1.0));
  rho.validate();
}

TEST_CASE("partial trace in Schmidt form reproduces the coefficient mixture") {
  const auto gen = generic_schmidt_state(2, RandomSource(5));
  const auto keep = make_subsystem_set(gen.state.labels, {"A", "B"});
  const DensityOperator rho = partial_trace(gen.state, keep);
  CMat expected = CMat::Zero(4, 4);
  for (int k = 0; k < 4; ++k) {
    expected += gen.schmidt.coefficients[k] * gen.schmidt.left_basis.col(k) *
                gen.schmidt.left_basis.col(k).adjoint();
  }
  CHECK((rho.matrix - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("partial trace of W4 against the brute-force oracle and the closed form") {
  const PureState w = w4_state();
  const auto keep = make_subsystem_set(w.labels, {"A", "B"});
  const CMat got = partial_trace(w, keep).matrix;
  CHECK((got - brute_partial_trace(w, {0, 1})).cwiseAbs().maxCoeff() < 1e-14);

  // (1/2)|00><00| + (1/4)(|01>+|10>)(<01|+<10|)
  CMat expected = CMat::Zero(4, 4);
  expected(0, 0) = 0.5;
  for (int i : {1, 2}) {
    for (int j : {1, 2}) expected(i, j) = 0.25;
  }
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial trace input validation") {
  const PureState s = basis_state("0000");
  CHECK_THROWS_AS(make_subsystem_set(s.labels, {"X"}), std::invalid_argument);
  CHECK_THROWS_AS(make_subsystem_set(s.labels, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_subsystem_set(s.labels, {"A", "A"}), std::invalid_argument);
}

TEST_CASE("partial trace is linear and trace preserving") {
  const PureState s1 = haar_state({2, 2, 2}, RandomSource(31));
  const PureState s2 = haar_state({2, 2, 2}, RandomSource(32));
  const auto keep = make_subsystem_set(s1.labels, {"B"});

  DensityOperator full1{s1.labels, s1.dims, s1.amplitudes * s1.amplitudes.adjoint()};
  DensityOperator full2{s2.labels, s2.dims, s2.amplitudes * s2.amplitudes.adjoint()};
  DensityOperator mix{s1.labels, s1.dims, 0.3 * full1.matrix + 0.7 * full2.matrix};

  const CMat lhs = partial_trace(mix, keep).matrix;
  const CMat rhs =
      0.3 * partial_trace(full1, keep).matrix + 0.7 * partial_trace(full2, keep).matrix;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(lhs.trace() - mix.matrix.trace()) < 1e-12);
  partial_trace(mix, keep).validate();
}

TEST_CASE("schmidt decomposition of simple states") {
  SUBCASE("product state is rank one") {
    const PureState s = basis_state("0000");
    const auto sd = schmidt_decompose(s, make_subsystem_set(s.labels, {"A", "B"}));
    CHECK(sd.coefficients[0] == doctest::Approx(1.0));
    CHECK(sd.coefficients.tail(3).cwiseAbs().maxCoeff() < 1e-24);
    CHECK(sd.rank() == 1);
  }
  SUBCASE("Bell pair splits evenly") {
    CVec v = CVec::Zero(4);
    v[0] = v[3] = 1.0 / std::sqrt(2.0);
    const PureState bell(default_labels(2), {2, 2}, std::move(v));
    const auto sd = schmidt_decompose(bell, make_subsystem_set(bell.labels, {"A"}));
    CHECK(sd.coefficients[0] == doctest::Approx(0.5));
    CHECK(sd.coefficients[1] == doctest::Approx(0.5));
  }
  SUBCASE("Haar four-qubit state has full rank and distinct coefficients") {
    const PureState s = haar_state({2, 2, 2, 2}, RandomSource(77));
    const auto sd = schmidt_decompose(s, make_subsystem_set(s.labels, {"A", "B"}));
    CHECK(sd.rank() == 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        CHECK(std::abs(sd.coefficients[i] - sd.coefficients[j]) > 1e-8);
      }
    }
  }
}

TEST_CASE("schmidt reconstruction and orthonormality over random bipartitions") {
  const std::vector<std::vector<std::string>> lefts = {
      {"A", "B"}, {"A", "C"}, {"A", "D"}, {"B", "D"}, {"A"}, {"A", "B", "C"}};
  for (std::uint64_t k = 0; k < 12; ++k) {
    const PureState s = haar_state({2, 2, 2, 2}, RandomSource(900, k));
    const auto& left = lefts[k % lefts.size()];
    const auto sd = schmidt_decompose(s, make_subsystem_set(s.labels, left));

    CHECK(std::abs(sd.coefficients.sum() - 1.0) < 1e-12);
    for (Eigen::Index i = 0; i + 1 < sd.coefficients.size(); ++i) {
      CHECK(sd.coefficients[i] >= sd.coefficients[i + 1]);
    }
    const CMat gl = sd.left_basis.adjoint() * sd.left_basis;
    const CMat gr = sd.right_basis.adjoint() * sd.right_basis;
    CHECK((gl - CMat::Identity(gl.rows(), gl.cols())).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((gr - CMat::Identity(gr.rows(), gr.cols())).cwiseAbs().maxCoeff() < 1e-10);

    const PureState rec = sd.reconstruct(s.labels, s.dims);
    CHECK(fidelity(rec, s) >= 1.0 - 1e-10);
    // The expansion reproduces the state exactly, not only up to phase.
    CHECK((rec.amplitudes - s.amplitudes).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("schmidt bipartition validation") {
  const PureState s = basis_state("0000");
  CHECK_THROWS_AS(schmidt_decompose(s, make_subsystem_set(s.labels, {"A", "B"}),
                                    make_subsystem_set(s.labels, {"B", "C"})),
                  std::invalid_argument);
  CHECK_THROWS_AS(schmidt_decompose(s, make_subsystem_set(s.labels, {"A"}),
                                    make_subsystem_set(s.labels, {"B", "C"})),
                  std::invalid_argument);
}

TEST_CASE("marginal sets") {
  const PureState s = haar_state({2, 2, 2, 2}, RandomSource(4));
  const auto config = parse_config(s, "AB,CD,BD");
  const MarginalSet ms = marginal_set(s, config);
  REQUIRE(ms.size() == 3);
  for (const auto& m : ms.marginals) {
    CHECK(m.matrix.rows() == 4);
    CHECK(std::abs(m.matrix.trace() - cplx(1.0, 0.0)) < 1e-12);
    m.validate();
  }

  CHECK(all_pair_sets(s).size() == 6);

  const MarginalSet zero = marginal_set(basis_state("0000"), parse_config(s, "AB"));
  CHECK(std::abs(zero.marginals[0].matrix(0, 0) - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("marginal distance") {
  const PureState s = haar_state({2, 2, 2, 2}, RandomSource(8));
  const auto config = parse_config(s, "AB,CD");
  const MarginalSet m = marginal_set(s, config);
  CHECK(marginal_distance(m, m) == 0.0);

  SUBCASE("orthogonal projectors are sqrt(2) apart") {
    const PureState zero = basis_state("0");
    CVec one_amps = CVec::Zero(2);
    one_amps[1] = 1.0;
    const PureState one({"A"}, {2}, std::move(one_amps));
    const auto cfg = parse_config(zero, "A");
    CHECK(marginal_distance(marginal_set(zero, cfg), marginal_set(one, cfg)) ==
          doctest::Approx(std::sqrt(2.0)));
  }

  SUBCASE("family A members coincide on every pair marginal") {
    const double t = 1.0 / std::sqrt(3.0);
    const PureState a0 = family_a(t, t, t, 0.0);
    const PureState a1 = family_a(t, t, t, 3.14159);
    const auto pairs = all_pair_sets(a0);
    CHECK(marginal_distance(marginal_set(a0, pairs), marginal_set(a1, pairs)) <= 1e-10);
  }

  SUBCASE("config mismatch throws") {
    const auto other = marginal_set(s, parse_config(s, "AB,BD"));
    CHECK_THROWS_AS(marginal_distance(m, other), std::invalid_argument);
  }

  SUBCASE("metric properties on random triples") {
    const auto cfg = parse_config(s, "AB,CD,BD");
    for (std::uint64_t k = 0; k < 5; ++k) {
      const auto ma = marginal_set(haar_state({2, 2, 2, 2}, RandomSource(100, 3 * k)), cfg);
      const auto mb = marginal_set(haar_state({2, 2, 2, 2}, RandomSource(100, 3 * k + 1)), cfg);
      const auto mc = marginal_set(haar_state({2, 2, 2, 2}, RandomSource(100, 3 * k + 2)), cfg);
      const double ab = marginal_distance(ma, mb);
      const double ba = marginal_distance(mb, ma);
      CHECK(ab == doctest::Approx(ba));
      CHECK(marginal_distance(ma, mc) <= ab + marginal_distance(mb, mc) + 1e-12);
    }
  }
}

TEST_CASE("fidelity") {
  const PureState s = haar_state({2, 2, 2, 2}, RandomSource(21));
  SUBCASE("global phase is invisible") {
    CVec rotated = s.amplitudes * std::polar(1.0, 1.234);
    const PureState t(s.labels, s.dims, std::move(rotated));
    CHECK(fidelity(s, t) == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal basis states") {
    CVec one_amps = CVec::Zero(2);
    one_amps[1] = 1.0;
    CHECK(fidelity(basis_state("0"), PureState({"A"}, {2}, std::move(one_amps))) ==
          doctest::Approx(0.0));
  }
  SUBCASE("a local rotation moves a generic state") {
    const CMat u = haar_unitary(2, RandomSource(22));
    const PureState t = apply_local_unitaries(s, {{"D", u}});
    CHECK(fidelity(s, t) < 1.0 - 1e-6);
    // Direct inner product oracle.
    CHECK(fidelity(s, t) == doctest::Approx(std::abs(s.amplitudes.dot(t.amplitudes))));
  }
  SUBCASE("register mismatch throws") {
    CHECK_THROWS_AS(fidelity(s, basis_state("000")), std::invalid_argument);
  }
}

TEST_CASE("local unitaries") {
  const PureState s = haar_state({2, 2, 2, 2}, RandomSource(55));
  SUBCASE("identity map") {
    const PureState t = apply_local_unitaries(s, {{"A", CMat::Identity(2, 2)}});
    CHECK((t.amplitudes - s.amplitudes).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("rotating D leaves the D-free marginals alone") {
    const CMat u = haar_unitary(2, RandomSource(56));
    const PureState t = apply_local_unitaries(s, {{"D", u}});
    for (const char* pair : {"AB", "AC", "BC"}) {
      const auto set = make_subsystem_set(s.labels, split_label_token(s.labels, pair));
      CHECK((partial_trace(s, set).matrix - partial_trace(t, set).matrix).cwiseAbs().maxCoeff() <
            1e-12);
    }
    // All marginals transform by conjugation.
    const auto d_set = make_subsystem_set(s.labels, {"D"});
    const CMat expected = u * partial_trace(s, d_set).matrix * u.adjoint();
    CHECK((partial_trace(t, d_set).matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("bit flip on A") {
    CMat x(2, 2);
    x << 0, 1, 1, 0;
    const PureState t = apply_local_unitaries(basis_state("0000"), {{"A", x}});
    CHECK(std::abs(t.amplitudes[8] - cplx(1.0, 0.0)) < 1e-15);
  }
  SUBCASE("non-unitary input throws") {
    CMat bad(2, 2);
    bad << 1, 0, 0, 2;
    CHECK_THROWS_AS(apply_local_unitaries(s, {{"A", bad}}), std::invalid_argument);
  }
}

TEST_CASE("pure state invariants") {
  CHECK_THROWS_AS(PureState({"A"}, {2}, CVec::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(PureState({"A"}, {2}, CVec::Ones(3)), std::invalid_argument);
  CHECK_THROWS_AS(PureState({"A", "A"}, {2, 2}, CVec::Ones(4) / 2.0), std::invalid_argument);
  const PureState ok = PureState::normalized({"A"}, {2}, CVec::Ones(2));
  CHECK(std::abs(ok.amplitudes.squaredNorm() - 1.0) < 1e-12);
}

TEST_CASE("state JSON round trip and validation") {
  const PureState s = haar_state({2, 2, 2, 2}, RandomSource(404));
  const std::string text = state_to_json(s);
  const PureState back = state_from_json(text);
  CHECK(back.labels == s.labels);
  CHECK(back.dims == s.dims);
  CHECK((back.amplitudes - s.amplitudes).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("non-normalized input is rejected unless renormalize is set") {
    std::string bad = R"({"labels":["A"],"dims":[2],"re":[1.0,1.0],"im":[0.0,0.0]})";
    CHECK_THROWS(state_from_json(bad));
    const PureState fixed = state_from_json(bad, true);
    CHECK(fixed.amplitudes[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  }
  SUBCASE("missing keys are rejected") {
    CHECK_THROWS(state_from_json(R"({"labels":["A"],"dims":[2]})"));
    CHECK_THROWS(state_from_json("not json"));
  }
}

TEST_CASE("config parsing handles multi-character labels") {
  const PureState s = haar_state({2, 2, 2, 2, 2}, RandomSource(5050));
  REQUIRE(s.labels == std::vector<std::string>{"A", "B", "C", "D", "E1"});
  const auto sets = parse_config(s, "ABE1,CDE1");
  CHECK(sets[0].labels == std::vector<std::string>{"A", "B", "E1"});
  CHECK(sets[1].labels == std::vector<std::string>{"C", "D", "E1"});
  CHECK_THROWS_AS(parse_config(s, "AZ"), std::invalid_argument);
}
