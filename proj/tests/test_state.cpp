#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "metroscope/state.hpp"

using namespace metroscope;

namespace {

SuperpositionState single_term(const ProductTerm& term) {
  return SuperpositionState({{Complex{1.0, 0.0}, term}},
                            static_cast<int>(term.size()));
}

std::vector<FamilySpec> sample_specs() {
  return {
      {Family::CoherentCat, 2, {2.0, 0.0}},
      {Family::CoherentCat, 1, {0.5, 0.3}},
      {Family::CoherentEntangled, 3, {1.5, 0.0}},
      {Family::CoherentSeparable, 4, {2.0, -1.0}},
      {Family::NumberCat, 5, {}},
      {Family::NumberEntangled, 4, {}},
      {Family::NumberSeparable, 6, {}},
      {Family::Noon, 4, {}},
  };
}

}  // namespace

TEST_CASE("build_family: number cat N=3 has orthogonal 1/sqrt(2) terms") {
  const SuperpositionState state = build_family({Family::NumberCat, 3, {}});
  REQUIRE(state.term_count() == 2);
  CHECK(state.mode_count() == 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (const auto& wt : state.terms()) {
    CHECK(std::abs(wt.coefficient - Complex{inv_sqrt2, 0.0}) < 1e-15);
    CHECK(wt.term[0].is_number());
  }
  CHECK(state.terms()[0].term[0].occupation() == 0);
  CHECK(state.terms()[1].term[0].occupation() == 3);
}

TEST_CASE("build_family: coherent cat N=1 alpha=2 uses the exact Gram norm") {
  const SuperpositionState state =
      build_family({Family::CoherentCat, 1, {2.0, 0.0}});
  // Gram of {|0>, |2>}: unit diagonal, off-diagonal <0|2> = e^{-2}.
  const double expected = 1.0 / std::sqrt(2.0 + 2.0 * std::exp(-2.0));
  for (const auto& wt : state.terms())
    CHECK(std::abs(wt.coefficient - Complex{expected, 0.0}) < 1e-14);
}

TEST_CASE("build_family: noon N=4") {
  const SuperpositionState state = build_family({Family::Noon, 4, {}});
  REQUIRE(state.term_count() == 2);
  CHECK(state.mode_count() == 2);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(state.terms()[0].coefficient - Complex{inv_sqrt2, 0.0}) <
        1e-15);
  CHECK(state.terms()[0].term[0].occupation() == 0);
  CHECK(state.terms()[0].term[1].occupation() == 4);
  CHECK(state.terms()[1].term[0].occupation() == 4);
  CHECK(state.terms()[1].term[1].occupation() == 0);
}

TEST_CASE("build_family: separable expansion and cap") {
  const SuperpositionState state =
      build_family({Family::NumberSeparable, 5, {}});
  CHECK(state.term_count() == 32);
  CHECK(state.mode_count() == 5);

  try {
    build_family({Family::NumberSeparable, 21, {}});
    FAIL("expected term-count overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TermOverflow);
    CHECK(std::string(e.what()).find("2^21") != std::string::npos);
  }
  // A wider cap admits the same size.
  CHECK(build_family({Family::NumberSeparable, 21, {}}, 21).term_count() ==
        (1u << 21));
}

TEST_CASE("build_family rejects invalid specs") {
  CHECK_THROWS_AS(build_family({Family::CoherentCat, 1, {0.0, 0.0}}), Error);
  CHECK_THROWS_AS(build_family({Family::NumberCat, 0, {}}), Error);
}

TEST_CASE("inner_product: coherent overlap <0|alpha=1> = e^{-1/2}") {
  const SuperpositionState vac = single_term({ModeFactor::coherent({0.0, 0.0})});
  const SuperpositionState one = single_term({ModeFactor::coherent({1.0, 0.0})});
  const Complex ov = inner_product(vac, one);
  CHECK(std::abs(ov - Complex{0.6065306597126334, 0.0}) < 1e-14);
}

TEST_CASE("inner_product: number cats share only the vacuum component") {
  const SuperpositionState a = build_family({Family::NumberCat, 2, {}});
  const SuperpositionState b = build_family({Family::NumberCat, 3, {}});
  CHECK(std::abs(inner_product(a, b) - Complex{0.5, 0.0}) < 1e-14);
}

TEST_CASE("inner_product: every builtin family is unit norm") {
  for (const auto& spec : sample_specs()) {
    const SuperpositionState state = build_family(spec);
    const Complex norm_sq = inner_product(state, state);
    CHECK(std::abs(norm_sq - Complex{1.0, 0.0}) < 1e-12);
  }
}

TEST_CASE("inner_product: mode-count mismatch") {
  const SuperpositionState a = build_family({Family::NumberCat, 2, {}});
  const SuperpositionState b = build_family({Family::NumberEntangled, 3, {}});
  CHECK_THROWS_AS((void)inner_product(a, b), Error);
}

TEST_CASE("inner_product: Hermitian under swapping") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> uniform(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<WeightedTerm> ta, tb;
    for (int t = 0; t < 3; ++t) {
      ProductTerm term;
      term.push_back(ModeFactor::coherent({uniform(rng), uniform(rng)}));
      term.push_back(ModeFactor::number(static_cast<std::int64_t>(
          std::abs(uniform(rng)) * 2)));
      ta.push_back({Complex{uniform(rng), uniform(rng)}, term});
      ProductTerm term2;
      term2.push_back(ModeFactor::coherent({uniform(rng), uniform(rng)}));
      term2.push_back(ModeFactor::number(static_cast<std::int64_t>(
          std::abs(uniform(rng)) * 2)));
      tb.push_back({Complex{uniform(rng), uniform(rng)}, term2});
    }
    const SuperpositionState a(ta, 2);
    const SuperpositionState b(tb, 2);
    const Complex ab = inner_product(a, b);
    const Complex ba = inner_product(b, a);
    CHECK(std::abs(ab - std::conj(ba)) < 1e-12);
  }
}

TEST_CASE("global phase leaves |overlap| and mean photon unchanged") {
  const SuperpositionState state =
      build_family({Family::CoherentSeparable, 3, {1.2, 0.7}});
  const Complex phase = std::polar(1.0, 0.8371);
  std::vector<WeightedTerm> rotated(state.terms().begin(), state.terms().end());
  for (auto& wt : rotated) wt.coefficient *= phase;
  const SuperpositionState twin(rotated, state.mode_count());

  CHECK(std::abs(std::abs(inner_product(state, twin)) - 1.0) < 1e-12);
  CHECK(mean_photon_number(twin) ==
        doctest::Approx(mean_photon_number(state)).epsilon(1e-12));
}

TEST_CASE("mean_photon_number: number families are exact") {
  CHECK(mean_photon_number(build_family({Family::NumberEntangled, 6, {}})) ==
        doctest::Approx(3.0).epsilon(1e-14));
  CHECK(mean_photon_number(build_family({Family::NumberCat, 6, {}})) ==
        doctest::Approx(3.0).epsilon(1e-14));
  CHECK(mean_photon_number(build_family({Family::Noon, 5, {}})) ==
        doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("mean_photon_number: coherent entangled N=2 alpha=4") {
  const SuperpositionState state =
      build_family({Family::CoherentEntangled, 2, {4.0, 0.0}});
  const double mean = mean_photon_number(state);
  CHECK(std::abs(mean - 16.0) / 16.0 < 2e-7);
}

TEST_CASE("mean photon approaches the nominal value as alpha grows") {
  // The cross term scales as e^{-N|alpha|^2/2}, so at |alpha|^2 = 25 the
  // relative deviation is below 10 e^{-25/2} for every coherent family.
  const double alpha = 5.0;
  const double bound = 10.0 * std::exp(-12.5);
  for (Family family : {Family::CoherentCat, Family::CoherentEntangled,
                        Family::CoherentSeparable}) {
    for (int n : {1, 2, 3}) {
      const FamilySpec spec{family, n, {alpha, 0.0}};
      const double mean = mean_photon_number(build_family(spec));
      const double nominal = nominal_mean_photon(spec);
      CHECK(std::abs(mean - nominal) / nominal < bound);
    }
  }
  for (Family family : {Family::NumberCat, Family::NumberEntangled,
                        Family::NumberSeparable, Family::Noon}) {
    const FamilySpec spec{family, 6, {}};
    const double mean = mean_photon_number(build_family(spec));
    if (family == Family::Noon) {
      CHECK(mean == doctest::Approx(6.0).epsilon(1e-13));  // both terms hold N
    } else {
      CHECK(mean == doctest::Approx(nominal_mean_photon(spec)).epsilon(1e-13));
    }
  }
}

TEST_CASE("nominal_mean_photon") {
  CHECK(nominal_mean_photon({Family::CoherentSeparable, 3, {2.0, 0.0}}) ==
        doctest::Approx(6.0));
  CHECK(nominal_mean_photon({Family::NumberEntangled, 10, {}}) ==
        doctest::Approx(5.0));
  CHECK(nominal_mean_photon({Family::CoherentCat, 1, {0.0, 0.0}}) ==
        doctest::Approx(0.0));
}

TEST_CASE("Gram matrix of builtin families is positive semidefinite") {
  using Matrix = Eigen::MatrixXcd;
  for (double alpha : {0.5, 2.0, 8.0}) {
    for (const Family family :
         {Family::CoherentCat, Family::CoherentEntangled,
          Family::CoherentSeparable, Family::NumberCat,
          Family::NumberEntangled, Family::NumberSeparable, Family::Noon}) {
      const int n = family == Family::CoherentSeparable ||
                            family == Family::NumberSeparable
                        ? 10
                        : 6;
      const FamilySpec spec{family, n, {alpha, 0.0}};
      const SuperpositionState state = build_family(spec);
      const auto terms = state.terms();
      const auto dim = static_cast<Eigen::Index>(terms.size());
      Matrix gram(dim, dim);
      std::vector<SuperpositionState> singles;
      singles.reserve(terms.size());
      for (const auto& wt : terms) singles.push_back(single_term(wt.term));
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
          gram(i, j) = inner_product(singles[static_cast<std::size_t>(i)],
                                     singles[static_cast<std::size_t>(j)]);
      Eigen::SelfAdjointEigenSolver<Matrix> solver(gram,
                                                   Eigen::EigenvaluesOnly);
      CHECK(solver.eigenvalues().minCoeff() >= -1e-10);
    }
  }
}

TEST_CASE("state construction rejects bad input") {
  CHECK_THROWS_AS(ModeFactor::number(-1), Error);
  CHECK_THROWS_AS(ModeFactor::coherent({std::nan(""), 0.0}), Error);
  // No terms.
  CHECK_THROWS_AS(SuperpositionState({}, 1), Error);
  // All coefficients zero.
  CHECK_THROWS_AS(
      SuperpositionState({{Complex{0.0, 0.0}, {ModeFactor::number(0)}}}, 1),
      Error);
  // Ragged term length.
  CHECK_THROWS_AS(
      SuperpositionState({{Complex{1.0, 0.0}, {ModeFactor::number(0)}}}, 2),
      Error);
}

TEST_CASE("family names round-trip and bad names list the options") {
  for (const auto& spec : sample_specs())
    CHECK(parse_family(family_name(spec.family)) == spec.family);
  try {
    parse_family("squeezed");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("noon") != std::string::npos);
    CHECK(std::string(e.what()).find("coherent_cat") != std::string::npos);
  }
}
