#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "metroscope/metrology.hpp"

using namespace metroscope;

namespace {

constexpr double kPi = std::numbers::pi;
const SeriesBudget kBudget{1e-12, 100000};

ThetaMinResult solve(const FamilySpec& spec, double k, Scenario scenario,
                     double delta, double theta_max = 0.0) {
  const SuperpositionState state = build_family(spec);
  const EvolutionSpec evolution = make_evolution(spec, k, scenario);
  ThetaMinRequest request;
  request.delta = delta;
  request.theta_max =
      theta_max > 0.0 ? theta_max : 4.0 * kPi * double(spec.size);
  return theta_min(state, evolution, request, kBudget);
}

}  // namespace

TEST_CASE("distinguishability: worked number-family points") {
  const SuperpositionState cat4 = build_family({Family::NumberCat, 4, {}});
  const EvolutionSpec linear = EvolutionSpec::per_mode(1.0, {1.0});
  CHECK(distinguishability(cat4, linear, 0.0, kBudget) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(distinguishability(cat4, linear, kPi / 8.0, kBudget) ==
        doctest::Approx(0.5).epsilon(1e-12));

  const SuperpositionState ent4 =
      build_family({Family::NumberEntangled, 4, {}});
  const EvolutionSpec kerr =
      EvolutionSpec::per_mode(2.0, {1.0, 1.0, 1.0, 1.0});
  CHECK(distinguishability(ent4, kerr, kPi / 4.0, kBudget) <= 1e-12);
}

TEST_CASE("analytic_distinguishability: closed forms") {
  CHECK(analytic_distinguishability({Family::CoherentCat, 2, {2.0, 0.0}}, 1.0,
                                    kPi / 8.0) <= 1e-15);
  CHECK(analytic_distinguishability({Family::NumberSeparable, 3, {}}, 5.0,
                                    kPi) <= 1e-15);
  for (Family family : {Family::CoherentCat, Family::CoherentEntangled,
                        Family::CoherentSeparable, Family::NumberCat,
                        Family::NumberEntangled, Family::NumberSeparable,
                        Family::Noon}) {
    const Complex alpha =
        family_is_coherent(family) ? Complex{1.5, 0.0} : Complex{};
    CHECK(analytic_distinguishability({family, 3, alpha}, 2.0, 0.0) ==
          doctest::Approx(1.0));
  }
}

TEST_CASE("numeric d equals the closed number-family forms to 1e-12") {
  for (Family family : {Family::NumberCat, Family::NumberEntangled,
                        Family::NumberSeparable}) {
    for (int n : {2, 5, 9, 16}) {
      if (family == Family::NumberSeparable && n > 9) continue;  // acceptance covers 16
      const FamilySpec spec{family, n, {}};
      const SuperpositionState state = build_family(spec);
      for (double k : {0.5, 1.0, 2.0, 3.0}) {
        const EvolutionSpec evolution =
            make_evolution(spec, k, Scenario::EqualAction);
        // One full oscillation of each family's closed form.
        const double period = family == Family::NumberCat
                                  ? 2.0 * kPi / occupation_phase(n, k)
                                  : (family == Family::NumberEntangled
                                         ? 2.0 * kPi / double(n)
                                         : 2.0 * kPi);
        for (int i = 1; i <= 50; ++i) {
          const double theta = period * double(i) / 50.0;
          const double numeric =
              distinguishability(state, evolution, theta, kBudget);
          const double analytic =
              analytic_distinguishability(spec, k, theta);
          CHECK(std::abs(numeric - analytic) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("theta_min: first zero of the number-cat cosine") {
  const ThetaMinResult r =
      solve({Family::NumberCat, 8, {}}, 1.0, Scenario::EqualAction, 0.0);
  CHECK(std::abs(r.theta_min - kPi / 8.0) < 1e-8);
  CHECK(r.achieved_d <= 1e-8);
  CHECK(r.bracket_lo <= r.theta_min);
  CHECK(r.bracket_hi >= r.theta_min);
  CHECK(r.crossings_found == 1);
}

TEST_CASE("theta_min: number-entangled Kerr case") {
  const ThetaMinResult r =
      solve({Family::NumberEntangled, 8, {}}, 2.0, Scenario::EqualAction, 0.0);
  CHECK(std::abs(r.theta_min - kPi / 8.0) < 1e-8);
}

TEST_CASE("theta_min: delta = 1/2 crossing of the number cat") {
  const ThetaMinResult r =
      solve({Family::NumberCat, 4, {}}, 1.0, Scenario::EqualAction, 0.5);
  CHECK(std::abs(r.theta_min - kPi / 8.0) < 1e-8);
  CHECK(r.achieved_d <= 0.5 + 1e-8);
  // Everything left of the bracket stayed above the threshold.
  const SuperpositionState state = build_family({Family::NumberCat, 4, {}});
  const EvolutionSpec evolution = EvolutionSpec::per_mode(1.0, {1.0});
  for (double frac : {0.25, 0.5, 0.9}) {
    CHECK(distinguishability(state, evolution, frac * r.bracket_lo, kBudget) >
          0.5);
  }
}

TEST_CASE("theta_min: no crossing reports the observed minimum") {
  // The collective generator dephases both N00N components identically, so
  // d stays at 1.
  const FamilySpec spec{Family::Noon, 4, {}};
  const SuperpositionState state = build_family(spec);
  const EvolutionSpec evolution = EvolutionSpec::collective(1.0, 1.0, 2);
  ThetaMinRequest request;
  request.delta = 0.0;
  request.theta_max = 1.0;
  try {
    (void)theta_min(state, evolution, request, kBudget);
    FAIL("expected no-crossing error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoCrossing);
    CHECK(std::string(e.what()).find("no crossing") != std::string::npos);
  }
}

TEST_CASE("theta_min: request validation") {
  const FamilySpec spec{Family::NumberCat, 4, {}};
  const SuperpositionState state = build_family(spec);
  const EvolutionSpec evolution = EvolutionSpec::per_mode(1.0, {1.0});
  ThetaMinRequest request;
  request.delta = 1.0;
  request.theta_max = 1.0;
  CHECK_THROWS_AS((void)theta_min(state, evolution, request, kBudget), Error);
  request.delta = 0.0;
  request.theta_max = 0.0;
  CHECK_THROWS_AS((void)theta_min(state, evolution, request, kBudget), Error);

  // Non-unit-norm states are rejected.
  const SuperpositionState unnormalized(
      {{Complex{2.0, 0.0}, {ModeFactor::number(0)}},
       {Complex{2.0, 0.0}, {ModeFactor::number(4)}}},
      1);
  request.theta_max = 1.0;
  CHECK_THROWS_AS((void)theta_min(unnormalized, evolution, request, kBudget),
                  Error);
}

TEST_CASE("numeric and analytic d converge as the amplitude grows") {
  for (Family family : {Family::CoherentCat, Family::CoherentEntangled}) {
    for (int n : {2, 4}) {
      for (double k : {1.0, 2.0}) {
        double previous = 1e300;
        for (double alpha_sq : {16.0, 32.0, 64.0}) {
          const FamilySpec spec{family, n, {std::sqrt(alpha_sq), 0.0}};
          const SuperpositionState state = build_family(spec);
          const EvolutionSpec evolution =
              make_evolution(spec, k, Scenario::EqualAction);
          const double theta =
              predicted_theta_min(spec, k, Scenario::EqualAction, 0.0) / 2.0;
          const double gap =
              std::abs(distinguishability(state, evolution, theta, kBudget) -
                       analytic_distinguishability(spec, k, theta));
          CHECK(gap < previous);
          previous = gap;
        }
      }
    }
  }
}

TEST_CASE("N00N with weights (1, 0) reproduces the single-mode number cat") {
  for (int n : {4, 8, 12}) {
    for (double k : {1.0, 2.0}) {
      const ThetaMinResult noon =
          solve({Family::Noon, n, {}}, k, Scenario::EqualAction, 0.0);
      const ThetaMinResult cat =
          solve({Family::NumberCat, n, {}}, k, Scenario::EqualAction, 0.0);
      CHECK(std::abs(noon.theta_min - cat.theta_min) < 1e-8);
    }
  }
}

TEST_CASE("collective generator restores the cat scaling for entangled "
          "coherent states") {
  const FamilySpec spec{Family::CoherentEntangled, 2, {8.0, 0.0}};
  const ThetaMinResult r = solve(spec, 2.0, Scenario::Collective, 0.0);
  const double nbar = nominal_mean_photon(spec);
  const double predicted = kPi / std::pow(2.0 * nbar, 2.0);
  CHECK(std::abs(r.theta_min - predicted) / predicted < 0.05);
}

TEST_CASE("predicted_theta_min: worked closed forms") {
  // Coherent separable, Kerr, equal action: pi N^{3/2} / (2 nbar)^2.
  const FamilySpec sep{Family::CoherentSeparable, 3, {2.0, 0.0}};
  const double nbar = nominal_mean_photon(sep);  // 6
  CHECK(predicted_theta_min(sep, 2.0, Scenario::EqualAction, 0.0) ==
        doctest::Approx(kPi * std::pow(3.0, 1.5) / std::pow(2.0 * nbar, 2.0))
            .epsilon(1e-14));

  const FamilySpec ent{Family::NumberEntangled, 8, {}};
  CHECK(predicted_theta_min(ent, 2.0, Scenario::EqualAction, 0.0) ==
        doctest::Approx(kPi / 8.0).epsilon(1e-14));
  for (double k : {0.5, 1.0, 2.0, 3.0})
    CHECK(predicted_theta_min(ent, k, Scenario::Constrained, 0.0) ==
          doctest::Approx(kPi).epsilon(1e-14));

  // delta > 0 replaces pi by pi - 2 sqrt(delta); the arccos option keeps the
  // exact threshold angle.
  const FamilySpec cat{Family::NumberCat, 4, {}};
  const double delta = 1e-3;
  CHECK(predicted_theta_min(cat, 1.0, Scenario::EqualAction, delta) ==
        doctest::Approx((kPi - 2.0 * std::sqrt(delta)) / 4.0).epsilon(1e-14));
  CHECK(predicted_theta_min(cat, 1.0, Scenario::EqualAction, delta, true) ==
        doctest::Approx(std::acos(2.0 * delta - 1.0) / 4.0).epsilon(1e-14));
}

TEST_CASE("predicted_theta_min: collective covers only the entangled "
          "coherent family") {
  CHECK(predicted_theta_min({Family::CoherentEntangled, 4, {2.0, 0.0}}, 2.0,
                            Scenario::Collective, 0.0) > 0.0);
  for (Family family : {Family::CoherentCat, Family::CoherentSeparable,
                        Family::NumberCat, Family::NumberEntangled,
                        Family::NumberSeparable, Family::Noon}) {
    const Complex alpha =
        family_is_coherent(family) ? Complex{2.0, 0.0} : Complex{};
    try {
      (void)predicted_theta_min({family, 4, alpha}, 2.0, Scenario::Collective,
                                0.0);
      FAIL("expected not-covered error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotCovered);
    }
  }
}

TEST_CASE("cramer_rao_rhs") {
  CHECK(cramer_rao_rhs({1.0, 1, 0.0}) == doctest::Approx(0.25));
  CHECK(cramer_rao_rhs({1.0, 4, 0.0}) == doctest::Approx(0.0625));
  try {
    (void)cramer_rao_rhs({1.0, 1, 1.0});
    FAIL("expected divergence error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Divergence);
  }
  CHECK_THROWS_AS((void)cramer_rao_rhs({1.0, 0, 0.0}), Error);
  CHECK_THROWS_AS((void)cramer_rao_rhs({1.0, 1, -0.1}), Error);
}

TEST_CASE("scenario weights and statistics factors") {
  const FamilySpec noon{Family::Noon, 8, {}};
  const auto noon_weights = scenario_weights(noon, Scenario::EqualAction);
  REQUIRE(noon_weights.size() == 2);
  CHECK(noon_weights[0] == 1.0);
  CHECK(noon_weights[1] == 0.0);
  const auto noon_constrained = scenario_weights(noon, Scenario::Constrained);
  CHECK(noon_constrained[0] == doctest::Approx(1.0 / 8.0));
  CHECK(noon_constrained[1] == 0.0);

  const FamilySpec ent{Family::CoherentEntangled, 4, {2.0, 0.0}};
  const auto constrained = scenario_weights(ent, Scenario::Constrained);
  REQUIRE(constrained.size() == 4);
  for (double w : constrained) CHECK(w == doctest::Approx(0.25));

  const EvolutionSpec collective = make_evolution(ent, 2.0, Scenario::Collective);
  CHECK(collective.generator() == Generator::Collective);
  CHECK(collective.mode_count() == 4);

  CHECK(statistics_factor({Family::NumberSeparable, 9, {}}) ==
        doctest::Approx(3.0));
  CHECK(statistics_factor({Family::CoherentSeparable, 4, {1.0, 0.0}}) ==
        doctest::Approx(2.0));
  CHECK(statistics_factor({Family::NumberCat, 9, {}}) == doctest::Approx(1.0));
  CHECK(statistics_factor(noon) == doctest::Approx(1.0));
}

TEST_CASE("scenario names round-trip") {
  for (Scenario s : {Scenario::EqualAction, Scenario::Constrained,
                     Scenario::Collective})
    CHECK(parse_scenario(scenario_name(s)) == s);
  CHECK_THROWS_AS(parse_scenario("adaptive"), Error);
}
