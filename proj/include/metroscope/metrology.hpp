#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metroscope/evolution.hpp"
#include "metroscope/state.hpp"

namespace metroscope {

/// Resource scenarios for the phase evolution.
///   EqualAction: the full phase acts on every mode (weights 1).
///   Constrained: a fixed total unitary action split into N equal pieces,
///                one per use (weights 1/N, N the family's subsystem count).
///   Collective:  the entangling (sum n)^k generator, full weight.
enum class Scenario { EqualAction, Constrained, Collective };

const char* scenario_name(Scenario scenario);
Scenario parse_scenario(const std::string& name);

/// Per-mode weights realizing `scenario` for a family: all-equal weights for
/// the regular families, (w, 0) for the N00N state whose second mode is
/// passive.
std::vector<double> scenario_weights(const FamilySpec& spec, Scenario scenario);

/// EvolutionSpec for (family, order, scenario) with the weights above.
EvolutionSpec make_evolution(const FamilySpec& spec, double order,
                             Scenario scenario);

struct ThetaMinRequest {
  double delta = 0.0;                 // distinguishability threshold in [0,1)
  double theta_max = 0.0;             // search ceiling, > 0
  int scan_points_per_period = 64;
  double bisection_tol = 1e-10;       // relative width of the final bracket
};

struct ThetaMinResult {
  double theta_min = 0.0;
  double achieved_d = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double scan_step = 0.0;
  std::int64_t crossings_found = 0;
};

struct CramerRaoQuery {
  double delta_theta = 0.0;
  std::int64_t measurements = 1;
  double distinguishability = 0.0;
};

/// d(theta) = |<psi|U(theta)|psi>|^2, clamped to [0,1].
double distinguishability(const SuperpositionState& state,
                          const EvolutionSpec& evolution, double theta,
                          const SeriesBudget& budget);

/// The closed-form d(theta) for the builtin families (equal-action
/// weights). The N00N state follows the single-mode number-cat form since
/// only one of its modes interacts.
double analytic_distinguishability(const FamilySpec& spec, double order,
                                   double theta);

/// Smallest theta in (0, theta_max] with d(theta) <= delta.
///
/// The scan step is tied to the fastest oscillation scale
/// (2 * exact mean photon)^k adjusted by the generator weights, with
/// `scan_points_per_period` samples per period; the first threshold
/// crossing is bisected down to `bisection_tol`. For delta = 0, which a
/// decaying-envelope d never meets exactly, the result is the location of
/// the first local minimum of d, refined by golden-section search;
/// `achieved_d` then reports the minimum's depth.
ThetaMinResult theta_min(const SuperpositionState& state,
                         const EvolutionSpec& evolution,
                         const ThetaMinRequest& request,
                         const SeriesBudget& budget);

/// Closed-form minimum resolvable phase for (family, order, scenario) with
/// the nominal mean photon number. Combinations without a stated closed
/// form (the collective generator with anything but the entangled coherent
/// family) fail with a not-covered error. For delta > 0 the leading pi is
/// replaced by pi - 2*sqrt(delta); `exact_arccos` switches to the full
/// arccos(2*delta - 1) form instead, which stays accurate for delta near 1.
double predicted_theta_min(const FamilySpec& spec, double order,
                           Scenario scenario, double delta,
                           bool exact_arccos = false);

/// Right-hand side of the Cramer-Rao relation:
/// delta_theta^2 / (4 M (1 - d)). Fails with a divergence error when the
/// states are indistinguishable (d >= 1).
double cramer_rao_rhs(const CramerRaoQuery& query);

/// sqrt(N) for the separable families (the repeated-measurement statistics
/// factor their predictors include), 1 otherwise. A single-shot
/// distinguishability run cannot exhibit repetition statistics, so numeric
/// theta_min values for separable families are divided by this before being
/// compared against the predictors.
double statistics_factor(const FamilySpec& spec);

}  // namespace metroscope
