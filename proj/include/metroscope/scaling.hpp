#pragma once

#include <string>
#include <vector>

#include "metroscope/metrology.hpp"

namespace metroscope {

/// Grid specification for a theta_min sweep. Coherent families are
/// parametrized by exactly one of the nominal mean photon grid (alpha
/// back-solved as sqrt(2*nbar/N)) or a direct alpha grid; number families
/// take their mean photon number N/2 from the N grid and must leave both
/// lists empty.
struct SweepSpec {
  Family family = Family::NumberCat;
  std::vector<double> k_values;
  std::vector<int> n_values;
  std::vector<double> nbar_values;
  std::vector<double> alpha_values;
  Scenario scenario = Scenario::EqualAction;
  double delta = 0.0;
  SeriesBudget budget;
  double theta_max = 0.0;  // 0 = auto per grid point
  int scan_points_per_period = 64;
  double bisection_tol = 1e-10;
  int expansion_cap = kDefaultExpansionCap;
  /// Separable states above this N are not solved numerically (term count
  /// 2^N); their rows carry the analytic prediction only.
  int separable_numeric_cap = 14;
};

/// Validates grids (non-empty, back-solved |alpha|^2 >= 1, nbar list only
/// for coherent families). Throws on violation.
void validate_sweep_spec(const SweepSpec& spec);

struct ExperimentRecord {
  Family family = Family::NumberCat;
  double k = 0.0;
  int n = 0;
  double nbar_nominal = 0.0;
  double nbar_exact = 0.0;
  Scenario scenario = Scenario::EqualAction;
  double delta = 0.0;
  double theta_min_numeric = 0.0;    // single-shot solver output
  double theta_min_predicted = 0.0;
  double relative_error = 0.0;       // statistics-adjusted numeric vs predicted
  double stat_factor = 1.0;          // sqrt(N) for separable families
  std::string status;                // "ok", "ok_stat_adjusted", or a reason

  bool ok() const { return status.rfind("ok", 0) == 0; }
  /// Numeric value comparable against the predictor (single-shot value
  /// divided by the repetition-statistics factor).
  double comparable_numeric() const { return theta_min_numeric / stat_factor; }
};

struct ScalingFit {
  enum class Axis { Nbar, N };
  Axis axis = Axis::Nbar;
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

struct RefinementPlan {
  double nbar_final = 0.0;
  int steps = 0;
  double nbar_total = 0.0;
};

/// Runs the sweep grid in deterministic order (k outer, N middle, nbar
/// inner). Per-point failures become error records and never abort the
/// sweep. `threads` <= 1 runs serially; results are ordered by grid index
/// either way.
std::vector<ExperimentRecord> run_sweep(const SweepSpec& spec, int threads = 1);

/// Least-squares fit of ln(theta_min) against ln(axis value) over the ok
/// records. Requires at least three points with a non-degenerate axis.
ScalingFit fit_power_law(const std::vector<ExperimentRecord>& records,
                         ScalingFit::Axis axis);

/// Resource accounting for the iterative phase-interval refinement:
/// steps = ceil(log2(nbar_final)) + 1 and nbar_total = 2*nbar_final - 1.
RefinementPlan refinement_plan(double nbar_final);

struct TableCell {
  double numeric = 0.0;     // statistics-adjusted numeric theta_min
  double predicted = 0.0;
  double relative_error = 0.0;
  std::string status;
};

struct TableReport {
  int which = 1;  // 1 = coherent families, 2 = number families
  std::vector<double> k_rows{0.5, 1.0, 2.0};
  std::vector<Family> family_columns;
  TableCell cells[3][3];  // [k row][family column]
};

/// 3x3 grid of theta_min cells, rows k in {1/2, 1, 2} and columns the
/// cat / entangled / separable families of the chosen kind. Table 1 uses
/// the coherent families at (N, nbar); table 2 uses the number families at
/// N (nbar is fixed to N/2 by the states themselves). Per-cell failures are
/// reported in-cell.
TableReport table_report(int which, int n, double nbar, double delta,
                         const SeriesBudget& budget);

}  // namespace metroscope
