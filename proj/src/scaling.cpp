#include "metroscope/scaling.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "detail/numeric.hpp"

namespace metroscope {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double auto_theta_max(int n) {
  // Wide enough for the slowest builtin crossing (the constrained separable
  // number family's first zero sits at N*pi).
  return 4.0 * std::numbers::pi * double(std::max(1, n));
}

struct GridPoint {
  double k;
  int n;
  double nbar_nominal;
  double alpha;  // 0 for number families
};

std::vector<GridPoint> build_grid(const SweepSpec& spec) {
  std::vector<GridPoint> grid;
  const bool coherent = family_is_coherent(spec.family);
  for (double k : spec.k_values) {
    for (int n : spec.n_values) {
      if (!coherent) {
        grid.push_back({k, n, double(n) / 2.0, 0.0});
      } else if (!spec.nbar_values.empty()) {
        for (double nbar : spec.nbar_values)
          grid.push_back({k, n, nbar, std::sqrt(2.0 * nbar / double(n))});
      } else {
        for (double alpha : spec.alpha_values)
          grid.push_back(
              {k, n, double(n) * alpha * alpha / 2.0, alpha});
      }
    }
  }
  return grid;
}

std::string sanitize_status(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return text;
}

ExperimentRecord evaluate_point(const SweepSpec& spec, const GridPoint& p) {
  ExperimentRecord rec;
  rec.family = spec.family;
  rec.k = p.k;
  rec.n = p.n;
  rec.nbar_nominal = p.nbar_nominal;
  rec.nbar_exact = kNan;
  rec.scenario = spec.scenario;
  rec.delta = spec.delta;
  rec.theta_min_numeric = kNan;
  rec.theta_min_predicted = kNan;
  rec.relative_error = kNan;

  const FamilySpec fs{spec.family, p.n, Complex{p.alpha, 0.0}};
  rec.stat_factor = statistics_factor(fs);

  try {
    rec.theta_min_predicted =
        predicted_theta_min(fs, p.k, spec.scenario, spec.delta);
  } catch (const std::exception& e) {
    rec.status = sanitize_status(std::string("predictor: ") + e.what());
    return rec;
  }

  const bool separable = rec.stat_factor != 1.0;
  if (separable && p.n > spec.separable_numeric_cap) {
    rec.status = "analytic_only";
    return rec;
  }

  try {
    const SuperpositionState state = build_family(fs, spec.expansion_cap);
    rec.nbar_exact = mean_photon_number(state);
    const EvolutionSpec evolution = make_evolution(fs, p.k, spec.scenario);
    ThetaMinRequest request;
    request.delta = spec.delta;
    request.theta_max =
        spec.theta_max > 0.0 ? spec.theta_max : auto_theta_max(p.n);
    request.scan_points_per_period = spec.scan_points_per_period;
    request.bisection_tol = spec.bisection_tol;
    const ThetaMinResult solved =
        theta_min(state, evolution, request, spec.budget);
    rec.theta_min_numeric = solved.theta_min;
    rec.relative_error =
        std::abs(rec.comparable_numeric() - rec.theta_min_predicted) /
        rec.theta_min_predicted;
    rec.status = separable ? "ok_stat_adjusted" : "ok";
  } catch (const std::exception& e) {
    rec.status = sanitize_status(e.what());
  }
  return rec;
}

}  // namespace

void validate_sweep_spec(const SweepSpec& spec) {
  if (spec.k_values.empty())
    raise(ErrorCode::InvalidArgument, "sweep needs a non-empty k grid");
  for (double k : spec.k_values)
    if (!(k > 0.0) || !std::isfinite(k))
      raise(ErrorCode::InvalidArgument, "k values must be positive and finite");
  if (spec.n_values.empty())
    raise(ErrorCode::InvalidArgument, "sweep needs a non-empty N grid");
  for (int n : spec.n_values)
    if (n < 1) raise(ErrorCode::InvalidArgument, "N values must be >= 1");

  if (family_is_coherent(spec.family)) {
    if (spec.nbar_values.empty() == spec.alpha_values.empty())
      raise(ErrorCode::InvalidArgument,
            "coherent sweeps need exactly one of the nbar or alpha grids");
    for (double nbar : spec.nbar_values) {
      if (!(nbar > 0.0) || !std::isfinite(nbar))
        raise(ErrorCode::InvalidArgument,
              "nbar values must be positive and finite");
      for (int n : spec.n_values)
        if (2.0 * nbar / double(n) < 1.0)
          raise(ErrorCode::InvalidArgument,
                "back-solved |alpha|^2 = 2*nbar/N < 1 for nbar = " +
                    std::to_string(nbar) + ", N = " + std::to_string(n));
    }
    for (double alpha : spec.alpha_values)
      if (!(alpha > 0.0) || !std::isfinite(alpha))
        raise(ErrorCode::InvalidArgument,
              "alpha values must be positive and finite");
  } else if (!spec.nbar_values.empty() || !spec.alpha_values.empty()) {
    raise(ErrorCode::InvalidArgument,
          "number-family sweeps take their energy grid from N; leave the "
          "nbar and alpha lists empty");
  }

  if (!(spec.delta >= 0.0 && spec.delta < 1.0))
    raise(ErrorCode::InvalidArgument, "delta must lie in [0, 1)");
  validate_budget(spec.budget);
  if (spec.scan_points_per_period < 1)
    raise(ErrorCode::InvalidArgument,
          "scan_points_per_period must be at least 1");
  if (!(spec.bisection_tol > 0.0 && spec.bisection_tol < 1.0))
    raise(ErrorCode::InvalidArgument, "bisection_tol must lie in (0, 1)");
  if (spec.theta_max < 0.0 || !std::isfinite(spec.theta_max))
    raise(ErrorCode::InvalidArgument, "theta_max must be finite and >= 0");
  if (spec.expansion_cap < 1 || spec.separable_numeric_cap < 1)
    raise(ErrorCode::InvalidArgument, "expansion caps must be >= 1");
}

std::vector<ExperimentRecord> run_sweep(const SweepSpec& spec, int threads) {
  validate_sweep_spec(spec);
  const std::vector<GridPoint> grid = build_grid(spec);
  if (grid.empty())
    raise(ErrorCode::InvalidArgument, "sweep grid is empty after validation");

  std::vector<ExperimentRecord> records(grid.size());
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(grid.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      records[i] = evaluate_point(spec, grid[i]);
    return records;
  }

  // Grid points are independent; workers claim indices and write into the
  // pre-sized vector, so the record order (and every floating-point result)
  // is identical for any worker count.
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      records[i] = evaluate_point(spec, grid[i]);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return records;
}

ScalingFit fit_power_law(const std::vector<ExperimentRecord>& records,
                         ScalingFit::Axis axis) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& rec : records) {
    if (!rec.ok()) continue;
    const double theta = rec.comparable_numeric();
    if (!(theta > 0.0) || !std::isfinite(theta))
      raise(ErrorCode::InvalidArgument,
            "power-law fit needs positive theta_min values");
    const double x =
        axis == ScalingFit::Axis::Nbar ? rec.nbar_nominal : double(rec.n);
    xs.push_back(std::log(x));
    ys.push_back(std::log(theta));
  }
  if (xs.size() < 3)
    raise(ErrorCode::InvalidArgument,
          "power-law fit needs at least 3 usable records, got " +
              std::to_string(xs.size()));

  const double n = double(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
  }
  if (sxx == 0.0)
    raise(ErrorCode::InvalidArgument,
          "power-law fit axis is degenerate (all values equal)");

  ScalingFit fit;
  fit.axis = axis;
  fit.exponent = sxy / sxx;
  fit.log_prefactor = mean_y - fit.exponent * mean_x;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double predicted = fit.log_prefactor + fit.exponent * xs[i];
    ss_res += (ys[i] - predicted) * (ys[i] - predicted);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

RefinementPlan refinement_plan(double nbar_final) {
  if (!(nbar_final >= 1.0) || !std::isfinite(nbar_final))
    raise(ErrorCode::InvalidArgument,
          "refinement plan needs nbar_final >= 1");
  RefinementPlan plan;
  plan.nbar_final = nbar_final;
  plan.steps = static_cast<int>(std::ceil(std::log2(nbar_final))) + 1;
  plan.nbar_total = 2.0 * nbar_final - 1.0;
  return plan;
}

TableReport table_report(int which, int n, double nbar, double delta,
                         const SeriesBudget& budget) {
  if (which != 1 && which != 2)
    raise(ErrorCode::InvalidArgument, "table selector must be 1 or 2");
  if (n < 1) raise(ErrorCode::InvalidArgument, "N must be >= 1");
  if (!(delta >= 0.0 && delta < 1.0))
    raise(ErrorCode::InvalidArgument, "delta must lie in [0, 1)");
  validate_budget(budget);

  double alpha = 0.0;
  if (which == 1) {
    if (!(nbar > 0.0) || !std::isfinite(nbar))
      raise(ErrorCode::InvalidArgument, "table 1 needs nbar > 0");
    const double alpha_sq = 2.0 * nbar / double(n);
    if (alpha_sq < 1.0)
      raise(ErrorCode::InvalidArgument,
            "back-solved |alpha|^2 = 2*nbar/N = " + std::to_string(alpha_sq) +
                " < 1; raise nbar or lower N");
    alpha = std::sqrt(alpha_sq);
  }

  TableReport report;
  report.which = which;
  report.family_columns =
      which == 1 ? std::vector<Family>{Family::CoherentCat,
                                       Family::CoherentEntangled,
                                       Family::CoherentSeparable}
                 : std::vector<Family>{Family::NumberCat,
                                       Family::NumberEntangled,
                                       Family::NumberSeparable};

  for (std::size_t row = 0; row < report.k_rows.size(); ++row) {
    for (std::size_t col = 0; col < report.family_columns.size(); ++col) {
      TableCell& cell = report.cells[row][col];
      cell.numeric = kNan;
      cell.predicted = kNan;
      cell.relative_error = kNan;
      const double k = report.k_rows[row];
      const FamilySpec fs{report.family_columns[col], n, Complex{alpha, 0.0}};
      try {
        cell.predicted =
            predicted_theta_min(fs, k, Scenario::EqualAction, delta);
        const SuperpositionState state = build_family(fs);
        const EvolutionSpec evolution =
            make_evolution(fs, k, Scenario::EqualAction);
        ThetaMinRequest request;
        request.delta = delta;
        request.theta_max = auto_theta_max(n);
        const ThetaMinResult solved =
            theta_min(state, evolution, request, budget);
        cell.numeric = solved.theta_min / statistics_factor(fs);
        cell.relative_error =
            std::abs(cell.numeric - cell.predicted) / cell.predicted;
        cell.status = "ok";
      } catch (const std::exception& e) {
        cell.status = sanitize_status(e.what());
      }
    }
  }
  return report;
}

}  // namespace metroscope
