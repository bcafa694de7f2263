#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "metroscope/csv.hpp"
#include "metroscope/scaling.hpp"
#include "metroscope/sweep_config.hpp"

using namespace metroscope;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("run_sweep: number cat k=1 reproduces pi/N in grid order") {
  SweepSpec spec;
  spec.family = Family::NumberCat;
  spec.k_values = {1.0};
  spec.n_values = {2, 4, 8};
  const auto records = run_sweep(spec);
  REQUIRE(records.size() == 3);
  const double expected[] = {kPi / 2.0, kPi / 4.0, kPi / 8.0};
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].status == "ok");
    CHECK(records[i].n == spec.n_values[i]);
    CHECK(std::abs(records[i].theta_min_numeric - expected[i]) < 1e-8);
    CHECK(records[i].relative_error < 1e-8);
    CHECK(records[i].nbar_nominal ==
          doctest::Approx(double(spec.n_values[i]) / 2.0));
  }

  const ScalingFit fit = fit_power_law(records, ScalingFit::Axis::N);
  CHECK(std::abs(fit.exponent + 1.0) < 1e-6);
  CHECK(fit.r_squared > 1.0 - 1e-9);
  CHECK(fit.points_used == 3);
}

TEST_CASE("run_sweep: per-point failures become error rows") {
  SweepSpec spec;
  spec.family = Family::NumberCat;
  spec.k_values = {1.0};
  spec.n_values = {2, 4};
  spec.scenario = Scenario::Collective;  // no closed-form predictor
  const auto records = run_sweep(spec);
  REQUIRE(records.size() == 2);
  for (const auto& rec : records) {
    CHECK(!rec.ok());
    CHECK(rec.status.find("predictor") != std::string::npos);
    CHECK(std::isnan(rec.theta_min_numeric));
  }
}

TEST_CASE("run_sweep: separable families above the numeric cap go "
          "analytic-only") {
  SweepSpec spec;
  spec.family = Family::NumberSeparable;
  spec.k_values = {1.0};
  spec.n_values = {4, 16};
  spec.separable_numeric_cap = 14;
  const auto records = run_sweep(spec);
  REQUIRE(records.size() == 2);
  CHECK(records[0].status == "ok_stat_adjusted");
  CHECK(records[1].status == "analytic_only");
  CHECK(std::isnan(records[1].theta_min_numeric));
  CHECK(records[1].theta_min_predicted > 0.0);
}

TEST_CASE("run_sweep: validation errors") {
  SweepSpec spec;
  spec.family = Family::NumberCat;
  CHECK_THROWS_AS(run_sweep(spec), Error);  // empty grids

  spec.k_values = {1.0};
  spec.n_values = {2};
  spec.nbar_values = {4.0};  // number families take no nbar grid
  CHECK_THROWS_AS(run_sweep(spec), Error);

  SweepSpec coherent;
  coherent.family = Family::CoherentCat;
  coherent.k_values = {1.0};
  coherent.n_values = {4};
  coherent.nbar_values = {1.0};  // back-solved |alpha|^2 = 0.5 < 1
  CHECK_THROWS_AS(run_sweep(coherent), Error);

  coherent.nbar_values = {8.0};
  coherent.alpha_values = {2.0};  // both grids present
  CHECK_THROWS_AS(run_sweep(coherent), Error);
}

TEST_CASE("run_sweep: coherent Kerr cat scales as 1/nbar^2") {
  SweepSpec spec;
  spec.family = Family::CoherentCat;
  spec.k_values = {2.0};
  spec.n_values = {1};
  spec.nbar_values = {32.0, 64.0, 128.0, 256.0};
  const auto records = run_sweep(spec, 2);
  for (const auto& rec : records) CHECK(rec.ok());
  const ScalingFit fit = fit_power_law(records, ScalingFit::Axis::Nbar);
  CHECK(std::abs(fit.exponent + 2.0) < 0.05);
  CHECK(fit.r_squared > 0.999);
}

TEST_CASE("run_sweep: collective entangled record matches the cat form") {
  SweepSpec spec;
  spec.family = Family::CoherentEntangled;
  spec.k_values = {2.0};
  spec.n_values = {2};
  spec.nbar_values = {32.0};
  spec.scenario = Scenario::Collective;
  const auto records = run_sweep(spec);
  REQUIRE(records.size() == 1);
  CHECK(records[0].status == "ok");
  CHECK(records[0].relative_error <= 0.05);
}

TEST_CASE("run_sweep: separable nbar exponent is -k") {
  SweepSpec spec;
  spec.family = Family::CoherentSeparable;
  spec.k_values = {1.0};
  spec.n_values = {4};
  spec.nbar_values = {32.0, 64.0, 128.0};
  const auto records = run_sweep(spec, 2);
  for (const auto& rec : records) CHECK(rec.status == "ok_stat_adjusted");
  const ScalingFit fit = fit_power_law(records, ScalingFit::Axis::Nbar);
  CHECK(std::abs(fit.exponent + 1.0) < 0.05);
}

TEST_CASE("constrained scenario lifts the E and S N-exponents by one") {
  for (Family family :
       {Family::CoherentEntangled, Family::CoherentSeparable}) {
    double exponents[2] = {0.0, 0.0};
    int slot = 0;
    for (Scenario scenario :
         {Scenario::EqualAction, Scenario::Constrained}) {
      SweepSpec spec;
      spec.family = family;
      spec.k_values = {2.0};
      spec.n_values = {2, 4, 8};
      spec.nbar_values = {128.0};
      spec.scenario = scenario;
      const auto records = run_sweep(spec, 2);
      for (const auto& rec : records) CHECK(rec.ok());
      exponents[slot++] =
          fit_power_law(records, ScalingFit::Axis::N).exponent;
    }
    CHECK(std::abs(exponents[1] - exponents[0] - 1.0) < 0.05);
  }
}

TEST_CASE("run_sweep output is identical across thread counts") {
  SweepSpec spec;
  spec.family = Family::CoherentEntangled;
  spec.k_values = {1.0, 2.0};
  spec.n_values = {2};
  spec.nbar_values = {32.0, 64.0};
  const std::string serial = sweep_csv(run_sweep(spec, 1));
  const std::string threaded = sweep_csv(run_sweep(spec, 4));
  const std::string again = sweep_csv(run_sweep(spec, 4));
  CHECK(serial == threaded);
  CHECK(threaded == again);
}

TEST_CASE("fit_power_law: exact synthetic power law") {
  std::vector<ExperimentRecord> records;
  for (double nbar : {8.0, 16.0, 32.0, 64.0}) {
    ExperimentRecord rec;
    rec.nbar_nominal = nbar;
    rec.theta_min_numeric = 7.0 * std::pow(nbar, -2.0);
    rec.stat_factor = 1.0;
    rec.status = "ok";
    records.push_back(rec);
  }
  const ScalingFit fit = fit_power_law(records, ScalingFit::Axis::Nbar);
  CHECK(fit.exponent == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.log_prefactor == doctest::Approx(std::log(7.0)).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("fit_power_law: degenerate input errors") {
  std::vector<ExperimentRecord> records(4);
  for (auto& rec : records) {
    rec.nbar_nominal = 16.0;  // degenerate axis
    rec.theta_min_numeric = 0.5;
    rec.stat_factor = 1.0;
    rec.status = "ok";
  }
  CHECK_THROWS_AS((void)fit_power_law(records, ScalingFit::Axis::Nbar), Error);
  records.resize(2);
  CHECK_THROWS_AS((void)fit_power_law(records, ScalingFit::Axis::Nbar), Error);
}

TEST_CASE("refinement_plan") {
  const RefinementPlan p8 = refinement_plan(8.0);
  CHECK(p8.steps == 4);
  CHECK(p8.nbar_total == doctest::Approx(15.0));
  const RefinementPlan p1 = refinement_plan(1.0);
  CHECK(p1.steps == 1);
  CHECK(p1.nbar_total == doctest::Approx(1.0));
  const RefinementPlan p1024 = refinement_plan(1024.0);
  CHECK(p1024.steps == 11);
  CHECK(p1024.nbar_total == doctest::Approx(2047.0));
  // Non-powers of two round the step count up.
  CHECK(refinement_plan(5.0).steps == 4);
  CHECK_THROWS_AS(refinement_plan(0.5), Error);
}

TEST_CASE("table_report: number-family table is exact") {
  const TableReport report = table_report(2, 8, 0.0, 0.0, SeriesBudget{});
  // Entangled column is pi/(2 nbar) = pi/8 for every k.
  for (int row = 0; row < 3; ++row) {
    const TableCell& cell = report.cells[row][1];
    CHECK(cell.status == "ok");
    CHECK(std::abs(cell.numeric - kPi / 8.0) < 1e-8);
    CHECK(cell.relative_error < 1e-8);
  }
  // k = 1 row: cat matches entangled.
  CHECK(std::abs(report.cells[1][0].numeric - kPi / 8.0) < 1e-8);
  // Separable column carries the 1/sqrt(N) statistics adjustment.
  for (int row = 0; row < 3; ++row) {
    const TableCell& cell = report.cells[row][2];
    CHECK(cell.status == "ok");
    CHECK(std::abs(cell.numeric - kPi / std::sqrt(8.0)) < 1e-8);
    CHECK(cell.relative_error < 1e-8);
  }
}

TEST_CASE("table_report: number-family cells stay exact at N = 16") {
  const TableReport report = table_report(2, 16, 0.0, 0.0, SeriesBudget{});
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      const TableCell& cell = report.cells[row][col];
      CHECK(cell.status == "ok");
      CHECK(cell.relative_error <= 1e-8);
    }
  }
}

TEST_CASE("table_report: coherent table at modest energy") {
  const TableReport report = table_report(1, 2, 32.0, 0.0, SeriesBudget{});
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      CHECK(report.cells[row][col].status == "ok");
  // Linear phase shift: no advantage from entanglement (C and E within 2%).
  const double c = report.cells[1][0].numeric;
  const double e = report.cells[1][1].numeric;
  CHECK(std::abs(c - e) / e < 0.02);
}

TEST_CASE("table_report: argument validation") {
  CHECK_THROWS_AS(table_report(3, 8, 0.0, 0.0, SeriesBudget{}), Error);
  // Back-solved |alpha|^2 < 1.
  CHECK_THROWS_AS(table_report(1, 8, 1.0, 0.0, SeriesBudget{}), Error);
}

TEST_CASE("sweep CSV serialization is stable") {
  SweepSpec spec;
  spec.family = Family::NumberCat;
  spec.k_values = {1.0};
  spec.n_values = {2};
  const auto records = run_sweep(spec);
  const std::string csv = sweep_csv(records);
  CHECK(csv.find("family,k,N,nbar_nominal,nbar_exact,scenario,delta,"
                 "theta_min_numeric,theta_min_predicted,relative_error,"
                 "status") == 0);
  CHECK(csv.find("number_cat,1,2,1,1,equal_action,0,1.5707963267") !=
        std::string::npos);
  CHECK(format_number(kPi) == "3.14159265359");
  CHECK(format_number(15.0) == "15");
}

TEST_CASE("experiment config parsing") {
  const std::string good =
      "# sweep over the linear number cat\n"
      "[sweep]\n"
      "family = number_cat\n"
      "k = 1\n"
      "N = 2, 4, 8\n"
      "delta = 0\n"
      "output = out.csv\n";
  const ExperimentConfig config = parse_experiment_config(good, 1e-12);
  CHECK(config.spec.family == Family::NumberCat);
  CHECK(config.spec.n_values == std::vector<int>{2, 4, 8});
  CHECK(config.output_path == "out.csv");
  CHECK(config.spec.budget.epsilon == doctest::Approx(1e-12));

  auto expect_error_with = [](const std::string& text, const char* needle) {
    try {
      (void)parse_experiment_config(text, 1e-12);
      FAIL_CHECK("expected parse error for: " << text);
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_error_with("[sweep]\nfamily = number_cat\nk = 1\nN = 2\nspam = 1\n",
                    "line 5");
  expect_error_with("family = number_cat\n", "section");
  expect_error_with("[sweep]\nfamily = number_cat\nk = 1\nN = 2\nk = 2\n",
                    "duplicate");
  expect_error_with("[sweep]\nfamily = number_cat\nk = one\nN = 2\n",
                    "not a number");
  expect_error_with("[sweep]\nfamily = coherent_cat\nk = 1\nN = 2\n",
                    "exactly one");
  expect_error_with(
      "[sweep]\nfamily = coherent_cat\nk = 1\nN = 2\nnbar = 8\nalpha = 2\n",
      "exactly one");
  expect_error_with("[sweep]\nk = 1\nN = 2\n", "family");
  expect_error_with("[sweep]\nfamily = number_cat\nk = 1\nN = 2.5\n",
                    "positive integers");

  // Coherent config with an alpha grid.
  const std::string alpha_config =
      "[sweep]\n"
      "family = coherent_entangled\n"
      "k = 2\n"
      "N = 2\n"
      "alpha = 4, 8\n"
      "scenario = constrained\n"
      "epsilon = 1e-11\n"
      "theta_max = 10\n"
      "output = sweep.csv\n";
  const ExperimentConfig with_alpha = parse_experiment_config(alpha_config);
  CHECK(with_alpha.spec.alpha_values == std::vector<double>{4.0, 8.0});
  CHECK(with_alpha.spec.scenario == Scenario::Constrained);
  CHECK(with_alpha.spec.budget.epsilon == doctest::Approx(1e-11));
  CHECK(with_alpha.spec.theta_max == doctest::Approx(10.0));

  const auto records = run_sweep(with_alpha.spec);
  REQUIRE(records.size() == 2);
  CHECK(records[0].nbar_nominal == doctest::Approx(16.0));
  CHECK(records[1].nbar_nominal == doctest::Approx(64.0));
}
