// metroscope command-line front end. Talks to the core exclusively through
// the C API in metroscope.h.
//
// Exit codes: 0 success, 2 usage/config error, 3 engine/numeric error,
// 4 no threshold crossing.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "metroscope.h"

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr int kExitUsage = 2;
constexpr int kExitEngine = 3;
constexpr int kExitNoCrossing = 4;

int exit_code_for(ms_status status) {
  switch (status) {
    case MS_OK:
      return 0;
    case MS_ERR_INVALID_ARGUMENT:
    case MS_ERR_DIMENSION_MISMATCH:
    case MS_ERR_TERM_OVERFLOW:
    case MS_ERR_NOT_COVERED:
      return kExitUsage;
    case MS_ERR_NO_CROSSING:
      return kExitNoCrossing;
    default:
      return kExitEngine;
  }
}

int report_error(ms_status status) {
  std::cerr << "error: " << ms_last_error() << "\n";
  return exit_code_for(status);
}

std::string fmt12(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

double default_epsilon_from_env(bool& ok) {
  ok = true;
  const char* raw = std::getenv("METROSCOPE_EPSILON");
  if (raw == nullptr || raw[0] == '\0') return 1e-12;
  char* end = nullptr;
  const double value = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(value > 0.0) || !(value < 1.0)) {
    std::cerr << "error: METROSCOPE_EPSILON must be a number in (0, 1), got '"
              << raw << "'\n";
    ok = false;
    return 1e-12;
  }
  return value;
}

double auto_theta_max(int n) { return 4.0 * kPi * double(std::max(1, n)); }

struct StateArgs {
  std::string family_str;
  int n = 0;
  std::optional<double> alpha;
  std::optional<double> nbar;
  std::string scenario_str = "equal_action";

  ms_family family = MS_FAMILY_NUMBER_CAT;
  ms_scenario scenario = MS_SCENARIO_EQUAL_ACTION;
  double alpha_value = 0.0;  // resolved amplitude (0 for number families)
  double nbar_nominal = 0.0;

  void add_options(CLI::App* cmd, bool with_scenario = true) {
    cmd->add_option("--family", family_str, "state family")->required();
    cmd->add_option("--N", n, "subsystem count N")->required();
    cmd->add_option("--alpha", alpha, "coherent amplitude (coherent families)");
    cmd->add_option("--nbar", nbar,
                    "nominal mean photon number; back-solves alpha");
    if (with_scenario)
      cmd->add_option("--scenario", scenario_str,
                      "equal_action | constrained | collective");
  }

  // Returns 0 or a process exit code.
  int resolve() {
    const int family_id = ms_family_parse(family_str.c_str());
    if (family_id < 0) {
      std::cerr << "error: " << ms_last_error() << "\n";
      return kExitUsage;
    }
    family = static_cast<ms_family>(family_id);
    const int scenario_id = ms_scenario_parse(scenario_str.c_str());
    if (scenario_id < 0) {
      std::cerr << "error: " << ms_last_error() << "\n";
      return kExitUsage;
    }
    scenario = static_cast<ms_scenario>(scenario_id);
    if (n < 1) {
      std::cerr << "error: --N must be >= 1\n";
      return kExitUsage;
    }

    const bool coherent = family == MS_FAMILY_COHERENT_CAT ||
                          family == MS_FAMILY_COHERENT_ENTANGLED ||
                          family == MS_FAMILY_COHERENT_SEPARABLE;
    if (coherent) {
      if (alpha.has_value() == nbar.has_value()) {
        std::cerr << "error: coherent families need exactly one of --alpha "
                     "or --nbar\n";
        return kExitUsage;
      }
      if (alpha.has_value()) {
        alpha_value = *alpha;
        if (!(alpha_value > 0.0)) {
          std::cerr << "error: --alpha must be > 0\n";
          return kExitUsage;
        }
      } else {
        if (!(*nbar > 0.0)) {
          std::cerr << "error: --nbar must be > 0\n";
          return kExitUsage;
        }
        alpha_value = std::sqrt(2.0 * *nbar / double(n));
      }
    } else if (alpha.has_value() || nbar.has_value()) {
      std::cerr << "error: --alpha/--nbar apply to coherent families only "
                   "(number families fix nbar = N/2)\n";
      return kExitUsage;
    }

    ms_status status =
        ms_nominal_mean_photon(family, n, alpha_value, 0.0, &nbar_nominal);
    if (status != MS_OK) return report_error(status);
    return 0;
  }
};

class StateHandle {
 public:
  ~StateHandle() { ms_state_free(state_); }
  ms_state** out() { return &state_; }
  ms_state* get() const { return state_; }

 private:
  ms_state* state_ = nullptr;
};

class EvolutionHandle {
 public:
  ~EvolutionHandle() { ms_evolution_free(evolution_); }
  ms_evolution** out() { return &evolution_; }
  ms_evolution* get() const { return evolution_; }

 private:
  ms_evolution* evolution_ = nullptr;
};

int write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    return kExitEngine;
  }
  out << content;
  out.close();
  if (!out) {
    std::cerr << "error: failed writing '" << path << "'\n";
    return kExitEngine;
  }
  return 0;
}

// Scenario-consistent closed-form d for the dcurve comparison column. The
// constrained scenario scales every effective phase by 1/N; the collective
// generator turns the entangled families into their single-mode cat
// analogues. Cells without a closed form come out as NaN.
ms_status scenario_analytic_d(ms_family family, int n, double alpha, double k,
                              ms_scenario scenario, double theta,
                              double* out) {
  *out = std::nan("");
  double effective_theta = theta;
  ms_family effective_family = family;
  if (scenario == MS_SCENARIO_CONSTRAINED) {
    effective_theta = theta / double(n);
  } else if (scenario == MS_SCENARIO_COLLECTIVE) {
    if (family == MS_FAMILY_COHERENT_ENTANGLED) {
      effective_family = MS_FAMILY_COHERENT_CAT;
    } else if (family == MS_FAMILY_NUMBER_ENTANGLED) {
      effective_family = MS_FAMILY_NUMBER_CAT;
    } else if (family != MS_FAMILY_COHERENT_CAT &&
               family != MS_FAMILY_NUMBER_CAT) {
      // Separable states have no collective closed form, and the collective
      // generator cannot dephase the N00N components at all.
      return MS_OK;  // leave NaN
    }
  }
  return ms_analytic_distinguishability(effective_family, n, alpha, 0.0, k,
                                        effective_theta, out);
}

int run_dcurve(StateArgs& args, double k, double theta_max, int points,
               double epsilon, const std::string& out_path) {
  if (int rc = args.resolve(); rc != 0) return rc;
  if (points < 1) {
    std::cerr << "error: --points must be >= 1\n";
    return kExitUsage;
  }
  if (!(theta_max > 0.0)) {
    std::cerr << "error: --theta-max must be > 0\n";
    return kExitUsage;
  }
  if (!(k > 0.0)) {
    std::cerr << "error: --k must be > 0\n";
    return kExitUsage;
  }

  StateHandle state;
  ms_status status = ms_state_build_family(args.family, args.n,
                                           args.alpha_value, 0.0, 0, state.out());
  if (status != MS_OK) return report_error(status);
  EvolutionHandle evolution;
  status = ms_evolution_for_scenario(args.family, args.n, k, args.scenario,
                                     evolution.out());
  if (status != MS_OK) return report_error(status);

  std::string csv = "theta,d_numeric,d_analytic\n";
  for (int i = 1; i <= points; ++i) {
    const double theta = theta_max * double(i) / double(points);
    double d_numeric = 0.0;
    status = ms_distinguishability(state.get(), evolution.get(), theta,
                                   epsilon, &d_numeric);
    if (status != MS_OK) return report_error(status);
    double d_analytic = 0.0;
    status = scenario_analytic_d(args.family, args.n, args.alpha_value, k,
                                 args.scenario, theta, &d_analytic);
    if (status != MS_OK) return report_error(status);
    csv += fmt12(theta) + "," + fmt12(d_numeric) + "," + fmt12(d_analytic) +
           "\n";
  }

  if (out_path.empty()) {
    std::cout << csv;
    return 0;
  }
  return write_file(out_path, csv);
}

int run_theta_min(StateArgs& args, double k, double delta, double theta_max,
                  int scan_points, double tol, double epsilon,
                  const std::string& csv_path) {
  if (int rc = args.resolve(); rc != 0) return rc;
  if (!(k > 0.0)) {
    std::cerr << "error: --k must be > 0\n";
    return kExitUsage;
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    std::cerr << "error: --delta must lie in [0, 1)\n";
    return kExitUsage;
  }

  StateHandle state;
  ms_status status = ms_state_build_family(args.family, args.n,
                                           args.alpha_value, 0.0, 0, state.out());
  if (status != MS_OK) return report_error(status);
  EvolutionHandle evolution;
  status = ms_evolution_for_scenario(args.family, args.n, k, args.scenario,
                                     evolution.out());
  if (status != MS_OK) return report_error(status);

  const double ceiling = theta_max > 0.0 ? theta_max : auto_theta_max(args.n);
  ms_theta_min_result result;
  status = ms_theta_min(state.get(), evolution.get(), delta, ceiling,
                        scan_points, tol, epsilon, &result);
  if (status != MS_OK) return report_error(status);

  double predicted = std::nan("");
  ms_status predicted_status =
      ms_predicted_theta_min(args.family, args.n, args.alpha_value, 0.0, k,
                             args.scenario, delta, 0, &predicted);
  double stat_factor = 1.0;
  ms_statistics_factor(args.family, args.n, &stat_factor);
  const double comparable = result.theta_min / stat_factor;
  const double rel_err = predicted_status == MS_OK
                             ? std::abs(comparable - predicted) / predicted
                             : std::nan("");

  std::cout << "theta_min=" << fmt12(result.theta_min)
            << " predicted=" << fmt12(predicted)
            << " rel_err=" << fmt12(rel_err) << "\n";

  if (!csv_path.empty()) {
    double nbar_exact = std::nan("");
    ms_mean_photon_number(state.get(), &nbar_exact);
    std::string row;
    row += ms_family_name(args.family);
    row += ',' + fmt12(k);
    row += ',' + std::to_string(args.n);
    row += ',' + fmt12(args.nbar_nominal);
    row += ',' + fmt12(nbar_exact);
    row += ',';
    row += ms_scenario_name(args.scenario);
    row += ',' + fmt12(delta);
    row += ',' + fmt12(result.theta_min);
    row += ',' + fmt12(predicted);
    row += ',' + fmt12(rel_err);
    row += ',';
    row += stat_factor != 1.0 ? "ok_stat_adjusted" : "ok";
    row += '\n';

    const bool fresh = !std::filesystem::exists(csv_path) ||
                       std::filesystem::file_size(csv_path) == 0;
    std::ofstream out(csv_path, std::ios::binary | std::ios::app);
    if (!out) {
      std::cerr << "error: cannot open '" << csv_path << "' for writing\n";
      return kExitEngine;
    }
    if (fresh)
      out << "family,k,N,nbar_nominal,nbar_exact,scenario,delta,"
             "theta_min_numeric,theta_min_predicted,relative_error,status\n";
    out << row;
  }
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& out_override,
              int threads, double default_epsilon) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config file '" << config_path << "'\n";
    return kExitUsage;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string config_text = buffer.str();

  char* csv = nullptr;
  char* config_output = nullptr;
  int64_t rows_ok = 0;
  int64_t rows_total = 0;
  ms_status status =
      ms_sweep_run_config(config_text.c_str(), default_epsilon, threads, &csv,
                          &config_output, &rows_ok, &rows_total);
  if (status != MS_OK) return report_error(status);

  std::string csv_text(csv);
  std::string out_path = out_override;
  if (out_path.empty() && config_output != nullptr) out_path = config_output;
  ms_string_free(csv);
  ms_string_free(config_output);

  if (out_path.empty()) {
    std::cerr << "error: config has no output path; pass --out\n";
    return kExitUsage;
  }
  if (int rc = write_file(out_path, csv_text); rc != 0) return rc;
  std::cerr << "wrote " << rows_total << " rows (" << rows_ok << " ok) to "
            << out_path << "\n";
  return rows_ok == 0 ? kExitEngine : 0;
}

int run_table(int which, int n, double nbar, double delta, double epsilon,
              bool as_csv, const std::string& out_path) {
  if (which != 1 && which != 2) {
    std::cerr << "error: --which must be 1 or 2\n";
    return kExitUsage;
  }
  if (which == 2) nbar = double(n) / 2.0;

  if (as_csv || !out_path.empty()) {
    char* csv = nullptr;
    ms_status status =
        ms_table_report_csv(which, n, nbar, delta, epsilon, &csv);
    if (status != MS_OK) return report_error(status);
    std::string text(csv);
    ms_string_free(csv);
    if (out_path.empty()) {
      std::cout << text;
      return 0;
    }
    return write_file(out_path, text);
  }

  ms_table_cell cells[9];
  ms_status status = ms_table_report(which, n, nbar, delta, epsilon, cells);
  if (status != MS_OK) return report_error(status);

  const char* columns[3];
  if (which == 1) {
    columns[0] = "coherent_cat";
    columns[1] = "coherent_entangled";
    columns[2] = "coherent_separable";
  } else {
    columns[0] = "number_cat";
    columns[1] = "number_entangled";
    columns[2] = "number_separable";
  }
  const double ks[3] = {0.5, 1.0, 2.0};

  std::cout << "theta_min table " << which << " (N=" << n
            << ", nbar=" << fmt12(nbar) << ", delta=" << fmt12(delta) << ")\n";
  for (int col = 0; col < 3; ++col) {
    std::cout << "  [" << columns[col] << "]\n";
    for (int row = 0; row < 3; ++row) {
      const ms_table_cell& cell = cells[row * 3 + col];
      std::cout << "    k=" << fmt12(ks[row]) << ": ";
      if (cell.status != 0) {
        std::cout << "error\n";
        continue;
      }
      std::cout << "numeric=" << fmt12(cell.numeric)
                << " predicted=" << fmt12(cell.predicted)
                << " rel_err=" << fmt12(cell.relative_error) << "\n";
    }
  }
  if (which == 1 || which == 2) {
    std::cout << "  (separable column: numeric includes the 1/sqrt(N) "
                 "repeated-measurement factor)\n";
  }
  return 0;
}

int run_refine(double nbar) {
  int steps = 0;
  double nbar_total = 0.0;
  ms_status status = ms_refinement_plan(nbar, &steps, &nbar_total);
  if (status != MS_OK) return report_error(status);
  std::cout << "steps=" << steps << " nbar_total=" << fmt12(nbar_total)
            << "\n";
  return 0;
}

int run_predict(StateArgs& args, double k, double delta, bool exact_arccos) {
  if (int rc = args.resolve(); rc != 0) return rc;
  if (!(delta >= 0.0 && delta < 1.0)) {
    std::cerr << "error: --delta must lie in [0, 1)\n";
    return kExitUsage;
  }
  double predicted = 0.0;
  ms_status status = ms_predicted_theta_min(
      args.family, args.n, args.alpha_value, 0.0, k, args.scenario, delta,
      exact_arccos ? 1 : 0, &predicted);
  if (status != MS_OK) return report_error(status);
  std::cout << "predicted=" << fmt12(predicted) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  bool epsilon_ok = true;
  const double env_epsilon = default_epsilon_from_env(epsilon_ok);
  if (!epsilon_ok) return kExitUsage;

  CLI::App app{
      "metroscope: exact phase evolution, distinguishability, and "
      "minimum-resolvable-phase experiments for coherent/number-state "
      "superpositions"};
  app.require_subcommand(1);

  // dcurve
  auto* dcurve = app.add_subcommand(
      "dcurve", "sample d(theta) numerically and analytically to CSV");
  StateArgs dcurve_args;
  dcurve_args.add_options(dcurve);
  double dcurve_k = 1.0;
  double dcurve_theta_max = 0.0;
  int dcurve_points = 256;
  double dcurve_epsilon = env_epsilon;
  std::string dcurve_out;
  dcurve->add_option("--k", dcurve_k, "nonlinearity order")->required();
  dcurve->add_option("--theta-max", dcurve_theta_max, "sample ceiling")
      ->required();
  dcurve->add_option("--points", dcurve_points, "number of samples");
  dcurve->add_option("--epsilon", dcurve_epsilon, "series error budget");
  dcurve->add_option("--out", dcurve_out, "output CSV path (default stdout)");

  // theta-min
  auto* tmin = app.add_subcommand(
      "theta-min", "solve the minimum resolvable phase at threshold delta");
  StateArgs tmin_args;
  tmin_args.add_options(tmin);
  double tmin_k = 1.0;
  double tmin_delta = 0.0;
  double tmin_theta_max = 0.0;
  int tmin_scan_points = 64;
  double tmin_tol = 1e-10;
  double tmin_epsilon = env_epsilon;
  std::string tmin_csv;
  tmin->add_option("--k", tmin_k, "nonlinearity order")->required();
  tmin->add_option("--delta", tmin_delta, "distinguishability threshold");
  tmin->add_option("--theta-max", tmin_theta_max,
                   "search ceiling (default 4*pi*N)");
  tmin->add_option("--scan-points", tmin_scan_points,
                   "scan samples per oscillation period");
  tmin->add_option("--tol", tmin_tol, "relative bisection tolerance");
  tmin->add_option("--epsilon", tmin_epsilon, "series error budget");
  tmin->add_option("--csv", tmin_csv, "append an experiment-record row here");

  // sweep
  auto* sweep =
      app.add_subcommand("sweep", "run a config-driven theta_min sweep");
  std::string sweep_config;
  std::string sweep_out;
  int sweep_threads = 0;
  sweep->add_option("config", sweep_config, "experiment config path")
      ->required();
  sweep->add_option("--out", sweep_out, "override the config output path");
  sweep->add_option("--threads", sweep_threads,
                    "worker threads (default: hardware)");

  // table
  auto* table = app.add_subcommand(
      "table", "3x3 theta_min grid over k in {1/2,1,2} and C/E/S families");
  int table_which = 1;
  int table_n = 1;
  double table_nbar = 0.0;
  double table_delta = 0.0;
  double table_epsilon = env_epsilon;
  bool table_csv = false;
  std::string table_out;
  table->add_option("--which", table_which, "1: coherent, 2: number")
      ->required();
  table->add_option("--N", table_n, "subsystem count")->required();
  table->add_option("--nbar", table_nbar, "mean photon number (table 1)");
  table->add_option("--delta", table_delta, "distinguishability threshold");
  table->add_option("--epsilon", table_epsilon, "series error budget");
  table->add_flag("--csv", table_csv, "emit flat CSV instead of the grid");
  table->add_option("--out", table_out, "write CSV to this path");

  // refine
  auto* refine = app.add_subcommand(
      "refine", "iterative-refinement resource accounting for a target nbar");
  double refine_nbar = 0.0;
  refine->add_option("--nbar", refine_nbar, "target mean photon number")
      ->required();

  // predict
  auto* predict = app.add_subcommand(
      "predict", "closed-form theta_min prediction for a family/scenario");
  StateArgs predict_args;
  predict_args.add_options(predict);
  double predict_k = 1.0;
  double predict_delta = 0.0;
  bool predict_exact = false;
  predict->add_option("--k", predict_k, "nonlinearity order")->required();
  predict->add_option("--delta", predict_delta, "distinguishability threshold");
  predict->add_flag("--exact-arccos", predict_exact,
                    "use arccos(2*delta-1) instead of pi - 2*sqrt(delta)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (dcurve->parsed())
    return run_dcurve(dcurve_args, dcurve_k, dcurve_theta_max, dcurve_points,
                      dcurve_epsilon, dcurve_out);
  if (tmin->parsed())
    return run_theta_min(tmin_args, tmin_k, tmin_delta, tmin_theta_max,
                         tmin_scan_points, tmin_tol, tmin_epsilon, tmin_csv);
  if (sweep->parsed())
    return run_sweep(sweep_config, sweep_out, sweep_threads, env_epsilon);
  if (table->parsed())
    return run_table(table_which, table_n, table_nbar, table_delta,
                     table_epsilon, table_csv, table_out);
  if (refine->parsed()) return run_refine(refine_nbar);
  if (predict->parsed())
    return run_predict(predict_args, predict_k, predict_delta, predict_exact);

  std::cerr << "error: no subcommand\n";
  return kExitUsage;
}
