#include "metroscope.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <thread>
#include <vector>

#include "metroscope/csv.hpp"
#include "metroscope/metrology.hpp"
#include "metroscope/scaling.hpp"
#include "metroscope/state.hpp"
#include "metroscope/sweep_config.hpp"

namespace ms = metroscope;

struct ms_state {
  ms::SuperpositionState value;
};

struct ms_evolution {
  ms::EvolutionSpec value;
};

namespace {

thread_local std::string g_last_error;

ms_status map_code(ms::ErrorCode code) {
  switch (code) {
    case ms::ErrorCode::InvalidArgument: return MS_ERR_INVALID_ARGUMENT;
    case ms::ErrorCode::DimensionMismatch: return MS_ERR_DIMENSION_MISMATCH;
    case ms::ErrorCode::TermOverflow: return MS_ERR_TERM_OVERFLOW;
    case ms::ErrorCode::TruncationOverflow: return MS_ERR_TRUNCATION_OVERFLOW;
    case ms::ErrorCode::NoCrossing: return MS_ERR_NO_CROSSING;
    case ms::ErrorCode::Divergence: return MS_ERR_DIVERGENT;
    case ms::ErrorCode::NotCovered: return MS_ERR_NOT_COVERED;
    case ms::ErrorCode::Internal: return MS_ERR_INTERNAL;
  }
  return MS_ERR_INTERNAL;
}

template <class Fn>
ms_status guarded(Fn&& fn) {
  try {
    fn();
    return MS_OK;
  } catch (const ms::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MS_ERR_INTERNAL;
  }
}

ms_status invalid(const char* message) {
  g_last_error = message;
  return MS_ERR_INVALID_ARGUMENT;
}

bool family_in_range(ms_family family) {
  return family >= MS_FAMILY_COHERENT_CAT && family <= MS_FAMILY_NOON;
}

ms::Family to_family(ms_family family) {
  return static_cast<ms::Family>(family);
}

bool scenario_in_range(ms_scenario scenario) {
  return scenario >= MS_SCENARIO_EQUAL_ACTION &&
         scenario <= MS_SCENARIO_COLLECTIVE;
}

ms::Scenario to_scenario(ms_scenario scenario) {
  return static_cast<ms::Scenario>(scenario);
}

ms::SeriesBudget make_budget(double epsilon) {
  ms::SeriesBudget budget;
  if (epsilon > 0.0) budget.epsilon = epsilon;
  return budget;
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out != nullptr) std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* ms_status_message(ms_status status) {
  switch (status) {
    case MS_OK: return "ok";
    case MS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MS_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case MS_ERR_TERM_OVERFLOW: return "term-count overflow";
    case MS_ERR_TRUNCATION_OVERFLOW: return "series truncation overflow";
    case MS_ERR_NO_CROSSING: return "no threshold crossing";
    case MS_ERR_DIVERGENT: return "divergent bound";
    case MS_ERR_NOT_COVERED: return "combination not covered";
    case MS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ms_last_error(void) { return g_last_error.c_str(); }

const char* ms_family_name(ms_family family) {
  if (!family_in_range(family)) return nullptr;
  return ms::family_name(to_family(family));
}

int ms_family_parse(const char* name) {
  if (name == nullptr) return -1;
  try {
    return static_cast<int>(ms::parse_family(name));
  } catch (const ms::Error& e) {
    g_last_error = e.what();
    return -1;
  }
}

const char* ms_scenario_name(ms_scenario scenario) {
  if (!scenario_in_range(scenario)) return nullptr;
  return ms::scenario_name(to_scenario(scenario));
}

int ms_scenario_parse(const char* name) {
  if (name == nullptr) return -1;
  try {
    return static_cast<int>(ms::parse_scenario(name));
  } catch (const ms::Error& e) {
    g_last_error = e.what();
    return -1;
  }
}

ms_status ms_state_build_family(ms_family family, int n, double alpha_re,
                                double alpha_im, int expansion_cap,
                                ms_state** out) {
  if (out == nullptr) return invalid("out must not be null");
  if (!family_in_range(family)) return invalid("unknown family value");
  *out = nullptr;
  return guarded([&] {
    const ms::FamilySpec spec{to_family(family), n, {alpha_re, alpha_im}};
    const int cap = expansion_cap > 0 ? expansion_cap : ms::kDefaultExpansionCap;
    *out = new ms_state{ms::build_family(spec, cap)};
  });
}

ms_status ms_state_create(int mode_count, int64_t term_count,
                          const double* coeffs, const ms_mode_factor* factors,
                          int normalize, ms_state** out) {
  if (out == nullptr) return invalid("out must not be null");
  if (coeffs == nullptr || factors == nullptr)
    return invalid("coeffs and factors must not be null");
  if (term_count < 1) return invalid("term_count must be >= 1");
  if (mode_count < 1) return invalid("mode_count must be >= 1");
  *out = nullptr;
  return guarded([&] {
    std::vector<ms::WeightedTerm> terms;
    terms.reserve(static_cast<std::size_t>(term_count));
    for (int64_t t = 0; t < term_count; ++t) {
      ms::WeightedTerm wt;
      wt.coefficient = {coeffs[2 * t], coeffs[2 * t + 1]};
      wt.term.reserve(static_cast<std::size_t>(mode_count));
      for (int m = 0; m < mode_count; ++m) {
        const ms_mode_factor& f = factors[t * mode_count + m];
        wt.term.push_back(f.is_number
                              ? ms::ModeFactor::number(f.occupation)
                              : ms::ModeFactor::coherent(
                                    {f.alpha_re, f.alpha_im}));
      }
      terms.push_back(std::move(wt));
    }
    ms::SuperpositionState state(std::move(terms), mode_count);
    if (normalize != 0) state = state.normalized();
    *out = new ms_state{std::move(state)};
  });
}

void ms_state_free(ms_state* state) { delete state; }

int ms_state_mode_count(const ms_state* state) {
  return state == nullptr ? 0 : state->value.mode_count();
}

int64_t ms_state_term_count(const ms_state* state) {
  return state == nullptr ? 0
                          : static_cast<int64_t>(state->value.term_count());
}

ms_status ms_inner_product(const ms_state* a, const ms_state* b,
                           double* out_re, double* out_im) {
  if (a == nullptr || b == nullptr) return invalid("states must not be null");
  if (out_re == nullptr || out_im == nullptr)
    return invalid("outputs must not be null");
  return guarded([&] {
    const ms::Complex result = ms::inner_product(a->value, b->value);
    *out_re = result.real();
    *out_im = result.imag();
  });
}

ms_status ms_mean_photon_number(const ms_state* state, double* out) {
  if (state == nullptr || out == nullptr)
    return invalid("arguments must not be null");
  return guarded([&] { *out = ms::mean_photon_number(state->value); });
}

ms_status ms_nominal_mean_photon(ms_family family, int n, double alpha_re,
                                 double alpha_im, double* out) {
  if (out == nullptr) return invalid("out must not be null");
  if (!family_in_range(family)) return invalid("unknown family value");
  return guarded([&] {
    *out = ms::nominal_mean_photon(
        ms::FamilySpec{to_family(family), n, {alpha_re, alpha_im}});
  });
}

ms_status ms_evolution_per_mode(double k, const double* weights,
                                int mode_count, ms_evolution** out) {
  if (out == nullptr) return invalid("out must not be null");
  if (weights == nullptr) return invalid("weights must not be null");
  if (mode_count < 1) return invalid("mode_count must be >= 1");
  *out = nullptr;
  return guarded([&] {
    *out = new ms_evolution{ms::EvolutionSpec::per_mode(
        k, std::vector<double>(weights, weights + mode_count))};
  });
}

ms_status ms_evolution_collective(double k, double weight, int mode_count,
                                  ms_evolution** out) {
  if (out == nullptr) return invalid("out must not be null");
  *out = nullptr;
  return guarded([&] {
    *out = new ms_evolution{ms::EvolutionSpec::collective(k, weight, mode_count)};
  });
}

ms_status ms_evolution_for_scenario(ms_family family, int n, double k,
                                    ms_scenario scenario, ms_evolution** out) {
  if (out == nullptr) return invalid("out must not be null");
  if (!family_in_range(family)) return invalid("unknown family value");
  if (!scenario_in_range(scenario)) return invalid("unknown scenario value");
  *out = nullptr;
  return guarded([&] {
    const ms::FamilySpec spec{to_family(family), n, {1.0, 0.0}};
    *out = new ms_evolution{ms::make_evolution(spec, k, to_scenario(scenario))};
  });
}

void ms_evolution_free(ms_evolution* evolution) { delete evolution; }

ms_status ms_evolved_overlap(const ms_state* state,
                             const ms_evolution* evolution, double theta,
                             double epsilon, double* out_re, double* out_im) {
  if (state == nullptr || evolution == nullptr)
    return invalid("state and evolution must not be null");
  if (out_re == nullptr || out_im == nullptr)
    return invalid("outputs must not be null");
  return guarded([&] {
    const ms::Complex result = ms::evolved_overlap(
        state->value, evolution->value, theta, make_budget(epsilon));
    *out_re = result.real();
    *out_im = result.imag();
  });
}

ms_status ms_distinguishability(const ms_state* state,
                                const ms_evolution* evolution, double theta,
                                double epsilon, double* out) {
  if (state == nullptr || evolution == nullptr || out == nullptr)
    return invalid("arguments must not be null");
  return guarded([&] {
    *out = ms::distinguishability(state->value, evolution->value, theta,
                                  make_budget(epsilon));
  });
}

ms_status ms_analytic_distinguishability(ms_family family, int n,
                                         double alpha_re, double alpha_im,
                                         double k, double theta, double* out) {
  if (out == nullptr) return invalid("out must not be null");
  if (!family_in_range(family)) return invalid("unknown family value");
  return guarded([&] {
    *out = ms::analytic_distinguishability(
        ms::FamilySpec{to_family(family), n, {alpha_re, alpha_im}}, k, theta);
  });
}

ms_status ms_theta_min(const ms_state* state, const ms_evolution* evolution,
                       double delta, double theta_max,
                       int scan_points_per_period, double bisection_tol,
                       double epsilon, ms_theta_min_result* out) {
  if (state == nullptr || evolution == nullptr || out == nullptr)
    return invalid("arguments must not be null");
  return guarded([&] {
    ms::ThetaMinRequest request;
    request.delta = delta;
    request.theta_max = theta_max;
    if (scan_points_per_period > 0)
      request.scan_points_per_period = scan_points_per_period;
    if (bisection_tol > 0.0) request.bisection_tol = bisection_tol;
    const ms::ThetaMinResult result = ms::theta_min(
        state->value, evolution->value, request, make_budget(epsilon));
    out->theta_min = result.theta_min;
    out->achieved_d = result.achieved_d;
    out->bracket_lo = result.bracket_lo;
    out->bracket_hi = result.bracket_hi;
    out->scan_step = result.scan_step;
    out->crossings_found = result.crossings_found;
  });
}

ms_status ms_predicted_theta_min(ms_family family, int n, double alpha_re,
                                 double alpha_im, double k,
                                 ms_scenario scenario, double delta,
                                 int exact_arccos, double* out) {
  if (out == nullptr) return invalid("out must not be null");
  if (!family_in_range(family)) return invalid("unknown family value");
  if (!scenario_in_range(scenario)) return invalid("unknown scenario value");
  return guarded([&] {
    *out = ms::predicted_theta_min(
        ms::FamilySpec{to_family(family), n, {alpha_re, alpha_im}}, k,
        to_scenario(scenario), delta, exact_arccos != 0);
  });
}

ms_status ms_cramer_rao_rhs(double delta_theta, int64_t measurements, double d,
                            double* out) {
  if (out == nullptr) return invalid("out must not be null");
  return guarded([&] {
    *out = ms::cramer_rao_rhs(ms::CramerRaoQuery{delta_theta, measurements, d});
  });
}

ms_status ms_statistics_factor(ms_family family, int n, double* out) {
  if (out == nullptr) return invalid("out must not be null");
  if (!family_in_range(family)) return invalid("unknown family value");
  return guarded([&] {
    *out = ms::statistics_factor(
        ms::FamilySpec{to_family(family), n, {1.0, 0.0}});
  });
}

ms_status ms_refinement_plan(double nbar_final, int* out_steps,
                             double* out_nbar_total) {
  if (out_steps == nullptr || out_nbar_total == nullptr)
    return invalid("outputs must not be null");
  return guarded([&] {
    const ms::RefinementPlan plan = ms::refinement_plan(nbar_final);
    *out_steps = plan.steps;
    *out_nbar_total = plan.nbar_total;
  });
}

ms_status ms_sweep_run_config(const char* config_text, double default_epsilon,
                              int threads, char** out_csv,
                              char** out_output_path, int64_t* rows_ok,
                              int64_t* rows_total) {
  if (config_text == nullptr) return invalid("config_text must not be null");
  if (out_csv == nullptr) return invalid("out_csv must not be null");
  *out_csv = nullptr;
  if (out_output_path != nullptr) *out_output_path = nullptr;
  return guarded([&] {
    const double epsilon = default_epsilon > 0.0 ? default_epsilon : 1e-12;
    const ms::ExperimentConfig config =
        ms::parse_experiment_config(config_text, epsilon);
    const int workers =
        threads > 0 ? threads
                    : std::max(1u, std::thread::hardware_concurrency());
    const std::vector<ms::ExperimentRecord> records =
        ms::run_sweep(config.spec, workers);
    int64_t ok = 0;
    for (const auto& rec : records) {
      // Analytic-only separable rows are by-design, not failures.
      if (rec.ok() || rec.status == "analytic_only") ++ok;
    }
    if (rows_ok != nullptr) *rows_ok = ok;
    if (rows_total != nullptr)
      *rows_total = static_cast<int64_t>(records.size());
    char* csv = dup_string(ms::sweep_csv(records));
    if (csv == nullptr) throw std::bad_alloc();
    if (out_output_path != nullptr) {
      *out_output_path = dup_string(config.output_path);
      if (*out_output_path == nullptr) {
        std::free(csv);
        throw std::bad_alloc();
      }
    }
    *out_csv = csv;
  });
}

void ms_string_free(char* text) { std::free(text); }

ms_status ms_table_report(int which, int n, double nbar, double delta,
                          double epsilon, ms_table_cell cells[9]) {
  if (cells == nullptr) return invalid("cells must not be null");
  return guarded([&] {
    const ms::TableReport report =
        ms::table_report(which, n, nbar, delta, make_budget(epsilon));
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        const ms::TableCell& cell = report.cells[row][col];
        ms_table_cell& out = cells[row * 3 + col];
        out.numeric = cell.numeric;
        out.predicted = cell.predicted;
        out.relative_error = cell.relative_error;
        out.status = cell.status == "ok" ? 0 : MS_ERR_INTERNAL;
        if (cell.status != "ok") g_last_error = cell.status;
      }
    }
  });
}

ms_status ms_table_report_csv(int which, int n, double nbar, double delta,
                              double epsilon, char** out_csv) {
  if (out_csv == nullptr) return invalid("out_csv must not be null");
  *out_csv = nullptr;
  return guarded([&] {
    const ms::TableReport report =
        ms::table_report(which, n, nbar, delta, make_budget(epsilon));
    *out_csv = dup_string(ms::table_csv(report));
    if (*out_csv == nullptr) throw std::bad_alloc();
  });
}

}  // extern "C"
