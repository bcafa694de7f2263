/* metroscope C API
 *
 * Thin extern-C surface over the metroscope core. All functions return an
 * ms_status; MS_OK means success and every output parameter is filled.
 * On failure ms_last_error() returns a thread-local message describing what
 * went wrong. Objects are opaque handles released with their _free
 * function; handles are immutable after creation and safe to share across
 * threads.
 */

#ifndef METROSCOPE_H
#define METROSCOPE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MS_API __declspec(dllexport)
#else
#define MS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ms_status {
  MS_OK = 0,
  MS_ERR_INVALID_ARGUMENT = 1,
  MS_ERR_DIMENSION_MISMATCH = 2,
  MS_ERR_TERM_OVERFLOW = 3,
  MS_ERR_TRUNCATION_OVERFLOW = 4,
  MS_ERR_NO_CROSSING = 5,
  MS_ERR_DIVERGENT = 6,
  MS_ERR_NOT_COVERED = 7,
  MS_ERR_INTERNAL = 8
} ms_status;

typedef enum ms_family {
  MS_FAMILY_COHERENT_CAT = 0,
  MS_FAMILY_COHERENT_ENTANGLED = 1,
  MS_FAMILY_COHERENT_SEPARABLE = 2,
  MS_FAMILY_NUMBER_CAT = 3,
  MS_FAMILY_NUMBER_ENTANGLED = 4,
  MS_FAMILY_NUMBER_SEPARABLE = 5,
  MS_FAMILY_NOON = 6
} ms_family;

typedef enum ms_scenario {
  MS_SCENARIO_EQUAL_ACTION = 0,
  MS_SCENARIO_CONSTRAINED = 1,
  MS_SCENARIO_COLLECTIVE = 2
} ms_scenario;

typedef struct ms_state ms_state;
typedef struct ms_evolution ms_evolution;

/* Static description of a status code. */
MS_API const char* ms_status_message(ms_status status);
/* Thread-local message for the most recent failure on this thread. */
MS_API const char* ms_last_error(void);

/* Name <-> enum mapping for families and scenarios as used in CSV output
 * and config files. ms_family_parse/ms_scenario_parse return -1 on unknown
 * names. ms_family_name returns NULL for out-of-range values. */
MS_API const char* ms_family_name(ms_family family);
MS_API int ms_family_parse(const char* name);
MS_API const char* ms_scenario_name(ms_scenario scenario);
MS_API int ms_scenario_parse(const char* name);

/* ---- states ---- */

/* Builds one of the builtin families, normalized to unit norm.
 * expansion_cap limits the 2^N separable expansion; pass 0 for the
 * default (20). */
MS_API ms_status ms_state_build_family(ms_family family, int n,
                                       double alpha_re, double alpha_im,
                                       int expansion_cap, ms_state** out);

typedef struct ms_mode_factor {
  int is_number;       /* 0: coherent, 1: number */
  int64_t occupation;  /* number factors */
  double alpha_re;     /* coherent factors */
  double alpha_im;
} ms_mode_factor;

/* General superposition of product terms. coeffs holds term_count (re, im)
 * pairs; factors holds term_count * mode_count entries, row-major by term.
 * normalize != 0 rescales to unit norm. */
MS_API ms_status ms_state_create(int mode_count, int64_t term_count,
                                 const double* coeffs,
                                 const ms_mode_factor* factors, int normalize,
                                 ms_state** out);

MS_API void ms_state_free(ms_state* state);
MS_API int ms_state_mode_count(const ms_state* state);
MS_API int64_t ms_state_term_count(const ms_state* state);

MS_API ms_status ms_inner_product(const ms_state* a, const ms_state* b,
                                  double* out_re, double* out_im);
MS_API ms_status ms_mean_photon_number(const ms_state* state, double* out);
MS_API ms_status ms_nominal_mean_photon(ms_family family, int n,
                                        double alpha_re, double alpha_im,
                                        double* out);

/* ---- evolution ---- */

MS_API ms_status ms_evolution_per_mode(double k, const double* weights,
                                       int mode_count, ms_evolution** out);
MS_API ms_status ms_evolution_collective(double k, double weight,
                                         int mode_count, ms_evolution** out);
/* Evolution realizing the scenario's weight rule for a family (equal split
 * 1/N for the constrained scenario, (w, 0) for the N00N state). */
MS_API ms_status ms_evolution_for_scenario(ms_family family, int n, double k,
                                           ms_scenario scenario,
                                           ms_evolution** out);
MS_API void ms_evolution_free(ms_evolution* evolution);

/* epsilon <= 0 selects the default series budget (1e-12). */
MS_API ms_status ms_evolved_overlap(const ms_state* state,
                                    const ms_evolution* evolution,
                                    double theta, double epsilon,
                                    double* out_re, double* out_im);
MS_API ms_status ms_distinguishability(const ms_state* state,
                                       const ms_evolution* evolution,
                                       double theta, double epsilon,
                                       double* out);
MS_API ms_status ms_analytic_distinguishability(ms_family family, int n,
                                                double alpha_re,
                                                double alpha_im, double k,
                                                double theta, double* out);

/* ---- metrology ---- */

typedef struct ms_theta_min_result {
  double theta_min;
  double achieved_d;
  double bracket_lo;
  double bracket_hi;
  double scan_step;
  int64_t crossings_found;
} ms_theta_min_result;

/* scan_points_per_period <= 0 and bisection_tol <= 0 select the defaults
 * (64 and 1e-10). */
MS_API ms_status ms_theta_min(const ms_state* state,
                              const ms_evolution* evolution, double delta,
                              double theta_max, int scan_points_per_period,
                              double bisection_tol, double epsilon,
                              ms_theta_min_result* out);

MS_API ms_status ms_predicted_theta_min(ms_family family, int n,
                                        double alpha_re, double alpha_im,
                                        double k, ms_scenario scenario,
                                        double delta, int exact_arccos,
                                        double* out);

MS_API ms_status ms_cramer_rao_rhs(double delta_theta, int64_t measurements,
                                   double d, double* out);

/* sqrt(N) for the separable families, 1 otherwise; divide a single-shot
 * numeric theta_min by this before comparing with the predictor. */
MS_API ms_status ms_statistics_factor(ms_family family, int n, double* out);

/* ---- sweeps and reports ---- */

MS_API ms_status ms_refinement_plan(double nbar_final, int* out_steps,
                                    double* out_nbar_total);

/* Parses the config text, runs the sweep, and returns the full CSV
 * (header + one row per grid point) as a malloc'd string released with
 * ms_string_free. Also reports the configured output path (malloc'd;
 * empty string when the config has none). Per-point failures become error
 * rows; rows_ok counts the rest. threads <= 0 uses the hardware count. */
MS_API ms_status ms_sweep_run_config(const char* config_text,
                                     double default_epsilon, int threads,
                                     char** out_csv, char** out_output_path,
                                     int64_t* rows_ok, int64_t* rows_total);

MS_API void ms_string_free(char* text);

typedef struct ms_table_cell {
  double numeric;
  double predicted;
  double relative_error;
  int status; /* 0 = ok, else the ms_status of the per-cell failure */
} ms_table_cell;

/* Fills the 3x3 grid (rows k in {1/2, 1, 2}; columns cat, entangled,
 * separable) for table 1 (coherent families at N, nbar) or table 2 (number
 * families at N). Cells are row-major. */
MS_API ms_status ms_table_report(int which, int n, double nbar, double delta,
                                 double epsilon, ms_table_cell cells[9]);

/* Same report serialized as CSV (malloc'd). */
MS_API ms_status ms_table_report_csv(int which, int n, double nbar,
                                     double delta, double epsilon,
                                     char** out_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* METROSCOPE_H */
