/*
 * compart_h2 C API.
 *
 * H2-optimal static state feedback u = -Kx for discrete-time plants, subject
 * to the closed loop A - BK being compartmental (elementwise nonnegative,
 * column sums at most one). Solved by first-order (FIPM) or second-order
 * (SIPM) log-barrier interior-point iterations.
 *
 * Conventions:
 *   - every matrix crossing this boundary is a dense row-major double array;
 *   - plants and reports are opaque handles released with their _free call;
 *   - every fallible call returns ch2_status. On failure ch2_last_error()
 *     holds a message for the calling thread until its next failing call.
 */
#ifndef COMPART_H2_H
#define COMPART_H2_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(CH2_BUILDING_LIBRARY)
#    define CH2_API __declspec(dllexport)
#  else
#    define CH2_API __declspec(dllimport)
#  endif
#else
#  define CH2_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ch2_status {
  CH2_OK = 0,
  CH2_INVALID_ARGUMENT = 1,
  CH2_DIMENSION_MISMATCH = 2,
  CH2_NOT_SCHUR = 3,
  CH2_SINGULAR_SYSTEM = 4,
  CH2_EIGEN_FAILURE = 5,
  CH2_INFEASIBLE_POINT = 6,
  CH2_INFEASIBLE_START = 7,
  CH2_LINE_SEARCH_FAILED = 8,
  CH2_PHASE_ONE_FAILED = 9,
  CH2_ASSUMPTION_VIOLATED = 10,
  CH2_ITERATION_DIVERGED = 11,
  CH2_INTERNAL_ERROR = 99
} ch2_status;

typedef enum ch2_method { CH2_FIPM = 0, CH2_SIPM = 1 } ch2_method;

typedef enum ch2_replicate_mode {
  CH2_REPLICATE_BLOCKDIAG = 0,
  CH2_REPLICATE_PAPER_CONCAT = 1
} ch2_replicate_mode;

typedef struct ch2_plant ch2_plant;
typedef struct ch2_report ch2_report;

typedef struct ch2_config {
  double t0;             /* initial barrier weight */
  double mu;             /* barrier growth factor, > 1 */
  double eps1;           /* inner gradient tolerance */
  double eps2;           /* outer step tolerance */
  double eps_r;          /* constraint relaxation S >= -eps_r */
  double delta;          /* Hessian eigenvalue floor (SIPM) */
  double armijo_sigma;
  double armijo_beta;
  double armijo_s0_fipm;
  int max_inner_fipm;
  int max_inner_sipm;
  int max_outer;
  int max_backtracks;
  int threads;              /* Hessian column workers, 0 = auto */
  int enforce_assumptions;  /* nonzero: D^T C = 0 and D^T D > 0 are required */
} ch2_config;

typedef struct ch2_kkt {
  double stationarity;
  double dual_feasibility;
  double primal_feasibility;
  double complementarity;
} ch2_kkt;

typedef struct ch2_trace_record {
  double t;
  int inner_iterations;
  double grad_norm;
  double J;
  double cumulative_seconds;
} ch2_trace_record;

typedef struct ch2_summary {
  ch2_method method;
  int converged;
  double J;
  double grad_norm;  /* ||G_JLBF|| at the final gain and barrier weight */
  double final_t;
  int outer_iterations;
  int total_inner_iterations;
  int inner_capped;
  int assumption_warnings;
  ch2_kkt kkt;
} ch2_summary;

typedef struct ch2_verification {
  int schur;
  double spectral_radius;
  int compartmental;      /* min_slack >= -eps_r */
  int strictly_feasible;  /* min_slack > 0 */
  double min_slack;
  size_t worst_row;       /* argmin of the (n+1)xn constraint stack */
  size_t worst_col;
  int cost_defined;       /* J is only defined for Schur closed loops */
  double J;
  int multiplier_defined; /* relaxed slack positive, so Q = (1/t)(S+eps_r)^-1 exists */
  ch2_kkt kkt;
} ch2_verification;

typedef struct ch2_derivative_check {
  double grad_J;           /* analytic vs finite differences, relative */
  double hessian_J;
  double hessian_asymmetry;
  int barrier_defined;     /* zero when the FD stencil leaves the relaxed interior */
  double barrier_grad;
  double barrier_hessian;
} ch2_derivative_check;

typedef struct ch2_start_check {
  int ok;
  double min_slack;
  double spectral_radius;
  size_t worst_row;
  size_t worst_col;
} ch2_start_check;

CH2_API const char* ch2_version(void);
CH2_API const char* ch2_status_name(ch2_status status);
CH2_API const char* ch2_last_error(void);

/* ---- plants ---- */
CH2_API ch2_status ch2_plant_create(const double* A, const double* B, const double* C,
                                    const double* D, const double* G, size_t n, size_t m,
                                    size_t r, size_t q, ch2_plant** out);
CH2_API void ch2_plant_free(ch2_plant* plant);
CH2_API ch2_status ch2_plant_dims(const ch2_plant* plant, size_t* n, size_t* m, size_t* r,
                                  size_t* q);
/* which is one of 'A','B','C','D','G'; out must hold rows*cols doubles. */
CH2_API ch2_status ch2_plant_matrix(const ch2_plant* plant, char which, double* out);
/* Writes a '; '-separated description of violated standing assumptions. */
CH2_API ch2_status ch2_plant_validate(const ch2_plant* plant, int* violations, char* message,
                                      size_t message_len);
CH2_API ch2_status ch2_plant_replicate(const ch2_plant* plant, size_t copies,
                                       ch2_replicate_mode mode, ch2_plant** out);

/* ---- gains ---- */
/* vs holds `count` vectors of length m back to back; K is m x count. */
CH2_API ch2_status ch2_rank_one_gain(const double* vs, size_t count, size_t m, double* k_out);
/* out is (m*copies) x (n*copies). */
CH2_API ch2_status ch2_gain_block_diag(const double* k, size_t m, size_t n, size_t copies,
                                       double* out);

/* ---- synthesis ---- */
CH2_API void ch2_config_default(ch2_config* config);
CH2_API ch2_status ch2_solve(const ch2_plant* plant, const double* k0, ch2_method method,
                             const ch2_config* config, ch2_report** out);
CH2_API void ch2_report_free(ch2_report* report);
CH2_API ch2_status ch2_report_summary(const ch2_report* report, ch2_summary* out);
CH2_API ch2_status ch2_report_gain(const ch2_report* report, double* k_out);
CH2_API ch2_status ch2_report_multiplier(const ch2_report* report, double* q_out);
CH2_API size_t ch2_report_trace_length(const ch2_report* report);
CH2_API ch2_status ch2_report_trace(const ch2_report* report, size_t index,
                                    ch2_trace_record* out);

/* ---- analysis ---- */
CH2_API ch2_status ch2_eval_cost(const ch2_plant* plant, const double* k, double* J);
CH2_API ch2_status ch2_min_slack(const ch2_plant* plant, const double* k, double* slack);
CH2_API ch2_status ch2_verify(const ch2_plant* plant, const double* k, double t, double eps_r,
                              ch2_verification* out);
CH2_API ch2_status ch2_grad_check(const ch2_plant* plant, const double* k, double t,
                                  double eps_r, ch2_derivative_check* out);
CH2_API ch2_status ch2_check_start(const ch2_plant* plant, const double* k,
                                   ch2_start_check* out);
/* On CH2_PHASE_ONE_FAILED k_out and achieved_slack still hold the best gain found. */
CH2_API ch2_status ch2_phase1(const ch2_plant* plant, const double* k_start,
                              double target_slack, double* k_out, double* achieved_slack);

#ifdef __cplusplus
}
#endif

#endif /* COMPART_H2_H */
