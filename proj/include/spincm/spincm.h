/*
 * C interface of the spincm shared library.
 *
 * All entry points return a status code; SPINCM_OK is 0.  On failure a
 * thread-local message is available through spincm_last_error().  Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with spincm_string_free(); handles have matching *_free
 * functions.  Handles are opaque and safe to share across threads as long
 * as each is used from one thread at a time.
 */
#ifndef SPINCM_H
#define SPINCM_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spincm_status {
  SPINCM_OK = 0,
  SPINCM_ERR_INVALID_ARGUMENT = 1,
  SPINCM_ERR_NEAR_DEGENERATE_SPECTRUM = 2,
  SPINCM_ERR_NO_CONVERGENCE = 3,
  SPINCM_ERR_DECOMPOSITION_FAILED = 4,
  SPINCM_ERR_BRANCH_CUT = 5,
  SPINCM_ERR_SINGULAR_DENOMINATOR = 6,
  SPINCM_ERR_OVERFLOW = 7,
  SPINCM_ERR_SINGULAR_SHIFTED_DIFFERENCE = 8,
  SPINCM_ERR_SINGULAR_SYSTEM = 9,
  SPINCM_ERR_INCONSISTENT_DATA = 10,
  SPINCM_ERR_STEP_TOO_LARGE = 11,
  SPINCM_ERR_CONFIG = 12,
  SPINCM_ERR_IO = 13,
  SPINCM_ERR_PROPERTY_FAILED = 14,
  SPINCM_ERR_NUMERIC = 15,
  SPINCM_ERR_INTERNAL = 16
} spincm_status;

const char* spincm_status_name(spincm_status status);
const char* spincm_last_error(void);
const char* spincm_version(void);
void spincm_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Configuration: flat key = value pairs (see README for the key list). */

typedef struct spincm_config spincm_config;

spincm_config* spincm_config_new(void);
void spincm_config_free(spincm_config* cfg);
spincm_status spincm_config_set(spincm_config* cfg, const char* key, const char* value);
/* Returns NULL when the key is unset. The pointer stays valid until the
 * next mutation of the handle. */
const char* spincm_config_get(const spincm_config* cfg, const char* key);
spincm_status spincm_config_load_file(spincm_config* cfg, const char* path);

/* ------------------------------------------------------------------ */
/* High-level runs.  Artifacts (CSV, JSON) are written under the        */
/* configured output directory; the summary/report JSON is also         */
/* returned.  run_check reports SPINCM_ERR_PROPERTY_FAILED when a       */
/* property fails; the report is still returned in that case.           */

spincm_status spincm_run_simulate(const spincm_config* cfg, char** summary_json);
spincm_status spincm_run_exact(const spincm_config* cfg, char** summary_json);
spincm_status spincm_run_check(const spincm_config* cfg, const char* suite, char** report_json);
spincm_status spincm_run_degeneration_scan(const spincm_config* cfg, char** summary_json);

/* ------------------------------------------------------------------ */
/* Phase points.  JSON schemas:                                         */
/*   CM: {"n", "convention", "q", "p", "mu" | "phi"+"psi"}              */
/*   RS: {"n", "h", "g"}                                                */
/* with complex numbers encoded as [re, im] and matrices row-major.     */

typedef struct spincm_cm_point spincm_cm_point;
typedef struct spincm_rs_point spincm_rs_point;

spincm_status spincm_cm_point_parse(const char* json, spincm_cm_point** out);
spincm_status spincm_cm_point_to_json(const spincm_cm_point* pt, char** json);
void spincm_cm_point_free(spincm_cm_point* pt);
int spincm_cm_point_dim(const spincm_cm_point* pt);

spincm_status spincm_rs_point_parse(const char* json, spincm_rs_point** out);
spincm_status spincm_rs_point_to_json(const spincm_rs_point* pt, char** json);
void spincm_rs_point_free(spincm_rs_point* pt);
int spincm_rs_point_dim(const spincm_rs_point* pt);

/* Exact flows. */
spincm_status spincm_cm_exact_flow(const spincm_cm_point* pt, int k, double t,
                                   spincm_cm_point** out);
spincm_status spincm_rs_exact_flow(const spincm_rs_point* pt, int k, double t,
                                   spincm_rs_point** out);

/* Invariants tr(x^j)/j for j = 2..kmax; out_re/out_im hold kmax-1 values. */
spincm_status spincm_cm_invariants(const spincm_cm_point* pt, int kmax, double* out_re,
                                   double* out_im);
/* Reduced Hamiltonian value. */
spincm_status spincm_cm_hamiltonian(const spincm_cm_point* pt, double* out_re, double* out_im);
/* Action variables (sorted Lax spectrum) and angle variables (traceless
 * log of the Gauss torus factor); n values each. */
spincm_status spincm_cm_actions(const spincm_cm_point* pt, double* out_re, double* out_im);
spincm_status spincm_cm_angles(const spincm_cm_point* pt, double* out_re, double* out_im);
spincm_status spincm_rs_actions(const spincm_rs_point* pt, double* out_re, double* out_im);
spincm_status spincm_rs_angles(const spincm_rs_point* pt, double* out_re, double* out_im);

#ifdef __cplusplus
}
#endif

#endif /* SPINCM_H */
