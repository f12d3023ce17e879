#ifndef NONEXP_NONEXP_H
#define NONEXP_NONEXP_H

/* C interface to libnonexp. Strings returned by the library are owned by the
 * caller and released with nxp_string_free. On failure every call returns a
 * non-zero status and nxp_last_error() describes it (per thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NONEXP_BUILDING)
#    define NXP_API __declspec(dllexport)
#  else
#    define NXP_API __declspec(dllimport)
#  endif
#else
#  define NXP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nxp_status {
  NXP_OK = 0,
  NXP_INVALID_ARGUMENT = 1,
  NXP_DIMENSION_MISMATCH = 2,
  NXP_OUTSIDE_BALL = 3,
  NXP_NOT_NONEXPANSIVE = 4,
  NXP_NO_CONVERGENCE = 5,
  NXP_CERTIFICATION_FAILED = 6,
  NXP_UNSUPPORTED = 7,
  NXP_NO_PAIR_FOUND = 8,
  NXP_DEGENERATE = 9,
  NXP_SCHEMA = 10,
  NXP_INTERNAL = 99
} nxp_status;

typedef enum nxp_norm { NXP_L1 = 0, NXP_L2 = 1, NXP_LINF = 2 } nxp_norm;

typedef enum nxp_point_tag {
  NXP_INTERIOR = 0,
  NXP_EXPOSED = 1,
  NXP_ALMOST_EXPOSED_ONLY = 2,
  NXP_BOUNDARY_NOT_ALMOST_EXPOSED = 3
} nxp_point_tag;

typedef struct nxp_mapping nxp_mapping;

NXP_API const char* nxp_version(void);
NXP_API const char* nxp_last_error(void);
NXP_API void nxp_string_free(char* s);

NXP_API nxp_status nxp_norm_value(nxp_norm norm, const double* x, size_t n, double* out);
/* a is row-major n x n. */
NXP_API nxp_status nxp_operator_norm(nxp_norm norm, const double* a, size_t n, double* out);
NXP_API nxp_status nxp_classify_point(nxp_norm norm, const double* x, size_t n, double tol,
                                      nxp_point_tag* tag, int* extreme);

NXP_API nxp_status nxp_mapping_parse(const char* json, nxp_mapping** out);
NXP_API void nxp_mapping_free(nxp_mapping* m);
NXP_API size_t nxp_mapping_dim(const nxp_mapping* m);
NXP_API nxp_status nxp_mapping_evaluate(const nxp_mapping* m, const double* x, double* y);
NXP_API nxp_status nxp_mapping_to_json(const nxp_mapping* m, char** out);

/* Linear maps on linf^n: *extremal is 1 or 0; *certificate_json receives the
 * decomposition (or NULL when extremal). */
NXP_API nxp_status nxp_classify_linear(const double* a, size_t n, double tol, int* extremal,
                                       char** certificate_json);

/* Runs a command config; *report always receives a JSON report when the
 * status is NXP_OK, with *exit_code 0 (ok), 1 (input error) or 2 (refuted). */
NXP_API nxp_status nxp_run(const char* config_json, int csv, char** report, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
