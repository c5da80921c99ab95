#ifndef GPDYN_GPDYN_H
#define GPDYN_GPDYN_H

/* C interface to the gpdyn library. All functions return a gpd_status;
 * on failure gpd_last_error() describes the problem (thread-local, valid
 * until the next call on the same thread). */

#include <stddef.h>

#if defined(GPDYN_BUILDING_LIBRARY)
#define GPD_API __attribute__((visibility("default")))
#else
#define GPD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gpd_status {
  GPD_OK = 0,
  GPD_CONFIG_ERROR = 1,    /* invalid configuration or input file */
  GPD_RUNTIME_ABORT = 2,   /* numerical guard tripped, I/O failure */
  GPD_INVALID_ARGUMENT = 3,
  GPD_INTERNAL_ERROR = 4
} gpd_status;

typedef struct gpd_model gpd_model;
typedef struct gpd_field gpd_field;

GPD_API const char* gpd_version(void);
GPD_API const char* gpd_last_error(void);

/* Model handle. */
GPD_API gpd_status gpd_model_create(double omega, double a, double c, double mass, double hbar, gpd_model** out);
GPD_API void gpd_model_destroy(gpd_model* model);

/* Adiabatic surfaces at (x, y): w[0] = W+, w[1] = W-, theta = mixing angle,
 * d1 = <psi_1|grad psi_2>. Any output pointer may be NULL. Evaluating at
 * the intersection returns GPD_RUNTIME_ABORT. */
GPD_API gpd_status gpd_model_adiabatic(const gpd_model* model, double x, double y, double w[2], double* theta,
                                       double d1[2]);

/* Winding numbers of the two appendix contours z_c +/- (d + r e^{i phi})/2. */
GPD_API gpd_status gpd_contour_winding(const gpd_model* model, double zc_re, double zc_im, double d, double r,
                                       int n_phi, int* winding_minus, int* winding_plus);

/* Two-component diabatic wavepacket on an nx x ny grid; `state` is 1 or 2. */
GPD_API gpd_status gpd_field_create_packet(const gpd_model* model, int nx, int ny, double x_min, double x_max,
                                           double y_min, double y_max, double x0, double y0, double px, double py,
                                           double sigma, int state, gpd_field** out);
GPD_API void gpd_field_destroy(gpd_field* field);
GPD_API gpd_status gpd_field_propagate(gpd_field* field, const gpd_model* model, double dt, long n_steps);
GPD_API gpd_status gpd_field_left_fraction(const gpd_field* field, double* out);
GPD_API gpd_status gpd_field_norm(const gpd_field* field, double* out);
GPD_API gpd_status gpd_field_time(const gpd_field* field, double* out);

/* Run-configuration entry points used by the command line tool. A NULL
 * output_dir keeps the directory from the configuration. Summary lines go
 * to stdout, progress to stderr when verbose is nonzero. gpd_compare writes
 * its table to output_path, or stdout when NULL. */
GPD_API gpd_status gpd_validate_config(const char* path);
GPD_API gpd_status gpd_run_config(const char* path, const char* output_dir, int verbose);
GPD_API gpd_status gpd_compare(const char* const* dirs, size_t n_dirs, double x_lo, double x_hi, double off_axis,
                               const char* output_path);

#ifdef __cplusplus
}
#endif

#endif
