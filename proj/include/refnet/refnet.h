/*
 * C interface to librefnet.
 *
 * Objects are opaque handles created by the library and released with the
 * matching *_destroy function. Every call that can fail returns a
 * refnet_status; on failure, refnet_last_error() describes the problem for
 * the calling thread until its next failing call. Handles are immutable
 * once created and may be shared between threads.
 *
 * Functions that fill caller buffers take a capacity and report the
 * number of elements required through an out parameter; a NULL buffer
 * with capacity zero only queries the size and returns REFNET_OK. A short
 * buffer yields REFNET_ERR_BUFFER_TOO_SMALL and leaves it untouched.
 */
#ifndef REFNET_REFNET_H_
#define REFNET_REFNET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(REFNET_BUILDING_LIBRARY)
#    define REFNET_API __declspec(dllexport)
#  else
#    define REFNET_API __declspec(dllimport)
#  endif
#else
#  define REFNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum refnet_status {
  REFNET_OK = 0,
  REFNET_ERR_INVALID_ARGUMENT = 1,
  REFNET_ERR_DIMENSION_MISMATCH = 2,
  REFNET_ERR_PARSE = 3,
  REFNET_ERR_IO = 4,
  REFNET_ERR_NOT_FACTORABLE = 5,
  REFNET_ERR_NOT_CONVERGENT = 6,
  REFNET_ERR_UNSUPPORTED_DEGREE = 7,
  REFNET_ERR_DOMAIN = 8,
  REFNET_ERR_DEGREE_TOO_SMALL = 9,
  REFNET_ERR_NOT_REFINABLE = 10,
  REFNET_ERR_NO_FOLLOWING_LAYER = 11,
  REFNET_ERR_EMPTY_DATASET = 12,
  REFNET_ERR_POSITION_OUT_OF_RANGE = 13,
  REFNET_ERR_EMPTY_ARCHITECTURE = 14,
  REFNET_ERR_BUFFER_TOO_SMALL = 15,
  REFNET_ERR_INTERNAL = 99
} refnet_status;

REFNET_API const char* refnet_status_name(refnet_status status);
REFNET_API const char* refnet_last_error(void);

typedef struct refnet_activation refnet_activation;
typedef struct refnet_network refnet_network;
typedef struct refnet_dataset refnet_dataset;

/* ---- spline closed forms ---------------------------------------------- */

REFNET_API refnet_status refnet_spline_phi(int degree, double t, double* out);
REFNET_API refnet_status refnet_spline_sigma(int degree, double t, double* out);
REFNET_API refnet_status refnet_spline_sigma_prime(int degree, double t, double* out);
/* degree 1 or 2 only; y is an activation value in [-1/2, 1/2]. */
REFNET_API refnet_status refnet_sigma_prime_from_value(int degree, double y, double* out);

/* ---- activations ------------------------------------------------------- */

typedef enum refnet_activation_kind {
  REFNET_ACT_SPLINE = 0,
  REFNET_ACT_IDENTITY = 1,
  REFNET_ACT_TABULATED = 2
} refnet_activation_kind;

REFNET_API refnet_status refnet_activation_spline(int degree, refnet_activation** out);
REFNET_API refnet_status refnet_activation_identity(refnet_activation** out);
/* levels <= 0 selects the default cascade depth (12). */
REFNET_API refnet_status refnet_activation_tabulated(const double* mask, size_t mask_len,
                                                     int levels, refnet_activation** out);
/* "spline:<d>", "identity" or "mask:<file>[@<levels>]". */
REFNET_API refnet_status refnet_activation_parse(const char* spec, refnet_activation** out);
REFNET_API void refnet_activation_destroy(refnet_activation* act);

REFNET_API refnet_activation_kind refnet_activation_get_kind(const refnet_activation* act);
REFNET_API int refnet_activation_degree(const refnet_activation* act);
/* NUL-terminated description such as "spline:2"; `needed` includes the NUL. */
REFNET_API refnet_status refnet_activation_describe(const refnet_activation* act, char* buf,
                                                    size_t cap, size_t* needed);
REFNET_API refnet_status refnet_activation_eval(const refnet_activation* act, double t,
                                                double* out);
REFNET_API refnet_status refnet_activation_eval_prime(const refnet_activation* act, double t,
                                                      double* out);

/* sigma(t) = sum_{l < split_count} coeffs[l] sigma(2t + shift - l).
 * identity_split selects A for the identity (<= 0: default of 2). */
REFNET_API refnet_status refnet_activation_refinability(const refnet_activation* act,
                                                        int identity_split, int* split_count,
                                                        double* shift, double* coeffs,
                                                        size_t cap);

/* sum_{l < copies_out} sigma(t + shift - l) = t on [-half_width, half_width].
 * half_width and delta are +infinity for the identity. */
REFNET_API refnet_status refnet_activation_identity_sum(const refnet_activation* act,
                                                        int copies, int* copies_out,
                                                        double* shift, double* half_width,
                                                        double* delta);

/* 1 unless the activation is tabulated and its basic limit function failed
 * the phi(t) = phi(d+1-t) check (tolerance 1e-9 on the table). */
REFNET_API int refnet_activation_phi_symmetric(const refnet_activation* act);

/* Tabulated activations only: the sampled sigma, value i at
 * origin + i * 2^-level. */
REFNET_API refnet_status refnet_activation_table(const refnet_activation* act, int* level,
                                                 double* origin, double* values, size_t cap,
                                                 size_t* count);

/* ---- datasets ---------------------------------------------------------- */

REFNET_API refnet_status refnet_dataset_load(const char* path, refnet_dataset** out);
REFNET_API refnet_status refnet_dataset_parse(const char* text, refnet_dataset** out);
/* inputs is count x input_dim row-major, targets count x target_dim. */
REFNET_API refnet_status refnet_dataset_create(const double* inputs, const double* targets,
                                               size_t count, size_t input_dim,
                                               size_t target_dim, refnet_dataset** out);
REFNET_API void refnet_dataset_destroy(refnet_dataset* data);
REFNET_API refnet_status refnet_dataset_shape(const refnet_dataset* data, size_t* count,
                                              size_t* input_dim, size_t* target_dim);
/* Copies the inputs, count x input_dim row-major. */
REFNET_API refnet_status refnet_dataset_inputs(const refnet_dataset* data, double* out,
                                               size_t cap, size_t* needed);

/* ---- networks ---------------------------------------------------------- */

/* output_act may be NULL, in which case every layer uses hidden_act. */
REFNET_API refnet_status refnet_network_init_random(const size_t* dims, size_t num_dims,
                                                    const refnet_activation* hidden_act,
                                                    const refnet_activation* output_act,
                                                    uint64_t seed, refnet_network** out);
REFNET_API refnet_status refnet_network_load(const char* path, refnet_network** out);
REFNET_API refnet_status refnet_network_parse(const char* text, refnet_network** out);
REFNET_API refnet_status refnet_network_save(const refnet_network* net, const char* path);
REFNET_API refnet_status refnet_network_serialize(const refnet_network* net, char* buf,
                                                  size_t cap, size_t* needed);
REFNET_API void refnet_network_destroy(refnet_network* net);

REFNET_API size_t refnet_network_layer_count(const refnet_network* net);
REFNET_API size_t refnet_network_input_dim(const refnet_network* net);
REFNET_API size_t refnet_network_output_dim(const refnet_network* net);
REFNET_API refnet_status refnet_network_layer_shape(const refnet_network* net, size_t layer,
                                                    size_t* rows, size_t* cols);
/* Returns a new handle the caller destroys. */
REFNET_API refnet_status refnet_network_layer_activation(const refnet_network* net,
                                                         size_t layer,
                                                         refnet_activation** out);
REFNET_API refnet_status refnet_network_forward(const refnet_network* net, const double* x,
                                                size_t x_len, double* y, size_t y_cap);
/* 1 when both networks have identical layers, activations and parameters. */
REFNET_API int refnet_network_equal(const refnet_network* a, const refnet_network* b);

/* ---- growth ------------------------------------------------------------ */

/* neurons == NULL (or count == 0) splits every neuron of the layer. */
REFNET_API refnet_status refnet_widen(const refnet_network* net, size_t layer,
                                      const size_t* neurons, size_t count,
                                      refnet_network** out);

typedef enum refnet_insert_variant {
  REFNET_INSERT_PRE = 0,
  REFNET_INSERT_POST = 1
} refnet_insert_variant;

typedef struct refnet_growth_report {
  double beta;
  double max_abs_deviation;
  size_t new_width;   /* width of the inserted layer */
  char omega_desc[512];
} refnet_growth_report;

REFNET_API refnet_status refnet_insert_layer(const refnet_network* net, size_t position,
                                             const refnet_activation* sigma0, int copies,
                                             refnet_insert_variant variant,
                                             const refnet_dataset* data,
                                             refnet_network** out,
                                             refnet_growth_report* report);

REFNET_API refnet_status refnet_check_domain(const refnet_network* net, size_t position,
                                             refnet_insert_variant variant, double beta,
                                             const refnet_activation* sigma0, int copies,
                                             const double* x, size_t x_len, int* inside);

/* ---- verification and training ----------------------------------------- */

/* count x dim points uniform in [-range, range], row-major. */
REFNET_API refnet_status refnet_random_inputs(uint64_t seed, size_t count, size_t dim,
                                              double range, double* out);
/* inputs is count x input_dim row-major. */
REFNET_API refnet_status refnet_output_deviation(const refnet_network* a,
                                                 const refnet_network* b,
                                                 const double* inputs, size_t count,
                                                 double* max_abs, double* mean_abs);

REFNET_API refnet_status refnet_mean_loss(const refnet_network* net,
                                          const refnet_dataset* data, double* out);
/* losses receives epochs + 1 values: before training and after each epoch.
 * It may be NULL. */
REFNET_API refnet_status refnet_train(const refnet_network* net, const refnet_dataset* data,
                                      size_t epochs, double learning_rate,
                                      refnet_network** out, double* losses);

#ifdef __cplusplus
}
#endif

#endif /* REFNET_REFNET_H_ */
