#ifndef QDEFORM_H
#define QDEFORM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QdModelKind {
  QD_MODEL_KIND_Q_OSC = 0,
  QD_MODEL_KIND_ANHARMONIC = 1,
} QdModelKind;

typedef enum QdStatus {
  QD_STATUS_OK = 0,
  QD_STATUS_NULL_POINTER = 1,
  QD_STATUS_DOMAIN = 2,
  QD_STATUS_CONVERGENCE = 3,
  QD_STATUS_DIMENSION = 4,
  QD_STATUS_INDEX = 5,
  QD_STATUS_TRUNCATION = 6,
  QD_STATUS_NON_DIAGONAL = 7,
  QD_STATUS_ZERO_ELEMENT = 8,
  QD_STATUS_UNWRAP = 9,
  QD_STATUS_PANIC = 10,
} QdStatus;

/**
 * A dense operator on a truncated Fock space.
 */
typedef struct QdOperator QdOperator;

/**
 * Expectation values on a time grid.
 */
typedef struct QdTimeSeries QdTimeSeries;

/**
 * A discrete probability distribution.
 */
typedef struct QdWeights QdWeights;

/**
 * Model parameters. `q`/`omega_q` are read for the q-oscillator,
 * `omega1`/`omega2` for the anharmonic model.
 */
typedef struct QdModel {
  enum QdModelKind kind;
  double q;
  double omega_q;
  double omega1;
  double omega2;
} QdModel;

typedef struct QdIsoMap {
  uint32_t n;
  double q;
  double omega_q;
  double p_n;
} QdIsoMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *qd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qd_version(void);

struct QdModel qd_model_qosc(double q, double omega_q);

struct QdModel qd_model_anharmonic(double omega1, double omega2);

/**
 * `[n]_q`; defined for every real `q`.
 */
double qd_q_number(uint32_t n, double q);

/**
 * `ln([n]_q!)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_q_factorial_ln(uint32_t n, double q, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_q_exponential(double x, double q, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_q_stirling2(uint32_t s, uint32_t m, double q, double *out);

double qd_stirling2(uint32_t r, uint32_t m);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_map_to_q(double omega1, double omega2, uint32_t n, struct QdIsoMap *out);

/**
 * Largest of the isomorphism residuals for `j <= j_max`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_isomorphism_residual(double omega1,
                                      double omega2,
                                      uint32_t n,
                                      uint32_t j_max,
                                      double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_relation_identity_residual(double x, double q, uint32_t m, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_scaling_phase_check(struct QdModel model,
                                     uint32_t n,
                                     uint32_t m,
                                     double tau,
                                     size_t j_col,
                                     size_t dim,
                                     double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_q_poisson_weights(double alpha_sq, double q, double tol, struct QdWeights **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_binomial_weights(uint32_t j, double p, struct QdWeights **out);

/**
 * # Safety
 * `w` must be a live handle or null.
 */
size_t qd_weights_len(const struct QdWeights *w);

/**
 * # Safety
 * `w` must be a live handle or null.
 */
double qd_weights_tail_bound(const struct QdWeights *w);

/**
 * # Safety
 * `w` must be a live handle; `out` valid for writes.
 */
enum QdStatus qd_weights_get(const struct QdWeights *w, size_t k, double *out);

/**
 * # Safety
 * `w` must be a handle from this library, not yet freed, or null.
 */
void qd_weights_free(struct QdWeights *w);

/**
 * `<alpha| Lambda^{n,m}(tau) |alpha>` for the q-oscillator at dimensionless times.
 *
 * # Safety
 * `times` must point to `len` doubles; `out` valid for writes.
 */
enum QdStatus qd_evolve_q(struct QdModel model,
                          double alpha_re,
                          double alpha_im,
                          uint32_t n,
                          uint32_t m,
                          const double *times,
                          size_t len,
                          double tol,
                          struct QdTimeSeries **out);

/**
 * Series form for the anharmonic model.
 *
 * # Safety
 * `times` must point to `len` doubles; `out` valid for writes.
 */
enum QdStatus qd_evolve_anharmonic(struct QdModel model,
                                   double alpha_re,
                                   double alpha_im,
                                   uint32_t n,
                                   uint32_t m,
                                   const double *times,
                                   size_t len,
                                   double tol,
                                   struct QdTimeSeries **out);

/**
 * Closed form for the anharmonic model.
 *
 * # Safety
 * `times` must point to `len` doubles; `out` valid for writes.
 */
enum QdStatus qd_evolve_anharmonic_closed(struct QdModel model,
                                          double alpha_re,
                                          double alpha_im,
                                          uint32_t n,
                                          uint32_t m,
                                          const double *times,
                                          size_t len,
                                          struct QdTimeSeries **out);

/**
 * # Safety
 * `ts` must be a live handle or null.
 */
size_t qd_time_series_len(const struct QdTimeSeries *ts);

/**
 * # Safety
 * `ts` must be a live handle or null.
 */
double qd_time_series_truncation_tail(const struct QdTimeSeries *ts);

/**
 * Time and value at index `i`.
 *
 * # Safety
 * `ts` must be a live handle; out pointers valid for writes.
 */
enum QdStatus qd_time_series_get(const struct QdTimeSeries *ts,
                                 size_t i,
                                 double *time,
                                 double *re,
                                 double *im);

/**
 * # Safety
 * `ts` must be a handle from this library, not yet freed, or null.
 */
void qd_time_series_free(struct QdTimeSeries *ts);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_operator_hamiltonian(struct QdModel model, size_t dim, struct QdOperator **out);

/**
 * `Lambda^{n,m} = (a^+)^n (a^+ a)^m` on `dim` levels.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QdStatus qd_operator_lambda(struct QdModel model,
                                 uint32_t n,
                                 uint32_t m,
                                 size_t dim,
                                 struct QdOperator **out);

/**
 * `[a, b]`.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` valid for writes.
 */
enum QdStatus qd_operator_commutator(const struct QdOperator *a,
                                     const struct QdOperator *b,
                                     struct QdOperator **out);

/**
 * `depth` nested commutators `[h, [h, ... [h, o]]]`.
 *
 * # Safety
 * `h`, `o` must be live handles; `out` valid for writes.
 */
enum QdStatus qd_operator_multicommutator(const struct QdOperator *h,
                                          const struct QdOperator *o,
                                          uint32_t depth,
                                          struct QdOperator **out);

/**
 * `e^{iHt} O e^{-iHt}` for a diagonal `h`, `t` in physical time.
 *
 * # Safety
 * `o`, `h` must be live handles; `out` valid for writes.
 */
enum QdStatus qd_operator_evolve(const struct QdOperator *o,
                                 const struct QdOperator *h,
                                 double t,
                                 struct QdOperator **out);

/**
 * # Safety
 * `op` must be a live handle or null.
 */
size_t qd_operator_dim(const struct QdOperator *op);

/**
 * Number of top columns affected by truncation.
 *
 * # Safety
 * `op` must be a live handle or null.
 */
size_t qd_operator_margin(const struct QdOperator *op);

/**
 * # Safety
 * `op` must be a live handle; out pointers valid for writes.
 */
enum QdStatus qd_operator_entry(const struct QdOperator *op,
                                size_t row,
                                size_t col,
                                double *re,
                                double *im);

/**
 * Normwise relative difference over interior columns, `reference` in the denominator.
 *
 * # Safety
 * Both must be live handles; `out` valid for writes.
 */
enum QdStatus qd_operator_interior_relative_error(const struct QdOperator *computed,
                                                  const struct QdOperator *reference,
                                                  double *out);

/**
 * # Safety
 * `op` must be a handle from this library, not yet freed, or null.
 */
void qd_operator_free(struct QdOperator *op);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDEFORM_H */
