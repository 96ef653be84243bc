#ifndef FOTEX_H
#define FOTEX_H

/* Generated by cbindgen from the fotex-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by every fallible call.
 */
typedef enum {
  FOTEX_STATUS_OK = 0,
  FOTEX_STATUS_NULL_ARGUMENT = 1,
  FOTEX_STATUS_INVALID_ARGUMENT = 2,
  FOTEX_STATUS_NOT_CANDIDATE = 3,
  FOTEX_STATUS_SOLVER_FAILURE = 4,
  FOTEX_STATUS_TOLERANCE_NOT_REACHED = 5,
  FOTEX_STATUS_INTERNAL_ERROR = 6,
} FotexStatus;

/**
 * Material-symmetry restriction for the extremal programs.
 */
typedef enum {
  FOTEX_SYMMETRY_TRICLINIC = 0,
  FOTEX_SYMMETRY_ORTHOTROPIC = 1,
} FotexSymmetry;

/**
 * Opaque completely symmetric fourth-order tensor.
 */
typedef struct FotexTensor FotexTensor;

/**
 * Outcome of a candidate-set membership test.
 */
typedef struct {
  /**
   * Worst violation of the Kelvin-Mandel redundancy relations.
   */
  double symmetry_residual;
  /**
   * Matrix eigenvalues, descending.
   */
  double km_eigenvalues[6];
  /**
   * Smallest eigenvalue before clamping.
   */
  double min_eigenvalue;
  /**
   * Double trace.
   */
  double trace;
  /**
   * 1 when the tensor is a realizable orientation tensor.
   */
  int32_t is_candidate;
} FotexCandidateReport;

/**
 * Atomic decomposition with at most 15 weighted unit directions.
 */
typedef struct {
  double weights[15];
  /**
   * Unit directions, one (x, y, z) triple per atom.
   */
  double directions[15][3];
  uintptr_t atom_count;
  /**
   * Frobenius distance between the reconstruction and the input.
   */
  double residual;
} FotexRealization;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *fotex_last_error(void);

/**
 * Library version as a static string.
 */
const char *fotex_version(void);

/**
 * Builds a tensor from its 15 independent coefficients in the canonical
 * multi-index order (1111, 1112, 1113, 1122, 1123, 1133, 1222, 1223, 1233,
 * 1333, 2222, 2223, 2233, 2333, 3333). Returns null on a null argument.
 *
 * # Safety
 * `coefficients` must point to 15 readable doubles.
 */
FotexTensor *fotex_tensor_from_coefficients(const double *coefficients);

/**
 * Builds a tensor from a row-major 6x6 Kelvin-Mandel matrix. The matrix
 * must be symmetric and satisfy the complete-symmetry redundancies within
 * `tol`.
 *
 * # Safety
 * `matrix` must point to 36 readable doubles; `out` to a writable pointer.
 */
FotexStatus fotex_tensor_from_km(const double *matrix, double tol, FotexTensor **out);

/**
 * The isotropic orientation tensor.
 */
FotexTensor *fotex_tensor_isotropic(void);

/**
 * Deterministic random extreme candidate (maximizer of a seeded random
 * linear objective over the candidate set).
 *
 * # Safety
 * `out` must be a writable pointer.
 */
FotexStatus fotex_tensor_sample_extreme(uint64_t seed, FotexTensor **out);

/**
 * Releases a tensor handle. Null is ignored.
 *
 * # Safety
 * `tensor` must be a pointer previously returned by this library and not
 * yet freed.
 */
void fotex_tensor_free(FotexTensor *tensor);

/**
 * Copies the 15 coefficients out of a handle.
 *
 * # Safety
 * `tensor` must be a live handle; `out` must point to 15 writable doubles.
 */
FotexStatus fotex_tensor_coefficients(const FotexTensor *tensor, double *out);

/**
 * Copies the row-major Kelvin-Mandel matrix out of a handle.
 *
 * # Safety
 * `tensor` must be a live handle; `out` must point to 36 writable doubles.
 */
FotexStatus fotex_tensor_km(const FotexTensor *tensor, double *out);

/**
 * Evaluates the quartic form of the tensor at a vector.
 *
 * # Safety
 * `tensor` must be a live handle; `q` must point to 3 readable doubles and
 * `out` to a writable double.
 */
FotexStatus fotex_quartic_eval(const FotexTensor *tensor, const double *q, double *out);

/**
 * Candidate-set membership test.
 *
 * # Safety
 * `tensor` must be a live handle; `out` must be writable.
 */
FotexStatus fotex_check_candidate(const FotexTensor *tensor, double tol, FotexCandidateReport *out);

/**
 * Maximal quartic projection onto the direction given by spherical angles
 * (degrees) over candidates with the prescribed second-order eigenvalues.
 * `maximizer` may be null when only the value is wanted.
 *
 * # Safety
 * `value` must be writable; `maximizer`, when non-null, receives a new
 * handle owned by the caller.
 */
FotexStatus fotex_extremize(double lambda1,
                            double lambda2,
                            double phi_deg,
                            double theta_deg,
                            FotexSymmetry symmetry,
                            double *value,
                            FotexTensor **maximizer);

/**
 * Decomposes a candidate tensor into at most 15 weighted unit fibers.
 * `grid_size` of 0 selects the default dictionary; `tol` of 0 the default
 * target residual.
 *
 * # Safety
 * `tensor` must be a live handle; `out` must be writable.
 */
FotexStatus fotex_realize(const FotexTensor *tensor,
                          uintptr_t grid_size,
                          double tol,
                          FotexRealization *out);

/**
 * Sum-of-squares decision for the quartic form of `tensor`. On a feasible
 * outcome `*feasible` is 1 and `gram` (when non-null) receives the PSD
 * Gram matrix; otherwise `*feasible` is 0 and `witness` (when non-null)
 * receives a separating candidate tensor with `A :: B < 0`.
 *
 * # Safety
 * `tensor` must be a live handle; `feasible` must be writable; `gram`,
 * when non-null, must point to 36 writable doubles.
 */
FotexStatus fotex_sos_certificate(const FotexTensor *tensor,
                                  double tol,
                                  int32_t *feasible,
                                  double *gram,
                                  FotexTensor **witness);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOTEX_H */
