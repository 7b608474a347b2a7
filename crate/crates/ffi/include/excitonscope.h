#ifndef EXCITONSCOPE_H
#define EXCITONSCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum EsStatus {
  ES_STATUS_OK = 0,
  ES_STATUS_NULL_POINTER = 1,
  ES_STATUS_INVALID_ARGUMENT = 2,
  ES_STATUS_NUMERICAL = 3,
  ES_STATUS_IO = 4,
  ES_STATUS_BUFFER_TOO_SMALL = 5,
  ES_STATUS_PANIC = 6,
} EsStatus;

/**
 * Exciton model built from an aggregate and a bath.
 */
typedef struct EsModel EsModel;

/**
 * Population distribution over the two-exciton manifold.
 */
typedef struct EsPopulation EsPopulation;

/**
 * Spectral and temporal widths (cm⁻¹) of the two detector gates.
 */
typedef struct EsDetectors {
  double fe_sigma_t;
  double fe_sigma_omega;
  double eg_sigma_t;
  double eg_sigma_omega;
} EsDetectors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *es_version(void);

/**
 * Length in bytes of the calling thread's last error message, without the
 * terminating NUL; 0 when the last call succeeded.
 */
size_t es_last_error_length(void);

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * fit) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `capacity` writable bytes.
 */
size_t es_last_error_message(char *buf, size_t capacity);

/**
 * Builds the model for the bundled 14-site aggregate and bath.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum EsStatus es_model_new_bundled(struct EsModel **out);

/**
 * Builds a model from aggregate JSON and optional bath JSON (null selects
 * the bundled bath).
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be valid.
 */
enum EsStatus es_model_from_json(const char *aggregate_json,
                                 const char *bath_json,
                                 struct EsModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library, freed once.
 */
void es_model_free(struct EsModel *model);

/**
 * Number of one-exciton states; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t es_model_n_one(const struct EsModel *model);

/**
 * Number of two-exciton states; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t es_model_n_two(const struct EsModel *model);

/**
 * Copies the ascending one- (`manifold` 1) or two-exciton (`manifold` 2)
 * energies, cm⁻¹.
 *
 * # Safety
 * `out` must point to `capacity` writable doubles.
 */
enum EsStatus es_model_energies(const struct EsModel *model,
                                uint32_t manifold,
                                double *out,
                                size_t capacity);

/**
 * Two-exciton population prepared by an entangled pair with the pump at
 * omega1 + omega2, evaluated immediately after the pulse with x polarization.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid handle slot.
 */
enum EsStatus es_prepare_entangled(const struct EsModel *model,
                                   double omega1,
                                   double omega2,
                                   double tau0,
                                   double t1,
                                   double t2,
                                   struct EsPopulation **out);

/**
 * All population in two-exciton state `state` (numbered from 0).
 *
 * # Safety
 * `model` must be a live handle and `out` a valid handle slot.
 */
enum EsStatus es_population_single(const struct EsModel *model,
                                   size_t state,
                                   struct EsPopulation **out);

/**
 * Evolves a population by `t_fs` under two-exciton transport.
 *
 * # Safety
 * Handles must be live and `out` a valid handle slot.
 */
enum EsStatus es_propagate(const struct EsModel *model,
                           const struct EsPopulation *population,
                           double t_fs,
                           struct EsPopulation **out);

/**
 * Number of states in a population; 0 for a null handle.
 *
 * # Safety
 * `population` must be null or a live handle.
 */
size_t es_population_len(const struct EsPopulation *population);

/**
 * # Safety
 * `out` must point to `capacity` writable doubles.
 */
enum EsStatus es_population_values(const struct EsPopulation *population,
                                   double *out,
                                   size_t capacity);

/**
 * # Safety
 * `population` must be null or a handle from this library, freed once.
 */
void es_population_free(struct EsPopulation *population);

/**
 * Max-normalized coincidence signal on the grid `fe_axis` × `eg_axis`,
 * written fe-major: `out[i * n_eg + j]`.
 *
 * # Safety
 * Axis pointers must hold the given counts; `out` must hold
 * `capacity >= n_fe * n_eg` doubles.
 */
enum EsStatus es_coincidence_snapshot(const struct EsModel *model,
                                      const struct EsPopulation *population,
                                      struct EsDetectors detectors,
                                      const double *fe_axis,
                                      size_t n_fe,
                                      const double *eg_axis,
                                      size_t n_eg,
                                      double tw1,
                                      double tw2,
                                      double *out,
                                      size_t capacity);

/**
 * Loads a run configuration and executes its scenario, writing artifacts
 * as CSV (`json` = 0) or JSON (`json` != 0).
 *
 * # Safety
 * `config_path` must be a NUL-terminated path.
 */
enum EsStatus es_run_config(const char *config_path, int32_t json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXCITONSCOPE_H */
