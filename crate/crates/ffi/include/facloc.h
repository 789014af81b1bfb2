#ifndef FACLOC_H
#define FACLOC_H

/* Generated by cbindgen from facloc-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum FlcStatus {
  FLC_STATUS_OK = 0,
  FLC_STATUS_NULL_ARGUMENT = 1,
  FLC_STATUS_INVALID_JSON = 2,
  FLC_STATUS_INVALID_INSTANCE = 3,
  FLC_STATUS_INFEASIBLE = 4,
  FLC_STATUS_SIZE_GUARD = 5,
  FLC_STATUS_INTERNAL = 6,
} FlcStatus;

/**
 * Opaque instance handle.
 */
typedef struct FlcInstance FlcInstance;

/**
 * Opaque result handle: the solution plus certificate and, for simulator
 * runs, the transcript.
 */
typedef struct FlcSolution FlcSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread, or NULL when the previous call
 * succeeded. The pointer stays valid until the next failing call.
 */
const char *flc_last_error_message(void);

/**
 * Parses an instance from its JSON document.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum FlcStatus flc_instance_from_json(const char *json, struct FlcInstance **out);

/**
 * # Safety
 * `inst` must come from `flc_instance_from_json` and not be freed twice.
 */
void flc_instance_free(struct FlcInstance *inst);

/**
 * Facility count of the instance; 0 on a null handle.
 *
 * # Safety
 * `inst` must be a live instance handle or null.
 */
uintptr_t flc_instance_facilities(const struct FlcInstance *inst);

/**
 * # Safety
 * `inst` must be a live instance handle or null.
 */
uintptr_t flc_instance_clients(const struct FlcInstance *inst);

/**
 * Runs the sequential solver for the instance's variant and returns a
 * solution handle carrying the dual certificate.
 *
 * # Safety
 * `inst` must be a live instance handle and `out` a valid pointer.
 */
enum FlcStatus flc_solve(const struct FlcInstance *inst, double eps, struct FlcSolution **out);

/**
 * Runs the k-machine simulator (random vertex partition, exact distance
 * backend) and returns the solution with its transcript.
 *
 * # Safety
 * `inst` must be a live instance handle and `out` a valid pointer.
 */
enum FlcStatus flc_simulate(const struct FlcInstance *inst,
                            uintptr_t k,
                            uint64_t bandwidth_words,
                            double eps,
                            double cohen_c,
                            uint64_t seed,
                            struct FlcSolution **out);

/**
 * Exact optimum by enumeration (robust or penalty variant, |F| <= 20).
 *
 * # Safety
 * `inst` must be a live instance handle and `out_cost` a valid pointer.
 */
enum FlcStatus flc_oracle_cost(const struct FlcInstance *inst, double *out_cost);

/**
 * # Safety
 * `sol` must be a live solution handle or null.
 */
double flc_solution_cost(const struct FlcSolution *sol);

/**
 * # Safety
 * `sol` must be a live solution handle or null.
 */
uintptr_t flc_solution_open_count(const struct FlcSolution *sol);

/**
 * Serializes the solution (open set, served set, outliers, assignment,
 * cost) as JSON.
 *
 * # Safety
 * `sol` must be a live solution handle and `out` a valid pointer.
 */
enum FlcStatus flc_solution_to_json(const struct FlcSolution *sol, char **out);

/**
 * Dual certificate (construction inputs and feasibility report) as JSON.
 *
 * # Safety
 * `sol` must be a live solution handle and `out` a valid pointer.
 */
enum FlcStatus flc_solution_certificate_json(const struct FlcSolution *sol, char **out);

/**
 * Round/bandwidth transcript as JSON; fails on sequential solutions.
 *
 * # Safety
 * `sol` must be a live solution handle and `out` a valid pointer.
 */
enum FlcStatus flc_solution_transcript_json(const struct FlcSolution *sol, char **out);

/**
 * # Safety
 * `sol` must come from a solve/simulate call and not be freed twice.
 */
void flc_solution_free(struct FlcSolution *sol);

/**
 * # Safety
 * `s` must be a string returned by this library and not yet freed.
 */
void flc_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FACLOC_H */
