#ifndef GRSC_H
#define GRSC_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  GRSC_LENGTH_WORD = 0,
  GRSC_LENGTH_FREE_PRODUCT = 1,
} GrscLength;

/**
 * Pipeline outcome, numerically equal to the CLI exit code.
 */
typedef enum {
  GRSC_RUN_STATUS_VERIFIED = 0,
  GRSC_RUN_STATUS_FAILED = 1,
  GRSC_RUN_STATUS_EXHAUSTED = 2,
} GrscRunStatus;

typedef enum {
  GRSC_STATUS_OK = 0,
  GRSC_STATUS_NULL_ARGUMENT = 1,
  GRSC_STATUS_INVALID_UTF8 = 2,
  GRSC_STATUS_PARSE = 3,
  GRSC_STATUS_INVALID_INPUT = 4,
  GRSC_STATUS_NOT_REDUCED = 5,
  GRSC_STATUS_ACTION_NOT_FACTORING = 6,
  GRSC_STATUS_RESOURCE = 7,
  GRSC_STATUS_IO = 8,
  GRSC_STATUS_INTERNAL = 9,
  GRSC_STATUS_PANIC = 10,
} GrscStatus;

typedef struct GrscCoefficients GrscCoefficients;

typedef struct GrscGraph GrscGraph;

typedef struct GrscRun GrscRun;

typedef struct GrscVerdict GrscVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library.
 */
const char *grsc_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void grsc_string_free(char *s);

/**
 * Parses a graph in the `.grsc` text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
GrscStatus grsc_graph_parse(const char *text, GrscGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from this library, freed at most once.
 */
void grsc_graph_free(GrscGraph *g);

/**
 * # Safety
 * `g` must be a live graph handle.
 */
uintptr_t grsc_graph_num_vertices(const GrscGraph *g);

/**
 * # Safety
 * `g` must be a live graph handle.
 */
uintptr_t grsc_graph_num_edges(const GrscGraph *g);

/**
 * `.grsc` text of the graph, or null if `g` is null.
 *
 * # Safety
 * `g` must be a live graph handle.
 */
char *grsc_graph_to_text(const GrscGraph *g);

/**
 * Graphviz rendering of the graph, or null if `g` is null.
 *
 * # Safety
 * `g` must be a live graph handle.
 */
char *grsc_graph_to_dot(const GrscGraph *g);

/**
 * Checks `Gr'(num/den)` for the chosen length function.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
GrscStatus grsc_check_metric(const GrscGraph *g,
                             uint64_t num,
                             uint64_t den,
                             GrscLength length,
                             GrscVerdict **out);

/**
 * Checks `Gr(p)`, failing with `GRSC_STATUS_RESOURCE` past `cycle_cap`
 * simple cycles.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
GrscStatus grsc_check_gr_p(const GrscGraph *g, uintptr_t p, uintptr_t cycle_cap, GrscVerdict **out);

/**
 * # Safety
 * `v` must be a live verdict handle.
 */
bool grsc_verdict_satisfied(const GrscVerdict *v);

/**
 * # Safety
 * `v` must be a live verdict handle.
 */
uintptr_t grsc_verdict_num_violations(const GrscVerdict *v);

/**
 * Text report of the verdict against the graph it was computed on.
 *
 * # Safety
 * `v` and `g` must be live handles.
 */
char *grsc_verdict_report(const GrscVerdict *v, const GrscGraph *g);

/**
 * # Safety
 * `v` must be null or a handle from this library, freed at most once.
 */
void grsc_verdict_free(GrscVerdict *v);

/**
 * Transformed graph for a finite-index coset action given as text
 * (`degree h` followed by one `perm` line per generator).
 *
 * # Safety
 * `g` must be a live graph handle, `action` a NUL-terminated string and
 * `out` writable.
 */
GrscStatus grsc_comerford(const GrscGraph *g, const char *action, GrscGraph **out);

/**
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
GrscStatus grsc_coefficients_parse(const char *text, GrscCoefficients **out);

/**
 * # Safety
 * `cs` must be null or a handle from this library, freed at most once.
 */
void grsc_coefficients_free(GrscCoefficients *cs);

/**
 * Graph built from a coefficient system.
 *
 * # Safety
 * `cs` must be a live handle; `out` must be writable.
 */
GrscStatus grsc_build_graph(const GrscCoefficients *cs, GrscGraph **out);

/**
 * Runs the full pipeline for subgroups of index up to `k`. With `cs`
 * null the coefficient system is searched for with `seed` and `budget`.
 *
 * # Safety
 * `cs` must be null or a live handle; `out` must be writable.
 */
GrscStatus grsc_pipeline_run(uintptr_t k,
                             uint64_t seed,
                             uint64_t budget,
                             const GrscCoefficients *cs,
                             bool continue_on_failure,
                             GrscRun **out);

/**
 * # Safety
 * `run` must be a live run handle.
 */
GrscRunStatus grsc_run_status(const GrscRun *run);

/**
 * # Safety
 * `run` must be a live run handle.
 */
char *grsc_run_report(const GrscRun *run);

/**
 * Writes every artifact of the run below `dir`.
 *
 * # Safety
 * `run` must be a live handle and `dir` a NUL-terminated path.
 */
GrscStatus grsc_run_write(const GrscRun *run, const char *dir);

/**
 * # Safety
 * `run` must be null or a handle from this library, freed at most once.
 */
void grsc_run_free(GrscRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRSC_H */
