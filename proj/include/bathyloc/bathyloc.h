/* bathyloc C API: bathymetric terrain-aided localization filters and
 * benchmark harness behind opaque handles and status codes.
 *
 * Every function that can fail returns a bathyloc_status; on failure a
 * human-readable message is available from bathyloc_last_error() until the
 * next API call on the same thread. Handles are freed with their matching
 * *_free function. NULL is always safe to pass to a *_free function.
 */
#ifndef BATHYLOC_H
#define BATHYLOC_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define BATHYLOC_API __declspec(dllexport)
#else
#define BATHYLOC_API __attribute__((visibility("default")))
#endif

typedef enum bathyloc_status {
  BATHYLOC_OK = 0,
  BATHYLOC_ERROR_INVALID_ARGUMENT = 1,
  BATHYLOC_ERROR_PARSE = 2,      /* malformed grid/JSON text */
  BATHYLOC_ERROR_DIMENSION = 3,  /* cell counts disagree with the header */
  BATHYLOC_ERROR_VALUE = 4,      /* a value violates a domain constraint */
  BATHYLOC_ERROR_BOUNDS = 5,     /* query outside the usable map interior */
  BATHYLOC_ERROR_NODATA = 6,     /* query touches a land cell */
  BATHYLOC_ERROR_NUMERIC = 7,    /* factorization/inversion failure */
  BATHYLOC_ERROR_CONFIG = 8,     /* invalid run/benchmark configuration */
  BATHYLOC_ERROR_IO = 9,         /* file could not be read or written */
  BATHYLOC_ERROR_INTERNAL = 10
} bathyloc_status;

typedef struct bathyloc_grid bathyloc_grid;
typedef struct bathyloc_result bathyloc_result;

BATHYLOC_API const char* bathyloc_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
BATHYLOC_API const char* bathyloc_last_error(void);

/* ---- Bathymetry grids ---------------------------------------------------- */

/* Loads an ESRI ASCII grid (.asc). */
BATHYLOC_API bathyloc_status bathyloc_grid_load_file(const char* path, bathyloc_grid** out);
BATHYLOC_API bathyloc_status bathyloc_grid_load_text(const char* text, bathyloc_grid** out);

/* Generates a synthetic lake from a JSON spec:
 * {"profile": "bowl|tilted-plane|ridge|twin-basin", "ncols": N, "nrows": N,
 *  "max_height": H, "cell_size": S, "asymmetry": A, "noise_amplitude": NA,
 *  "seed": SEED}. Deterministic in the seed. */
BATHYLOC_API bathyloc_status bathyloc_grid_generate(const char* spec_json, bathyloc_grid** out);

BATHYLOC_API bathyloc_status bathyloc_grid_save_file(const bathyloc_grid* grid,
                                                     const char* path);
/* Caller frees with bathyloc_string_free. */
BATHYLOC_API bathyloc_status bathyloc_grid_to_text(const bathyloc_grid* grid, char** out_text);

typedef struct bathyloc_grid_info {
  int ncols;
  int nrows;
  double cell_size;
  double origin_x;
  double origin_y;
  double min_x; /* interpolable interior */
  double max_x;
  double min_y;
  double max_y;
  double min_height;
  double max_height;
} bathyloc_grid_info;

BATHYLOC_API bathyloc_status bathyloc_grid_get_info(const bathyloc_grid* grid,
                                                    bathyloc_grid_info* out);
BATHYLOC_API bathyloc_status bathyloc_grid_height_at(const bathyloc_grid* grid, double x,
                                                     double y, double* out_height);
BATHYLOC_API bathyloc_status bathyloc_grid_gradient_at(const bathyloc_grid* grid, double x,
                                                       double y, double* out_dx,
                                                       double* out_dy);
/* 1 if inside the usable interior, 0 otherwise (including on error). */
BATHYLOC_API int bathyloc_grid_in_bounds(const bathyloc_grid* grid, double x, double y);

BATHYLOC_API void bathyloc_grid_free(bathyloc_grid* grid);

/* ---- Runs and benchmarks ------------------------------------------------- */

/* Executes one simulated run per configured filter (shared ground truth).
 * config_json is the documented configuration schema; the "runs" field is
 * ignored here. The result carries a JSON report and a trajectory CSV. */
BATHYLOC_API bathyloc_status bathyloc_run(const char* config_json, bathyloc_result** out);

/* Monte Carlo benchmark over config "runs" replicates. workers <= 0 picks
 * the hardware concurrency. Results are independent of the worker count. */
BATHYLOC_API bathyloc_status bathyloc_bench(const char* config_json, int workers,
                                            bathyloc_result** out);

/* Borrowed pointers, valid until bathyloc_result_free. */
BATHYLOC_API const char* bathyloc_result_report_json(const bathyloc_result* result);
BATHYLOC_API const char* bathyloc_result_csv(const bathyloc_result* result);

BATHYLOC_API void bathyloc_result_free(bathyloc_result* result);
BATHYLOC_API void bathyloc_string_free(char* text);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BATHYLOC_H */
