#ifndef SMOOTHLAB_H
#define SMOOTHLAB_H

/* C interface to the smoothing-transform lab. Handles are opaque; every call
 * that can fail returns an sl_status and leaves a message in sl_last_error()
 * (thread local). Strings handed out by the library are freed with
 * sl_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef SMOOTHLAB_BUILDING
#    define SL_API __declspec(dllexport)
#  else
#    define SL_API __declspec(dllimport)
#  endif
#else
#  define SL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct sl_model sl_model;
typedef struct sl_pool sl_pool;

typedef enum sl_status {
  SL_OK = 0,
  SL_ERR_INVALID_ARGUMENT = 1,
  SL_ERR_INVALID_MODEL = 2,
  SL_ERR_IO = 3,
  SL_ERR_NOT_PRIMITIVE = 4,
  SL_ERR_ZERO_COLUMN = 5,
  SL_ERR_SINGULAR_DIRECTION = 6,
  SL_ERR_NO_SINGLETON_BRANCH = 7,
  SL_ERR_FK_VIOLATED = 8,
  SL_ERR_NO_CONVERGENCE = 9,
  SL_ERR_NOT_FOUND = 10,
  SL_ERR_BUDGET_EXCEEDED = 11,
  SL_ERR_OUT_OF_RANGE = 12,
  SL_ERR_NEGATIVE_INPUT = 13,
  SL_ERR_INSUFFICIENT_DECAY = 14,
  SL_ERR_EMPTY_TAIL = 15,
  SL_ERR_SUPERCRITICAL_BLOWUP = 16,
  SL_ERR_MOMENT_RANGE_EXCEEDED = 17,
  SL_ERR_NOT_SCALAR_REDUCIBLE = 18,
  SL_ERR_INTERNAL = 99
} sl_status;

SL_API const char* sl_version(void);
SL_API const char* sl_status_name(sl_status status);
/* Message of the last failed call on this thread; "" if none. */
SL_API const char* sl_last_error(void);
SL_API void sl_string_free(char* s);

/* 0 = all cores. */
SL_API void sl_set_threads(unsigned threads);
/* Element / atom / node budget for enumerations; 0 restores the defaults. */
SL_API void sl_set_budget(uint64_t budget);

/* models */
SL_API sl_status sl_model_load(const char* path, sl_model** out);
SL_API sl_status sl_model_parse(const char* json, sl_model** out);
SL_API void sl_model_free(sl_model* model);
SL_API size_t sl_model_dim(const sl_model* model);
SL_API double sl_model_expected_n(const sl_model* model);
SL_API sl_status sl_model_to_json(const sl_model* model, char** out);

/* pools: K samples in R^dim, row major */
SL_API sl_status sl_simulate(const sl_model* model, size_t k, unsigned rounds, uint64_t seed, sl_pool** out);
/* <u, Z> for the alpha-fixed point of a scalar-reducible model (dim 1 pool). */
SL_API sl_status sl_simulate_norm_law(const sl_model* model, size_t k, unsigned rounds, uint64_t seed,
                                      sl_pool** out, double* alpha);
SL_API sl_status sl_pool_load_csv(const char* path, sl_pool** out);
SL_API sl_status sl_pool_save_csv(const sl_pool* pool, const char* path);
SL_API sl_status sl_pool_from_array(const double* values, size_t k, size_t dim, sl_pool** out);
SL_API void sl_pool_free(sl_pool* pool);
SL_API size_t sl_pool_size(const sl_pool* pool);
SL_API size_t sl_pool_dim(const sl_pool* pool);
SL_API const double* sl_pool_data(const sl_pool* pool);

/* scalar quantities */
SL_API sl_status sl_kappa_one(const sl_model* model, double* out);
SL_API sl_status sl_critical_exponent(const sl_model* model, double* out, int* found);

/* Reports. JSON documents (and CSV tables where noted) are returned as
 * library-owned strings; free them with sl_string_free. */

/* CSV columns s,kappa,stderr,m,kappa_tilde; JSON {gamma, gamma_stderr, alpha, a0, ...}.
 * require_alpha != 0 turns a missing alpha into SL_ERR_NOT_FOUND. */
SL_API sl_status sl_spectrum_report(const sl_model* model, const double* s_grid, size_t n_s, uint64_t seed,
                                    int require_alpha, char** json_out, char** csv_out);

/* pool may be NULL (then no inside_fraction / gaps). */
SL_API sl_status sl_support_report(const sl_model* model, unsigned max_length, const sl_pool* pool,
                                   char** json_out);

SL_API sl_status sl_diagnose_report(const sl_model* model, const sl_pool* pool, uint64_t seed, char** json_out,
                                    char** curve_csv, char** kill_csv);

/* Conditions 1, 2, 3, 5, 7, 9 as JSON plus a printable verdict table. */
SL_API sl_status sl_check_report(const sl_model* model, char** json_out, char** table_out);

#ifdef __cplusplus
}
#endif

#endif /* SMOOTHLAB_H */
