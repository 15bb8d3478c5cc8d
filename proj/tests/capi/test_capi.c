/* Exercises the C interface from plain C: handles, status codes, reports. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "smoothlab/smoothlab.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static sl_model* load(const char* name) {
  char path[1024];
  sl_model* m = NULL;
  snprintf(path, sizeof path, "%s/%s", SMOOTHLAB_MODELS_DIR, name);
  EXPECT(sl_model_load(path, &m) == SL_OK);
  return m;
}

int main(void) {
  sl_model* m = NULL;
  sl_pool* p = NULL;
  sl_pool* q = NULL;
  char* js = NULL;
  char* csv = NULL;
  char* kill = NULL;
  double k1 = 0.0, a0 = 0.0, alpha = 0.0;
  int found = -1;
  const double s_grid[] = {-1.0, 0.0, 1.0};

  EXPECT(strlen(sl_version()) > 0);

  /* errors */
  EXPECT(sl_model_load("/nonexistent.json", &m) == SL_ERR_IO);
  EXPECT(m == NULL);
  EXPECT(strstr(sl_last_error(), "model file not found") != NULL);
  EXPECT(sl_model_parse("{\"dim\": 2}", &m) == SL_ERR_INVALID_MODEL);
  EXPECT(sl_model_load(NULL, &m) == SL_ERR_INVALID_ARGUMENT);
  EXPECT(strcmp(sl_status_name(SL_ERR_BUDGET_EXCEEDED), "BudgetExceeded") == 0);

  /* Example 1 */
  m = load("ex1.json");
  EXPECT(sl_model_dim(m) == 2);
  EXPECT(fabs(sl_model_expected_n(m) - 2.0) < 1e-15);
  EXPECT(sl_kappa_one(m, &k1) == SL_OK);
  EXPECT(fabs(k1 - 0.5) < 1e-12);
  EXPECT(sl_critical_exponent(m, &a0, &found) == SL_OK);
  EXPECT(found == 0);

  EXPECT(sl_simulate(m, 2000, 10, 7, &p) == SL_OK);
  EXPECT(sl_pool_size(p) == 2000);
  EXPECT(sl_pool_dim(p) == 2);
  EXPECT(sl_pool_data(p)[0] > 0.0);
  EXPECT(sl_simulate(m, 2000, 10, 7, &q) == SL_OK);
  EXPECT(memcmp(sl_pool_data(p), sl_pool_data(q), 4000 * sizeof(double)) == 0);
  sl_pool_free(q);
  q = NULL;
  EXPECT(sl_simulate(m, 0, 10, 7, &q) == SL_ERR_INVALID_ARGUMENT);

  EXPECT(sl_support_report(m, 3, p, &js) == SL_OK);
  EXPECT(strstr(js, "lambda_directions") != NULL);
  EXPECT(strstr(js, "inside_fraction") != NULL);
  sl_string_free(js);

  sl_set_budget(3);
  EXPECT(sl_support_report(m, 3, NULL, &js) == SL_ERR_BUDGET_EXCEEDED);
  sl_set_budget(0);

  EXPECT(sl_check_report(m, &js, &csv) == SL_OK);
  EXPECT(strstr(csv, "condition") != NULL);
  sl_string_free(js);
  sl_string_free(csv);
  sl_pool_free(p);
  p = NULL;
  sl_model_free(m);

  /* Example 3 */
  m = load("ex3.json");
  EXPECT(sl_critical_exponent(m, &a0, &found) == SL_OK);
  EXPECT(found == 1);
  EXPECT(fabs(a0 - 0.9457899479870234) < 1e-6);
  EXPECT(sl_simulate_norm_law(m, 5000, 10, 3, &p, &alpha) == SL_OK);
  EXPECT(sl_pool_dim(p) == 1);
  EXPECT(fabs(alpha - 0.5778236514244254) < 1e-6);
  EXPECT(sl_diagnose_report(m, p, 1, &js, &csv, &kill) == SL_OK);
  EXPECT(strstr(js, "harmonic_table") != NULL);
  sl_string_free(js);
  sl_string_free(csv);
  sl_string_free(kill);
  EXPECT(sl_spectrum_report(m, s_grid, 3, 1, 0, &js, &csv) == SL_OK);
  EXPECT(strncmp(csv, "s,kappa,stderr,m,kappa_tilde", 28) == 0);
  sl_string_free(js);
  sl_string_free(csv);
  sl_pool_free(p);
  sl_model_free(m);

  sl_string_free(NULL);
  sl_pool_free(NULL);
  sl_model_free(NULL);

  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  puts("capi: ok");
  return 0;
}
