/* Exercises the C interface from C. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "dante/dante.h"

static int failures = 0;

#define EXPECT(cond)                                                    \
  do {                                                                  \
    if (!(cond)) {                                                      \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                       \
    }                                                                   \
  } while (0)

static void on_check(const char* name, int passed, const char* detail, double seconds, void* user) {
  (void)detail;
  (void)seconds;
  ++*(int*)user;
  printf("verify %s: %s\n", name, passed ? "pass" : "fail");
}

int main(void) {
  dante_config* cfg = NULL;
  dante_config* copy = NULL;
  dante_run* run = NULL;
  char buffer[64];
  size_t length = 0;
  size_t n = 0;
  double value = 0.0;
  double point[2];
  int seen = 0;
  int failed = -1;

  EXPECT(strlen(dante_version()) > 0);
  EXPECT(dante_config_key_count() > 10);
  {
    const char* name = NULL;
    const char* kind = NULL;
    EXPECT(dante_config_key_info(0, &name, &kind, NULL) == DANTE_OK);
    EXPECT(name != NULL && strcmp(name, "experiment") == 0);
    EXPECT(dante_config_key_info(100000, &name, &kind, NULL) == DANTE_ERR_ARGUMENT);
  }

  EXPECT(dante_config_create(&cfg) == DANTE_OK);
  EXPECT(dante_config_set(cfg, "experiment", "equilibrium") == DANTE_OK);
  EXPECT(dante_config_set(cfg, "n-outer", "50") == DANTE_OK);
  EXPECT(dante_config_set(cfg, "bogus", "1") == DANTE_ERR_CONFIG);
  EXPECT(strlen(dante_last_error()) > 0);
  EXPECT(dante_config_set(cfg, "alpha", "x") == DANTE_ERR_CONFIG);
  EXPECT(dante_config_set(NULL, "alpha", "1") == DANTE_ERR_ARGUMENT);

  EXPECT(dante_config_get(cfg, "n_outer", NULL, 0, &length) == DANTE_OK);
  EXPECT(length == 2);
  EXPECT(dante_config_get(cfg, "n_outer", buffer, 2, &length) == DANTE_ERR_ARGUMENT);
  EXPECT(dante_config_get(cfg, "n_outer", buffer, sizeof buffer, &length) == DANTE_OK);
  EXPECT(strcmp(buffer, "50") == 0);
  EXPECT(dante_config_get(cfg, "seed", buffer, sizeof buffer, &length) == DANTE_ERR_CONFIG);

  EXPECT(dante_config_clone(cfg, &copy) == DANTE_OK);
  EXPECT(dante_config_set(copy, "n_outer", "0") == DANTE_OK);
  EXPECT(dante_run_execute(copy, &run) == DANTE_ERR_CONFIG);
  EXPECT(run == NULL);
  EXPECT(dante_config_load_file(copy, "/nonexistent/file.cfg") == DANTE_ERR_CONFIG);

  /* A one-iteration cap with a tiny tolerance breaches in contraction mode. */
  EXPECT(dante_config_set(copy, "n_outer", "3") == DANTE_OK);
  EXPECT(dante_config_set(copy, "hard_cap", "1") == DANTE_OK);
  EXPECT(dante_config_set(copy, "eps_bar", "1e-12") == DANTE_OK);
  EXPECT(dante_run_execute(copy, &run) == DANTE_ERR_RUNTIME);
  dante_config_destroy(copy);

  EXPECT(dante_run_execute(cfg, &run) == DANTE_OK);
  EXPECT(dante_run_outer_iterations(run, &n) == DANTE_OK);
  EXPECT(n == 50);
  EXPECT(dante_run_summary_value(run, "total_inner_iterations", &value) == DANTE_OK);
  EXPECT(value >= 50.0);
  EXPECT(dante_run_summary_value(run, "missing", &value) == DANTE_ERR_ARGUMENT);
  EXPECT(dante_run_final_point(run, NULL, 0, &length) == DANTE_OK);
  EXPECT(length == 2);
  EXPECT(dante_run_final_point(run, point, 1, &length) == DANTE_ERR_ARGUMENT);
  EXPECT(dante_run_final_point(run, point, 2, &length) == DANTE_OK);
  EXPECT(isfinite(point[0]) && isfinite(point[1]));
  EXPECT(dante_run_write(run, "/proc/forbidden/dir") == DANTE_ERR_IO);
  dante_run_destroy(run);
  dante_config_destroy(cfg);

  EXPECT(dante_verify("parameter_quadratic,closed_forms", 0, 0.0, on_check, &seen, &failed) == DANTE_OK);
  EXPECT(seen == 2);
  EXPECT(failed == 0);
  EXPECT(dante_verify("no_such_check", 0, 0.0, NULL, NULL, &failed) == DANTE_ERR_CONFIG);
  EXPECT(dante_verify("energy_inequality", 1, -1e4, NULL, NULL, &failed) == DANTE_OK);
  EXPECT(failed == 1);

  if (failures) fprintf(stderr, "%d expectation(s) failed\n", failures);
  return failures ? EXIT_FAILURE : EXIT_SUCCESS;
}
