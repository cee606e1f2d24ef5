/* Exercises the C interface from C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "shelab/shelab.h"

static int failures = 0;

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                    \
    }                                                                \
  } while (0)

#define OK(call) CHECK((call) == SHELAB_OK)

static const double kPi = 3.14159265358979323846;

static void kernels(void) {
  shelab_exponent* lap = NULL;
  OK(shelab_exponent_stable(2.0, 0.0, 0.5, 1, &lap));
  double re = 0.0, im = 0.0;
  OK(shelab_exponent_eval(lap, 2.0, &re, &im));
  CHECK(fabs(re - 2.0) < 1e-15 && im == 0.0);

  double values[1024];
  double mass = 0.0;
  OK(shelab_transition_density(lap, 1.0, 16.0, 1024, values, &mass));
  CHECK(fabs(mass - 1.0) < 1e-10);
  CHECK(fabs(values[512] - 1.0 / sqrt(2.0 * kPi)) < 1e-8);

  double p = 0.0;
  OK(shelab_density_at(lap, 1.0, 0.5, &p));
  CHECK(fabs(p - exp(-0.125) / sqrt(2.0 * kPi)) < 1e-8);

  shelab_exponent* bad = NULL;
  CHECK(shelab_exponent_stable(0.5, 0.0, 1.0, 1, &bad) == SHELAB_INVALID_ARGUMENT);
  CHECK(bad == NULL);
  CHECK(strlen(shelab_last_error()) > 0);
  CHECK(strcmp(shelab_status_name(SHELAB_DIVERGENT), "divergent") == 0);
  shelab_exponent_free(lap);
}

static void bounds(void) {
  shelab_exponent* lap = NULL;
  shelab_covariance* white = NULL;
  OK(shelab_exponent_stable(2.0, 0.0, 0.5, 1, &lap));
  OK(shelab_covariance_create(SHELAB_COV_WHITE, 0.0, 1.0, 1, &white));

  double tilde = 0.0;
  int status = -1;
  OK(shelab_upsilon_tilde(lap, white, 2.0, &tilde, &status));
  CHECK(status == SHELAB_FINITE);
  CHECK(fabs(tilde - kPi) < 1e-8);

  double z = 0.0;
  OK(shelab_hermite_largest_zero(3, &z));
  CHECK(fabs(z - sqrt(3.0)) < 1e-12);

  shelab_bound_params drift = {1.0, 0.0, 0.0, 0.0, 2, 1};
  shelab_critical_beta cb;
  OK(shelab_critical_beta_search(&drift, lap, white, 1e-6, 1e4, NULL, &cb));
  CHECK(fabs(cb.beta - 1.0) < 1e-6);
  CHECK(cb.evaluations > 0);

  shelab_covariance* riesz = NULL;
  CHECK(shelab_covariance_create(SHELAB_COV_RIESZ, 3.0, 1.0, 1, &riesz) == SHELAB_INVALID_ARGUMENT);
  shelab_covariance_free(white);
  shelab_exponent_free(lap);
}

static void simulation(void) {
  shelab_exponent* lap = NULL;
  shelab_covariance* white = NULL;
  shelab_measure* leb = NULL;
  shelab_config* cfg = NULL;
  OK(shelab_exponent_stable(2.0, 0.0, 0.5, 1, &lap));
  OK(shelab_covariance_create(SHELAB_COV_WHITE, 0.0, 1.0, 1, &white));
  OK(shelab_measure_lebesgue(&leb));
  OK(shelab_config_create(lap, white, leb, &cfg));
  shelab_exponent_free(lap);
  shelab_covariance_free(white);
  shelab_measure_free(leb);

  OK(shelab_config_set_grid(cfg, 4.0, 16));
  OK(shelab_config_set_time(cfg, 1.0, 1e-3));
  OK(shelab_config_set_drift(cfg, SHELAB_COEF_AFFINE, 0.0, 0.5, NULL, NULL, 0, 0.0));
  OK(shelab_config_validate(cfg));

  shelab_rng* rng = NULL;
  shelab_trajectory* tr = NULL;
  OK(shelab_rng_create(3, &rng));
  OK(shelab_solve_mild(cfg, rng, &tr));
  size_t K = shelab_trajectory_times(tr);
  CHECK(K >= 2);
  CHECK(shelab_trajectory_points(tr) == 16);
  double t = 0.0, field[16], ref[16];
  OK(shelab_trajectory_get(tr, K - 1, &t, field, ref));
  CHECK(t == 1.0);
  CHECK(fabs(field[3] - exp(0.5)) < 1e-3);
  CHECK(fabs(ref[3] - 1.0) < 1e-12);
  CHECK(shelab_trajectory_get(tr, K, &t, NULL, NULL) == SHELAB_INVALID_ARGUMENT);
  shelab_trajectory_free(tr);
  shelab_rng_free(rng);

  shelab_verdict v;
  shelab_curve* curve = NULL;
  OK(shelab_config_set_time(cfg, 4.0, 1e-3));
  OK(shelab_verify_moment_bound(cfg, 2, 2, 1e-2, NULL, &v, &curve));
  CHECK(v.holds == 1);
  CHECK(fabs(v.beta_star - 0.5) < 1e-6);
  CHECK(fabs(v.gamma_hat - 0.5) < 1e-3);
  CHECK(shelab_curve_size(curve) > 5);
  double w = 0.0;
  OK(shelab_weighted_norm(curve, 1.0, &w));
  CHECK(w > 0.0 && w <= 1.0);
  shelab_gamma g;
  OK(shelab_estimate_gamma_bar(curve, 1.0, -1.0, &g));
  CHECK(fabs(g.slope - v.gamma_hat) < 1e-15);
  shelab_curve_free(curve);

  OK(shelab_config_set_time(cfg, 1.0, 0.5));
  CHECK(shelab_config_validate(cfg) == SHELAB_INVALID_ARGUMENT);
  shelab_config_free(cfg);
}

int main(void) {
  shelab_set_log_level(4);
  kernels();
  bounds();
  simulation();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
