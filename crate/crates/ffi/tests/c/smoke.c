#include <math.h>
#include <stdio.h>
#include <string.h>

#include "csdim.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  CsdimDistribution *g = csdim_dist_gaussian();
  double m = 0.0;
  CHECK(csdim_mmse(g, 3.0, &m) == CSDIM_STATUS_OK);
  CHECK(fabs(m - 0.25) < 1e-10);

  CsdimReplica r;
  CHECK(csdim_replica(g, 0.5, 0.1, &r) == CSDIM_STATUS_OK);
  CsdimDistortion d;
  CHECK(csdim_gaussian_curves(0.5, 0.1, &d) == CSDIM_STATUS_OK);
  CHECK(fabs(r.dl_mse - d.d_l) < 1e-8);
  csdim_dist_free(g);

  CsdimDistribution *s = NULL;
  CHECK(csdim_dist_sparse_gaussian(2.0, &s) == CSDIM_STATUS_INVALID_ARGUMENT);
  CHECK(s == NULL);
  size_t n = csdim_last_error_message(NULL, 0);
  char buf[256];
  CHECK(n > 0 && csdim_last_error_message(buf, sizeof buf) == n);
  CHECK(strstr(buf, "gamma") != NULL);

  CsdimThreshold t;
  CHECK(csdim_threshold(CSDIM_FAMILY_SIMPLE, 0.5, &t) == CSDIM_STATUS_OK);
  CHECK(t.rate == 0.75);
  CHECK(csdim_mmse(NULL, 1.0, &m) == CSDIM_STATUS_NULL_POINTER);
  printf("ok %s\n", csdim_version());
  return 0;
}
