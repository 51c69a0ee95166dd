/* Compiled as C to keep the public header C-clean. */
#include <conefreq/conefreq.h>
#include <math.h>
#include <stdio.h>

int main(void) {
  double gamma = 0.0;
  double eig[3];
  cf_mesh* mesh = NULL;
  size_t nodes = 0;

  if (cf_gamma_from_eigenvalue(3, 6.0, &gamma) != CF_OK || gamma != 2.0) return 1;
  if (cf_cap_spectrum(1.5707963267948966, 3, 2000, eig) != CF_OK) return 2;
  if (fabs(eig[1] - 6.0) > 1e-3) return 3;
  if (cf_mesh_generate(1.5707963267948966, 0.1, 0.7, 1e-3, &mesh) != CF_OK) return 4;
  if (cf_mesh_counts(mesh, &nodes, NULL, NULL) != CF_OK || nodes == 0) return 5;
  cf_mesh_free(mesh);
  if (cf_mesh_generate(-1.0, 0.1, 0.7, 1e-3, &mesh) != CF_ERR_DOMAIN) return 6;
  printf("C API smoke: %s\n", cf_version());
  return 0;
}
