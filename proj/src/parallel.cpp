#include "idpr/parallel.hpp"

#include <omp.h>

namespace idpr {

namespace {
int g_default_threads = 0;
}

void set_max_jobs(int jobs) {
  if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(jobs > 0 ? jobs : g_default_threads);
}

int max_jobs() { return omp_get_max_threads(); }

}  // namespace idpr
