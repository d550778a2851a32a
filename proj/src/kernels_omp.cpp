#include "rvarpro/kernels.hpp"

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rvarpro/linalg.hpp"

namespace rvarpro::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace omp {

#define RVARPRO_PARALLEL_FOR _Pragma("omp parallel for schedule(static)")
#include "kernels_body.inl"
#undef RVARPRO_PARALLEL_FOR

}  // namespace omp
}  // namespace rvarpro::kernels
