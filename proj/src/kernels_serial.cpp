#include "rvarpro/kernels.hpp"

#include <cstddef>

#include "rvarpro/linalg.hpp"

namespace rvarpro::kernels::serial {

#define RVARPRO_PARALLEL_FOR
#include "kernels_body.inl"
#undef RVARPRO_PARALLEL_FOR

}  // namespace rvarpro::kernels::serial
