#pragma once

// Complex DFTs backed by FFTW. Forward transforms use e^{-i 2 pi k j / n} and
// are unnormalized; inverse transforms include the 1/n (1D) or 1/n^2 (2D)
// factor. 2D arrays are n x n, column-major (pixel (i,j) at i + j*n).
// All functions are safe to call concurrently.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "rvarpro/linalg.hpp"

namespace rvarpro::fft {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

CVec forward_1d(std::span<const cplx> in);
CVec inverse_1d(std::span<const cplx> in);
CVec forward_2d(std::size_t n, std::span<const cplx> in);
CVec inverse_2d(std::size_t n, std::span<const cplx> in);

CVec to_complex(std::span<const double> in);

// Real part of `in`; throws NumericError when some |imag| exceeds
// rel_tol * max(1, max |real|).
Vec real_part_checked(std::span<const cplx> in, double rel_tol = 1e-10);

}  // namespace rvarpro::fft
