#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference and an
// OpenMP version with identical per-element arithmetic, so the two agree
// bit-for-bit. Library code calls the omp:: versions; the serial ones are kept
// for tests and the benchmark.

#include <complex>
#include <cstddef>
#include <span>

namespace rvarpro {
class DenseMat;
}

namespace rvarpro::kernels {

using cplx = std::complex<double>;

#define RVARPRO_KERNEL_DECLS                                                                    \
    /* out_i = sum_j column[|i-j|] x_j */                                                       \
    void symmetric_toeplitz_apply(std::span<const double> column, std::span<const double> x,  \
                                  std::span<double> out);                                      \
    /* Five-point Laplacian, periodic boundary, column-major n x n image. */                   \
    void periodic_laplacian_apply(std::size_t n, std::span<const double> image,                \
                                  std::span<double> out);                                      \
    /* spectrum_k *= symbol_k (or conj(symbol_k)). */                                          \
    void spectral_scale(std::span<cplx> spectrum, std::span<const cplx> symbol, bool conjugate); \
    /* spectrum_k /= denominator_k */                                                          \
    void spectral_divide(std::span<cplx> spectrum, std::span<const double> denominator);       \
    /* |mu_k|^2 + lambda^2 |ell_k|^2 */                                                        \
    void tikhonov_denominator(std::span<const cplx> mu, std::span<const cplx> ell,             \
                              double lambda, std::span<double> out);                           \
    void matvec(const DenseMat& a, std::span<const double> x, std::span<double> out);          \
    void matvec_transpose(const DenseMat& a, std::span<const double> x, std::span<double> out);\
    /* out = A^T A (cols x cols), out must be pre-sized. */                                    \
    void gram(const DenseMat& a, DenseMat& out);                                               \
    /* Direct circular 2D convolution; `kernel` has its centre at index (0,0). O(n^4). */      \
    void circular_convolve_2d(std::size_t n, std::span<const double> kernel,                   \
                              std::span<const double> image, std::span<double> out);

namespace serial {
RVARPRO_KERNEL_DECLS
}  // namespace serial

namespace omp {
RVARPRO_KERNEL_DECLS
}  // namespace omp

#undef RVARPRO_KERNEL_DECLS

// Number of OpenMP threads the omp:: kernels will use (1 without OpenMP).
int max_threads();

}  // namespace rvarpro::kernels
