// Shared kernel bodies. Included by kernels_serial.cpp and kernels_omp.cpp
// with RVARPRO_PARALLEL_FOR expanding to nothing or to an OpenMP pragma.
// Loop indices are signed for OpenMP 2.x compatibility.

void symmetric_toeplitz_apply(std::span<const double> column, std::span<const double> x,
                              std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    RVARPRO_PARALLEL_FOR
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            s += column[static_cast<std::size_t>(i > j ? i - j : j - i)] * x[j];
        }
        out[i] = s;
    }
}

void periodic_laplacian_apply(std::size_t n, std::span<const double> image, std::span<double> out) {
    const auto nn = static_cast<std::ptrdiff_t>(n);
    RVARPRO_PARALLEL_FOR
    for (std::ptrdiff_t j = 0; j < nn; ++j) {
        const std::ptrdiff_t jl = (j == 0) ? nn - 1 : j - 1;
        const std::ptrdiff_t jr = (j == nn - 1) ? 0 : j + 1;
        for (std::ptrdiff_t i = 0; i < nn; ++i) {
            const std::ptrdiff_t iu = (i == 0) ? nn - 1 : i - 1;
            const std::ptrdiff_t id = (i == nn - 1) ? 0 : i + 1;
            out[i + j * nn] = image[iu + j * nn] + image[id + j * nn] + image[i + jl * nn] +
                              image[i + jr * nn] - 4.0 * image[i + j * nn];
        }
    }
}

void spectral_scale(std::span<cplx> spectrum, std::span<const cplx> symbol, bool conjugate) {
    const auto n = static_cast<std::ptrdiff_t>(spectrum.size());
    if (conjugate) {
        RVARPRO_PARALLEL_FOR
        for (std::ptrdiff_t k = 0; k < n; ++k) spectrum[k] *= std::conj(symbol[k]);
    } else {
        RVARPRO_PARALLEL_FOR
        for (std::ptrdiff_t k = 0; k < n; ++k) spectrum[k] *= symbol[k];
    }
}

void spectral_divide(std::span<cplx> spectrum, std::span<const double> denominator) {
    const auto n = static_cast<std::ptrdiff_t>(spectrum.size());
    RVARPRO_PARALLEL_FOR
    for (std::ptrdiff_t k = 0; k < n; ++k) spectrum[k] /= denominator[k];
}

void tikhonov_denominator(std::span<const cplx> mu, std::span<const cplx> ell, double lambda,
                          std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(mu.size());
    const double lam2 = lambda * lambda;
    RVARPRO_PARALLEL_FOR
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = std::norm(mu[k]) + lam2 * std::norm(ell[k]);
}

void matvec(const DenseMat& a, std::span<const double> x, std::span<double> out) {
    const auto m = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t n = a.cols();
    RVARPRO_PARALLEL_FOR
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        const auto row = a.row(static_cast<std::size_t>(i));
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
        out[i] = s;
    }
}

void matvec_transpose(const DenseMat& a, std::span<const double> x, std::span<double> out) {
    const std::size_t m = a.rows();
    const auto n = static_cast<std::ptrdiff_t>(a.cols());
    RVARPRO_PARALLEL_FOR
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += a(i, static_cast<std::size_t>(j)) * x[i];
        out[j] = s;
    }
}

void gram(const DenseMat& a, DenseMat& out) {
    const std::size_t m = a.rows();
    const auto n = static_cast<std::ptrdiff_t>(a.cols());
    RVARPRO_PARALLEL_FOR
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                s += a(k, static_cast<std::size_t>(i)) * a(k, static_cast<std::size_t>(j));
            }
            out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = s;
            out(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = s;
        }
    }
}

void circular_convolve_2d(std::size_t n, std::span<const double> kernel,
                          std::span<const double> image, std::span<double> out) {
    const auto nn = static_cast<std::ptrdiff_t>(n);
    RVARPRO_PARALLEL_FOR
    for (std::ptrdiff_t j = 0; j < nn; ++j) {
        for (std::ptrdiff_t i = 0; i < nn; ++i) {
            double s = 0.0;
            for (std::ptrdiff_t q = 0; q < nn; ++q) {
                const std::ptrdiff_t kj = ((j - q) % nn + nn) % nn;
                for (std::ptrdiff_t p = 0; p < nn; ++p) {
                    const std::ptrdiff_t ki = ((i - p) % nn + nn) % nn;
                    s += kernel[ki + kj * nn] * image[p + q * nn];
                }
            }
            out[i + j * nn] = s;
        }
    }
}
