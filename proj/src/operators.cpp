#include "rvarpro/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rvarpro/errors.hpp"
#include "rvarpro/fft.hpp"
#include "rvarpro/kernels.hpp"

namespace rvarpro {

namespace {

constexpr std::size_t kSymbolCacheSize = 4;

void require_length(std::size_t got, std::size_t want, const char* where) {
    if (got != want) {
        throw ArgumentError(std::string(where) + ": expected length " + std::to_string(want) +
                            ", got " + std::to_string(got));
    }
}

double scalar_param(std::span<const double> y, const char* where) {
    if (y.size() != 1) throw ArgumentError(std::string(where) + ": expects a scalar parameter");
    return y[0];
}

void require_param_index(std::size_t j, std::size_t r) {
    if (j >= r) throw ArgumentError("parameter index out of range");
}

// x -> ifft2(symbol .* fft2(x)), optionally with the conjugate symbol.
Vec spectral_apply_2d(std::size_t n, std::span<const cplx> symbol, std::span<const double> x,
                      bool conjugate) {
    fft::CVec spec = fft::forward_2d(n, fft::to_complex(x));
    kernels::omp::spectral_scale(spec, symbol, conjugate);
    return fft::real_part_checked(fft::inverse_2d(n, spec));
}

}  // namespace

void OperatorFamily::check_domain(std::span<const double> y) const {
    if (y.size() != param_dim()) throw ArgumentError(name() + ": wrong parameter dimension");
    if (!all_finite(y)) throw DomainError(name() + ": non-finite parameter");
}

LinOp OperatorFamily::at(std::span<const double> y) const {
    Vec yy(y.begin(), y.end());
    return {rows(), cols(), [this, yy](std::span<const double> x) { return apply(yy, x); },
            [this, yy](std::span<const double> v) { return apply_transpose(yy, v); }};
}

// ---------------------------------------------------------------------------
// 1D
// ---------------------------------------------------------------------------

Vec gaussian_column_1d(double sigma, std::size_t n) {
    if (n == 0) throw ArgumentError("gaussian_column_1d: n must be >= 1");
    Vec a(n, 0.0);
    a[0] = 1.0;
    if (sigma == 0.0) return a;
    const double two_s2 = 2.0 * sigma * sigma;
    double g0 = 1.0;
    for (std::size_t j = 1; j < n; ++j) {
        const double jj = static_cast<double>(j);
        a[j] = std::exp(-jj * jj / two_s2);
        g0 += a[j];
    }
    scale(1.0 / g0, a);
    return a;
}

Vec gaussian_column_1d_derivative(double sigma, std::size_t n) {
    if (n == 0) throw ArgumentError("gaussian_column_1d_derivative: n must be >= 1");
    Vec out(n, 0.0);
    if (sigma == 0.0) return out;
    const double two_s2 = 2.0 * sigma * sigma;
    const double s3 = sigma * sigma * sigma;
    Vec a(n), da(n);
    a[0] = 1.0;
    da[0] = 0.0;
    double g0 = 1.0;
    double dg0 = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        const double jj = static_cast<double>(j);
        a[j] = std::exp(-jj * jj / two_s2);
        // a_j underflows before j^2 / sigma^3 overflows; 0 * inf must not leak.
        da[j] = a[j] == 0.0 ? 0.0 : (jj * jj / s3) * a[j];
        g0 += a[j];
        dg0 += da[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] = da[j] / g0 - a[j] * dg0 / (g0 * g0);
    return out;
}

Vec toeplitz_apply_1d(double sigma, std::span<const double> x) {
    const Vec col = gaussian_column_1d(sigma, x.size());
    Vec out(x.size());
    kernels::omp::symmetric_toeplitz_apply(col, x, out);
    return out;
}

GaussianToeplitz1D::GaussianToeplitz1D(std::size_t n) : n_(n) {
    if (n == 0) throw ArgumentError("GaussianToeplitz1D: n must be >= 1");
}

Vec GaussianToeplitz1D::apply(std::span<const double> y, std::span<const double> x) const {
    require_length(x.size(), n_, "GaussianToeplitz1D::apply");
    return toeplitz_apply_1d(scalar_param(y, "GaussianToeplitz1D"), x);
}

Vec GaussianToeplitz1D::apply_transpose(std::span<const double> y,
                                        std::span<const double> v) const {
    return apply(y, v);
}

Vec GaussianToeplitz1D::apply_dparam(std::span<const double> y, std::size_t j,
                                     std::span<const double> x) const {
    require_param_index(j, 1);
    require_length(x.size(), n_, "GaussianToeplitz1D::apply_dparam");
    const Vec dcol = gaussian_column_1d_derivative(scalar_param(y, "GaussianToeplitz1D"), n_);
    Vec out(n_);
    kernels::omp::symmetric_toeplitz_apply(dcol, x, out);
    return out;
}

Vec GaussianToeplitz1D::apply_dparam_transpose(std::span<const double> y, std::size_t j,
                                               std::span<const double> v) const {
    return apply_dparam(y, j, v);
}

DenseMat GaussianToeplitz1D::dense(double sigma) const {
    const Vec col = gaussian_column_1d(sigma, n_);
    DenseMat a(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) a(i, j) = col[i > j ? i - j : j - i];
    return a;
}

Vec dblur_dsigma(const GaussianToeplitz1D& family, double sigma, std::span<const double> x) {
    const double y[1] = {sigma};
    return family.apply_dparam(y, 0, x);
}

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

DenseMat gaussian_psf_2d(double y, std::size_t n) {
    if (!(y > 0.0)) throw ArgumentError("gaussian_psf_2d: width must be positive");
    if (n == 0) throw ArgumentError("gaussian_psf_2d: n must be >= 1");
    const double c = static_cast<double>(n / 2);
    const double two_y2 = 2.0 * y * y;
    DenseMat p(n, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double di = static_cast<double>(i) - c;
            const double dj = static_cast<double>(j) - c;
            p(i, j) = std::exp(-(di * di + dj * dj) / two_y2);
            total += p(i, j);
        }
    scale(1.0 / total, p.data());
    return p;
}

DenseMat gaussian_psf_2d_derivative(double y, std::size_t n) {
    // P = c(y) e_ij, de_ij/dy = (r^2 / y^3) e_ij, quotient rule through c(y):
    // dP_ij/dy = P_ij (r_ij^2 - <r^2>_P) / y^3.
    const DenseMat p = gaussian_psf_2d(y, n);
    const double c = static_cast<double>(n / 2);
    DenseMat r2(n, n);
    double mean_r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double di = static_cast<double>(i) - c;
            const double dj = static_cast<double>(j) - c;
            r2(i, j) = di * di + dj * dj;
            mean_r2 += p(i, j) * r2(i, j);
        }
    const double y3 = y * y * y;
    DenseMat dp(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            dp(i, j) = p(i, j) == 0.0 ? 0.0 : p(i, j) * (r2(i, j) - mean_r2) / y3;
        }
    return dp;
}

DenseMat reflect_psf(const DenseMat& psf) {
    const std::size_t n = psf.rows();
    if (psf.cols() != n) throw ArgumentError("reflect_psf: PSF must be square");
    const std::size_t c = n / 2;
    DenseMat r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = psf((2 * c + n - i) % n, (2 * c + n - j) % n);
    return r;
}

Vec psf_to_origin(const DenseMat& psf) {
    const std::size_t n = psf.rows();
    if (psf.cols() != n) throw ArgumentError("psf_to_origin: PSF must be square");
    const std::size_t c = n / 2;
    Vec s(n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) s[i + j * n] = psf((i + c) % n, (j + c) % n);
    return s;
}

std::vector<cplx> bccb_eigenvalues(const DenseMat& psf) {
    return fft::forward_2d(psf.rows(), fft::to_complex(psf_to_origin(psf)));
}

Vec bccb_apply(const DenseMat& psf, std::span<const double> x) {
    const std::size_t n = psf.rows();
    if (psf.cols() != n || x.size() != n * n) {
        throw ArgumentError("bccb_apply: PSF and image must both be n x n");
    }
    const auto eig = bccb_eigenvalues(psf);
    return spectral_apply_2d(n, eig, x, false);
}

Vec bccb_apply_transpose(const DenseMat& psf, std::span<const double> x) {
    const std::size_t n = psf.rows();
    if (psf.cols() != n || x.size() != n * n) {
        throw ArgumentError("bccb_apply_transpose: PSF and image must both be n x n");
    }
    const auto eig = bccb_eigenvalues(psf);
    return spectral_apply_2d(n, eig, x, true);
}

GaussianBccb2D::GaussianBccb2D(std::size_t n) : n_(n) {
    if (n == 0) throw ArgumentError("GaussianBccb2D: n must be >= 1");
}

void GaussianBccb2D::check_domain(std::span<const double> y) const {
    OperatorFamily::check_domain(y);
    if (!(y[0] > 0.0)) throw DomainError("gaussian-bccb-2d: width must be positive");
}

std::shared_ptr<const DftSymbols> GaussianBccb2D::symbols_at(double y) const {
    {
        std::lock_guard lock(cache_mutex_);
        for (const auto& e : cache_)
            if (e.y == y) return e.symbols;
    }
    auto sym = std::make_shared<DftSymbols>();
    sym->geometry = {n_, 2};
    sym->eigenvalues = bccb_eigenvalues(gaussian_psf_2d(y, n_));
    sym->derivative_eigenvalues.push_back(
        fft::forward_2d(n_, fft::to_complex(psf_to_origin(gaussian_psf_2d_derivative(y, n_)))));

    std::lock_guard lock(cache_mutex_);
    cache_.insert(cache_.begin(), Entry{y, sym});
    if (cache_.size() > kSymbolCacheSize) cache_.pop_back();
    return sym;
}

std::optional<DftSymbols> GaussianBccb2D::dft_symbols(std::span<const double> y) const {
    return *symbols_at(scalar_param(y, "GaussianBccb2D"));
}

Vec GaussianBccb2D::apply(std::span<const double> y, std::span<const double> x) const {
    require_length(x.size(), n_ * n_, "GaussianBccb2D::apply");
    const auto sym = symbols_at(scalar_param(y, "GaussianBccb2D"));
    return spectral_apply_2d(n_, sym->eigenvalues, x, false);
}

Vec GaussianBccb2D::apply_transpose(std::span<const double> y, std::span<const double> v) const {
    require_length(v.size(), n_ * n_, "GaussianBccb2D::apply_transpose");
    const auto sym = symbols_at(scalar_param(y, "GaussianBccb2D"));
    return spectral_apply_2d(n_, sym->eigenvalues, v, true);
}

Vec GaussianBccb2D::apply_dparam(std::span<const double> y, std::size_t j,
                                 std::span<const double> x) const {
    require_param_index(j, 1);
    require_length(x.size(), n_ * n_, "GaussianBccb2D::apply_dparam");
    const auto sym = symbols_at(scalar_param(y, "GaussianBccb2D"));
    return spectral_apply_2d(n_, sym->derivative_eigenvalues[j], x, false);
}

Vec GaussianBccb2D::apply_dparam_transpose(std::span<const double> y, std::size_t j,
                                           std::span<const double> v) const {
    require_param_index(j, 1);
    require_length(v.size(), n_ * n_, "GaussianBccb2D::apply_dparam_transpose");
    const auto sym = symbols_at(scalar_param(y, "GaussianBccb2D"));
    return spectral_apply_2d(n_, sym->derivative_eigenvalues[j], v, true);
}

Vec dblur_dsigma(const GaussianBccb2D& family, double y, std::span<const double> x) {
    const double yy[1] = {y};
    return family.apply_dparam(yy, 0, x);
}

Vec laplacian_apply(std::span<const double> x, std::size_t n) {
    require_length(x.size(), n * n, "laplacian_apply");
    Vec out(n * n);
    kernels::omp::periodic_laplacian_apply(n, x, out);
    return out;
}

// ---------------------------------------------------------------------------
// RegOperator
// ---------------------------------------------------------------------------

RegOperator RegOperator::identity(std::size_t size) { return {Kind::identity, size, 0}; }

RegOperator RegOperator::laplacian_2d(std::size_t n) {
    if (n < 3) throw ArgumentError("RegOperator::laplacian_2d: n must be >= 3");
    return {Kind::laplacian5, n * n, n};
}

std::string RegOperator::name() const {
    return kind_ == Kind::identity ? "identity" : "laplacian";
}

Vec RegOperator::apply(std::span<const double> x) const {
    require_length(x.size(), size_, "RegOperator::apply");
    if (kind_ == Kind::identity) return {x.begin(), x.end()};
    return laplacian_apply(x, side_);
}

Vec RegOperator::apply_transpose(std::span<const double> x) const { return apply(x); }

DenseMat RegOperator::dense() const {
    return DenseMat::from_columns(size_, size_, [this](std::span<const double> e) { return apply(e); });
}

std::optional<std::vector<cplx>> RegOperator::dft_symbols(const DftGeometry& geometry) const {
    if (geometry.size() != size_) return std::nullopt;
    if (kind_ == Kind::identity) return std::vector<cplx>(size_, cplx(1.0, 0.0));
    if (geometry.dims != 2 || geometry.n != side_) return std::nullopt;
    const std::size_t n = side_;
    std::vector<cplx> sym(n * n);
    const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t k2 = 0; k2 < n; ++k2)
        for (std::size_t k1 = 0; k1 < n; ++k1) {
            sym[k1 + k2 * n] = -4.0 + 2.0 * std::cos(w * static_cast<double>(k1)) +
                               2.0 * std::cos(w * static_cast<double>(k2));
        }
    return sym;
}

}  // namespace rvarpro
