#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rvarpro/linalg.hpp"

namespace rvarpro {

using cplx = std::complex<double>;

// Shape of a DFT basis: a length-n signal (dims = 1) or an n x n
// column-major image (dims = 2).
struct DftGeometry {
    std::size_t n = 0;
    int dims = 1;

    std::size_t size() const noexcept { return dims == 1 ? n : n * n; }
    bool operator==(const DftGeometry&) const = default;
};

// Eigenvalues of A(y) and of each dA/dy_j, ordered like the unnormalized
// forward DFT of `geometry`.
struct DftSymbols {
    DftGeometry geometry;
    std::vector<cplx> eigenvalues;
    std::vector<std::vector<cplx>> derivative_eigenvalues;
};

// Differentiable map y -> A(y) exposed through its actions.
class OperatorFamily {
public:
    virtual ~OperatorFamily() = default;

    virtual std::size_t param_dim() const = 0;
    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual std::string name() const = 0;

    virtual Vec apply(std::span<const double> y, std::span<const double> x) const = 0;
    virtual Vec apply_transpose(std::span<const double> y, std::span<const double> v) const = 0;
    // (dA/dy_j) x
    virtual Vec apply_dparam(std::span<const double> y, std::size_t j,
                             std::span<const double> x) const = 0;
    // (dA/dy_j)^T v
    virtual Vec apply_dparam_transpose(std::span<const double> y, std::size_t j,
                                       std::span<const double> v) const = 0;

    // True when the family is only defined for y_j > 0.
    virtual bool requires_positive_parameters() const { return false; }
    // Throws DomainError when y is outside the family's domain.
    virtual void check_domain(std::span<const double> y) const;

    // Present when A(y) is diagonalized by the DFT.
    virtual std::optional<DftSymbols> dft_symbols(std::span<const double> /*y*/) const {
        return std::nullopt;
    }

    LinOp at(std::span<const double> y) const;
};

// ---------------------------------------------------------------------------
// 1D Gaussian blur, zero boundary conditions (symmetric Toeplitz).
// ---------------------------------------------------------------------------

// First column a_j(sigma)/G0(sigma), a_j = exp(-j^2/(2 sigma^2)); e_1 at sigma = 0.
Vec gaussian_column_1d(double sigma, std::size_t n);
// d/dsigma of gaussian_column_1d; zero at sigma = 0.
Vec gaussian_column_1d_derivative(double sigma, std::size_t n);
Vec toeplitz_apply_1d(double sigma, std::span<const double> x);

class GaussianToeplitz1D final : public OperatorFamily {
public:
    explicit GaussianToeplitz1D(std::size_t n);

    std::size_t param_dim() const override { return 1; }
    std::size_t rows() const override { return n_; }
    std::size_t cols() const override { return n_; }
    std::string name() const override { return "gaussian-toeplitz-1d"; }

    Vec apply(std::span<const double> y, std::span<const double> x) const override;
    Vec apply_transpose(std::span<const double> y, std::span<const double> v) const override;
    Vec apply_dparam(std::span<const double> y, std::size_t j,
                     std::span<const double> x) const override;
    Vec apply_dparam_transpose(std::span<const double> y, std::size_t j,
                               std::span<const double> v) const override;

    // Explicit n x n matrix A(sigma).
    DenseMat dense(double sigma) const;

private:
    std::size_t n_;
};

// ---------------------------------------------------------------------------
// 2D isotropic Gaussian blur, periodic boundary conditions (BCCB).
// ---------------------------------------------------------------------------

// n x n PSF, centre (floor(n/2), floor(n/2)), entries summing to one.
// Throws ArgumentError for y <= 0.
DenseMat gaussian_psf_2d(double y, std::size_t n);
DenseMat gaussian_psf_2d_derivative(double y, std::size_t n);
// PSF mirrored through its centre pixel (periodically).
DenseMat reflect_psf(const DenseMat& psf);
// Eigenvalues of the BCCB matrix generated by a centred PSF.
std::vector<cplx> bccb_eigenvalues(const DenseMat& psf);
// Circular convolution of a column-major n x n image with a centred PSF.
Vec bccb_apply(const DenseMat& psf, std::span<const double> x);
Vec bccb_apply_transpose(const DenseMat& psf, std::span<const double> x);
// Column-major copy of the PSF with its centre moved to index (0,0).
Vec psf_to_origin(const DenseMat& psf);

class GaussianBccb2D final : public OperatorFamily {
public:
    explicit GaussianBccb2D(std::size_t n);

    std::size_t param_dim() const override { return 1; }
    std::size_t rows() const override { return n_ * n_; }
    std::size_t cols() const override { return n_ * n_; }
    std::string name() const override { return "gaussian-bccb-2d"; }
    std::size_t side() const noexcept { return n_; }

    Vec apply(std::span<const double> y, std::span<const double> x) const override;
    Vec apply_transpose(std::span<const double> y, std::span<const double> v) const override;
    Vec apply_dparam(std::span<const double> y, std::size_t j,
                     std::span<const double> x) const override;
    Vec apply_dparam_transpose(std::span<const double> y, std::size_t j,
                               std::span<const double> v) const override;

    bool requires_positive_parameters() const override { return true; }
    void check_domain(std::span<const double> y) const override;
    std::optional<DftSymbols> dft_symbols(std::span<const double> y) const override;

private:
    struct Entry {
        double y;
        std::shared_ptr<const DftSymbols> symbols;
    };
    std::shared_ptr<const DftSymbols> symbols_at(double y) const;

    std::size_t n_;
    mutable std::mutex cache_mutex_;
    mutable std::vector<Entry> cache_;
};

Vec dblur_dsigma(const GaussianToeplitz1D& family, double sigma, std::span<const double> x);
Vec dblur_dsigma(const GaussianBccb2D& family, double y, std::span<const double> x);

// Periodic five-point Laplacian of a column-major n x n image.
Vec laplacian_apply(std::span<const double> x, std::size_t n);

// ---------------------------------------------------------------------------
// Regularization operator L.
// ---------------------------------------------------------------------------

class RegOperator {
public:
    enum class Kind { identity, laplacian5 };

    static RegOperator identity(std::size_t size);
    static RegOperator laplacian_2d(std::size_t n);

    Kind kind() const noexcept { return kind_; }
    std::size_t rows() const noexcept { return size_; }
    std::size_t cols() const noexcept { return size_; }
    std::string name() const;

    Vec apply(std::span<const double> x) const;
    Vec apply_transpose(std::span<const double> x) const;
    DenseMat dense() const;

    // Eigenvalues in the DFT basis of `geometry`, when L is diagonalized by it.
    std::optional<std::vector<cplx>> dft_symbols(const DftGeometry& geometry) const;

private:
    RegOperator(Kind kind, std::size_t size, std::size_t side)
        : kind_(kind), size_(size), side_(side) {}

    Kind kind_;
    std::size_t size_;
    std::size_t side_;
};

}  // namespace rvarpro
