#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rvarpro/linalg.hpp"
#include "rvarpro/operators.hpp"

namespace rvarpro {

// First column (a_0(sigma), ..., a_{n-1}(sigma)) of a circulant blur, before
// normalization by G_0 = sum_j a_j. Convention a_0 = 1.
struct SpectralKernel {
    std::size_t n = 0;
    std::function<Vec(double)> a;
    std::function<Vec(double)> da;
    // Declares a_j(sigma) = a_j(-sigma).
    bool even = false;
    std::string name;
};

// a_j = g(min(j, n-j)) with g(t) = exp(-t^2 / (2 sigma^2)); a = e_1 at sigma = 0.
SpectralKernel gaussian_kernel_sampled(std::size_t n);
// Periodized Gaussian a_j = sum_p g(j + p n) / sum_p g(p n).
SpectralKernel gaussian_kernel_wrapped(std::size_t n);

struct FourierSymbols {
    std::vector<cplx> G;   // G_k = sum_j a_j e^{-i 2 pi k j / n}
    std::vector<cplx> mu;  // G_k / G_0
};

struct FourierSymbolDerivatives {
    FourierSymbols symbols;
    std::vector<cplx> dG;
    std::vector<cplx> dmu;  // (G_k' G_0 - G_k G_0') / G_0^2
};

// Throws ModelError when G_0 = 0.
FourierSymbols fourier_symbols(const SpectralKernel& kernel, double sigma);
FourierSymbolDerivatives fourier_symbol_derivatives(const SpectralKernel& kernel, double sigma);

// Unitary DFT fft(b) / sqrt(n).
std::vector<cplx> unitary_dft(std::span<const double> b);

// sum_k lambda^2 / (2 (|mu_k|^2 + lambda^2)) |bt_k|^2
double phi_spectral(const SpectralKernel& kernel, double sigma, double lambda,
                    std::span<const cplx> bt);
// -sum_{k>=1} lambda^2 Re(conj(mu_k) mu_k') / (|mu_k|^2 + lambda^2)^2 |bt_k|^2
double dphi_spectral(const SpectralKernel& kernel, double sigma, double lambda,
                     std::span<const cplx> bt);

// Closed forms for n = 2, where A(sigma) = (1/(1+a1)) [[1, a1], [a1, 1]] and
// beta = U^T b with U = [[1, 1], [1, -1]] / sqrt(2).
namespace two_by_two {
double a1(double sigma);
double da1(double sigma);
double mu1(double sigma);
double dmu1(double sigma);
std::pair<double, double> beta(std::span<const double> b);
double phi(double sigma, double lambda, double beta1, double beta2);
double dphi(double sigma, double lambda, double beta2);
// U (Sigma^2 + lambda^2 I)^{-1} Sigma U^T b
Vec x(double sigma, double lambda, std::span<const double> b);
}  // namespace two_by_two

// Circulant blur built from a SpectralKernel: column a / G_0. Applies use the
// direct O(n^2) sums; dft_symbols exposes the Fourier route.
class CirculantFamily1D final : public OperatorFamily {
public:
    explicit CirculantFamily1D(SpectralKernel kernel);

    std::size_t param_dim() const override { return 1; }
    std::size_t rows() const override { return kernel_.n; }
    std::size_t cols() const override { return kernel_.n; }
    std::string name() const override { return "circulant-1d:" + kernel_.name; }

    Vec apply(std::span<const double> y, std::span<const double> x) const override;
    Vec apply_transpose(std::span<const double> y, std::span<const double> v) const override;
    Vec apply_dparam(std::span<const double> y, std::size_t j,
                     std::span<const double> x) const override;
    Vec apply_dparam_transpose(std::span<const double> y, std::size_t j,
                               std::span<const double> v) const override;
    std::optional<DftSymbols> dft_symbols(std::span<const double> y) const override;

    const SpectralKernel& kernel() const noexcept { return kernel_; }
    // Normalized column a / G_0 and its sigma-derivative.
    Vec column(double sigma) const;
    Vec column_derivative(double sigma) const;

private:
    SpectralKernel kernel_;
};

struct NoBlurReport {
    // (i) ||A(sigma_min) - I||_max <= 1e-8
    bool limit_identity = false;
    double limit_error = 0.0;
    // (ii) a_j and mu_k even in sigma to 1e-12
    bool evenness = false;
    double evenness_error = 0.0;
    // (iii) Re(conj(mu_k) mu_k') < 0 for k >= 1 on the grid; entries whose
    // magnitude is below the round-off bound are counted as indeterminate.
    bool modal_sign = false;
    std::size_t sign_checked = 0;
    std::size_t sign_failures = 0;
    std::size_t sign_indeterminate = 0;
    double first_failure_sigma = 0.0;
    // Whether b has energy at some k >= 1 (true when no b was supplied).
    bool high_frequency_energy = true;
    // All conditions hold and b has high-frequency energy.
    bool sigma_zero_unique_minimizer = false;
    std::vector<std::string> failures;

    bool all_conditions() const { return limit_identity && evenness && modal_sign; }
};

NoBlurReport check_noblur_conditions(const SpectralKernel& kernel, std::span<const double> sigma_grid,
                                     std::optional<std::span<const double>> b = std::nullopt);

}  // namespace rvarpro
