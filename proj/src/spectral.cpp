#include "rvarpro/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rvarpro/errors.hpp"
#include "rvarpro/fft.hpp"

namespace rvarpro {

namespace {

double gauss(double t, double sigma) { return std::exp(-t * t / (2.0 * sigma * sigma)); }

// d/dsigma exp(-t^2/(2 sigma^2)) = (t^2 / sigma^3) g; 0 * inf guarded.
double dgauss(double t, double sigma) {
    const double g = gauss(t, sigma);
    return g == 0.0 ? 0.0 : (t * t / (sigma * sigma * sigma)) * g;
}

Vec checked_kernel(const SpectralKernel& k, const std::function<Vec(double)>& f, double sigma,
                   const char* what) {
    if (!f) throw ArgumentError(std::string("spectral kernel: missing ") + what);
    Vec v = f(sigma);
    if (v.size() != k.n) throw ArgumentError(std::string("spectral kernel: ") + what + " has wrong length");
    return v;
}

}  // namespace

SpectralKernel gaussian_kernel_sampled(std::size_t n) {
    if (n == 0) throw ArgumentError("gaussian_kernel_sampled: n must be >= 1");
    SpectralKernel k;
    k.n = n;
    k.even = true;
    k.name = "gaussian-sampled";
    k.a = [n](double sigma) {
        Vec a(n, 0.0);
        a[0] = 1.0;
        if (sigma == 0.0) return a;
        for (std::size_t j = 1; j < n; ++j) a[j] = gauss(static_cast<double>(std::min(j, n - j)), sigma);
        return a;
    };
    k.da = [n](double sigma) {
        Vec d(n, 0.0);
        if (sigma == 0.0) return d;
        for (std::size_t j = 1; j < n; ++j) d[j] = dgauss(static_cast<double>(std::min(j, n - j)), sigma);
        return d;
    };
    return k;
}

SpectralKernel gaussian_kernel_wrapped(std::size_t n) {
    if (n == 0) throw ArgumentError("gaussian_kernel_wrapped: n must be >= 1");
    struct Sums {
        Vec s, ds;
    };
    // s_j = sum_p g(j + p n), ds_j its sigma-derivative.
    auto sums = [n](double sigma) {
        Sums out{Vec(n, 0.0), Vec(n, 0.0)};
        const double s = std::abs(sigma);
        const auto reach = static_cast<long>(std::ceil(40.0 * s / static_cast<double>(n))) + 1;
        for (std::size_t j = 0; j < n; ++j)
            for (long p = -reach; p <= reach; ++p) {
                const double t = static_cast<double>(j) + static_cast<double>(p) * static_cast<double>(n);
                out.s[j] += gauss(t, sigma);
                out.ds[j] += dgauss(t, sigma);
            }
        return out;
    };
    SpectralKernel k;
    k.n = n;
    k.even = true;
    k.name = "gaussian-wrapped";
    k.a = [n, sums](double sigma) {
        Vec a(n, 0.0);
        a[0] = 1.0;
        if (sigma == 0.0) return a;
        const Sums s = sums(sigma);
        for (std::size_t j = 1; j < n; ++j) a[j] = s.s[j] / s.s[0];
        return a;
    };
    k.da = [n, sums](double sigma) {
        Vec d(n, 0.0);
        if (sigma == 0.0) return d;
        const Sums s = sums(sigma);
        for (std::size_t j = 1; j < n; ++j)
            d[j] = (s.ds[j] * s.s[0] - s.s[j] * s.ds[0]) / (s.s[0] * s.s[0]);
        return d;
    };
    return k;
}

FourierSymbols fourier_symbols(const SpectralKernel& kernel, double sigma) {
    const Vec a = checked_kernel(kernel, kernel.a, sigma, "a");
    FourierSymbols s;
    s.G = fft::forward_1d(fft::to_complex(a));
    const cplx g0 = s.G[0];
    if (g0 == cplx(0.0, 0.0)) throw ModelError("fourier_symbols: degenerate kernel with G_0 = 0");
    s.mu.resize(kernel.n);
    for (std::size_t k = 0; k < kernel.n; ++k) s.mu[k] = s.G[k] / g0;
    return s;
}

FourierSymbolDerivatives fourier_symbol_derivatives(const SpectralKernel& kernel, double sigma) {
    FourierSymbolDerivatives d;
    d.symbols = fourier_symbols(kernel, sigma);
    d.dG = fft::forward_1d(fft::to_complex(checked_kernel(kernel, kernel.da, sigma, "da")));
    const cplx g0 = d.symbols.G[0];
    const cplx dg0 = d.dG[0];
    d.dmu.resize(kernel.n);
    for (std::size_t k = 0; k < kernel.n; ++k)
        d.dmu[k] = (d.dG[k] * g0 - d.symbols.G[k] * dg0) / (g0 * g0);
    return d;
}

std::vector<cplx> unitary_dft(std::span<const double> b) {
    auto s = fft::forward_1d(fft::to_complex(b));
    const double c = 1.0 / std::sqrt(static_cast<double>(b.size()));
    for (auto& v : s) v *= c;
    return s;
}

double phi_spectral(const SpectralKernel& kernel, double sigma, double lambda, std::span<const cplx> bt) {
    if (bt.size() != kernel.n) throw ArgumentError("phi_spectral: bt length does not match kernel");
    if (!(lambda > 0.0)) throw ArgumentError("phi_spectral: lambda must be positive");
    const FourierSymbols s = fourier_symbols(kernel, sigma);
    const double l2 = lambda * lambda;
    double phi = 0.0;
    for (std::size_t k = 0; k < kernel.n; ++k) phi += l2 / (2.0 * (std::norm(s.mu[k]) + l2)) * std::norm(bt[k]);
    return phi;
}

double dphi_spectral(const SpectralKernel& kernel, double sigma, double lambda, std::span<const cplx> bt) {
    if (bt.size() != kernel.n) throw ArgumentError("dphi_spectral: bt length does not match kernel");
    if (!(lambda > 0.0)) throw ArgumentError("dphi_spectral: lambda must be positive");
    const FourierSymbolDerivatives d = fourier_symbol_derivatives(kernel, sigma);
    const double l2 = lambda * lambda;
    double dphi = 0.0;
    for (std::size_t k = 1; k < kernel.n; ++k) {
        const cplx mu = d.symbols.mu[k];
        const double den = std::norm(mu) + l2;
        dphi -= l2 * std::real(std::conj(mu) * d.dmu[k]) / (den * den) * std::norm(bt[k]);
    }
    return dphi;
}

// ---------------------------------------------------------------------------
// n = 2 closed forms
// ---------------------------------------------------------------------------

namespace two_by_two {

double a1(double sigma) { return sigma == 0.0 ? 0.0 : gauss(1.0, sigma); }

double da1(double sigma) { return sigma == 0.0 ? 0.0 : dgauss(1.0, sigma); }

double mu1(double sigma) {
    const double a = a1(sigma);
    return (1.0 - a) / (1.0 + a);
}

double dmu1(double sigma) {
    const double a = a1(sigma);
    return -2.0 * da1(sigma) / ((1.0 + a) * (1.0 + a));
}

std::pair<double, double> beta(std::span<const double> b) {
    if (b.size() != 2) throw ArgumentError("two_by_two::beta: b must have length 2");
    const double r = 1.0 / std::sqrt(2.0);
    return {r * (b[0] + b[1]), r * (b[0] - b[1])};
}

double phi(double sigma, double lambda, double beta1, double beta2) {
    const double l2 = lambda * lambda;
    const double m = mu1(sigma);
    return 0.5 * l2 / (1.0 + l2) * beta1 * beta1 + 0.5 * l2 / (m * m + l2) * beta2 * beta2;
}

double dphi(double sigma, double lambda, double beta2) {
    const double l2 = lambda * lambda;
    const double a = a1(sigma);
    const double m = mu1(sigma);
    const double mdm = -2.0 * (1.0 - a) * da1(sigma) / ((1.0 + a) * (1.0 + a) * (1.0 + a));
    const double den = m * m + l2;
    return -l2 * mdm / (den * den) * beta2 * beta2;
}

Vec x(double sigma, double lambda, std::span<const double> b) {
    const auto [b1, b2] = beta(b);
    const double l2 = lambda * lambda;
    const double m = mu1(sigma);
    const double c1 = b1 / (1.0 + l2);
    const double c2 = m * b2 / (m * m + l2);
    const double r = 1.0 / std::sqrt(2.0);
    return {r * (c1 + c2), r * (c1 - c2)};
}

}  // namespace two_by_two

// ---------------------------------------------------------------------------
// CirculantFamily1D
// ---------------------------------------------------------------------------

namespace {

double scalar_sigma(std::span<const double> y) {
    if (y.size() != 1) throw ArgumentError("CirculantFamily1D: expects a scalar parameter");
    return y[0];
}

// out_i = sum_j c_{(i-j) mod n} x_j, or c_{(j-i) mod n} when transposed.
Vec circulant_apply(std::span<const double> c, std::span<const double> x, bool transpose) {
    const std::size_t n = c.size();
    if (x.size() != n) throw ArgumentError("CirculantFamily1D: vector length does not match n");
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += c[transpose ? (j + n - i) % n : (i + n - j) % n] * x[j];
        out[i] = s;
    }
    return out;
}

}  // namespace

CirculantFamily1D::CirculantFamily1D(SpectralKernel kernel) : kernel_(std::move(kernel)) {
    if (kernel_.n == 0 || !kernel_.a || !kernel_.da) {
        throw ArgumentError("CirculantFamily1D: kernel must define n, a and da");
    }
}

Vec CirculantFamily1D::column(double sigma) const {
    Vec a = checked_kernel(kernel_, kernel_.a, sigma, "a");
    double g0 = 0.0;
    for (double v : a) g0 += v;
    if (g0 == 0.0) throw ModelError("CirculantFamily1D: degenerate kernel with G_0 = 0");
    scale(1.0 / g0, a);
    return a;
}

Vec CirculantFamily1D::column_derivative(double sigma) const {
    const Vec a = checked_kernel(kernel_, kernel_.a, sigma, "a");
    const Vec da = checked_kernel(kernel_, kernel_.da, sigma, "da");
    double g0 = 0.0, dg0 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        g0 += a[j];
        dg0 += da[j];
    }
    if (g0 == 0.0) throw ModelError("CirculantFamily1D: degenerate kernel with G_0 = 0");
    Vec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = da[j] / g0 - a[j] * dg0 / (g0 * g0);
    return out;
}

Vec CirculantFamily1D::apply(std::span<const double> y, std::span<const double> x) const {
    return circulant_apply(column(scalar_sigma(y)), x, false);
}

Vec CirculantFamily1D::apply_transpose(std::span<const double> y, std::span<const double> v) const {
    return circulant_apply(column(scalar_sigma(y)), v, true);
}

Vec CirculantFamily1D::apply_dparam(std::span<const double> y, std::size_t j,
                                    std::span<const double> x) const {
    if (j != 0) throw ArgumentError("parameter index out of range");
    return circulant_apply(column_derivative(scalar_sigma(y)), x, false);
}

Vec CirculantFamily1D::apply_dparam_transpose(std::span<const double> y, std::size_t j,
                                              std::span<const double> v) const {
    if (j != 0) throw ArgumentError("parameter index out of range");
    return circulant_apply(column_derivative(scalar_sigma(y)), v, true);
}

std::optional<DftSymbols> CirculantFamily1D::dft_symbols(std::span<const double> y) const {
    const FourierSymbolDerivatives d = fourier_symbol_derivatives(kernel_, scalar_sigma(y));
    DftSymbols s;
    s.geometry = {kernel_.n, 1};
    s.eigenvalues = d.symbols.mu;
    s.derivative_eigenvalues.push_back(d.dmu);
    return s;
}

// ---------------------------------------------------------------------------
// No-blur conditions
// ---------------------------------------------------------------------------

NoBlurReport check_noblur_conditions(const SpectralKernel& kernel, std::span<const double> sigma_grid,
                                     std::optional<std::span<const double>> b) {
    if (sigma_grid.empty()) throw ArgumentError("check_noblur_conditions: empty grid");
    for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
        if (!(sigma_grid[i] > 0.0)) throw ArgumentError("check_noblur_conditions: grid must be positive");
        if (i > 0 && !(sigma_grid[i] > sigma_grid[i - 1])) {
            throw ArgumentError("check_noblur_conditions: grid must be sorted increasing");
        }
    }
    const std::size_t n = kernel.n;
    NoBlurReport rep;

    // (i)
    {
        const Vec a = checked_kernel(kernel, kernel.a, sigma_grid.front(), "a");
        double g0 = 0.0;
        for (double v : a) g0 += v;
        double err = std::abs(a[0] / g0 - 1.0);
        for (std::size_t j = 1; j < n; ++j) err = std::max(err, std::abs(a[j] / g0));
        rep.limit_error = err;
        rep.limit_identity = err <= 1e-8;
        if (!rep.limit_identity) rep.failures.push_back("(i) A(sigma_min) differs from I by " + std::to_string(err));
    }

    // (ii)
    {
        double err = 0.0;
        bool degenerate = false;
        for (double s : sigma_grid) {
            const Vec ap = checked_kernel(kernel, kernel.a, s, "a");
            const Vec am = checked_kernel(kernel, kernel.a, -s, "a");
            for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(ap[j] - am[j]));
            try {
                const FourierSymbols mp = fourier_symbols(kernel, s);
                const FourierSymbols mm = fourier_symbols(kernel, -s);
                for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(mp.mu[k] - mm.mu[k]));
            } catch (const ModelError&) {
                degenerate = true;
            }
        }
        rep.evenness_error = degenerate ? std::numeric_limits<double>::infinity() : err;
        rep.evenness = !degenerate && err <= 1e-12;
        if (!rep.evenness) rep.failures.push_back("(ii) kernel is not even in sigma (max deviation " + std::to_string(rep.evenness_error) + ")");
    }

    // (iii) The round-off bound on Re(conj(mu) mu') follows from the DFT error
    // bounds |dG_k| <= n u sum|a_j| and the quotient rule for mu and mu'.
    {
        constexpr double u = std::numeric_limits<double>::epsilon() / 2.0;
        for (double s : sigma_grid) {
            const Vec a = checked_kernel(kernel, kernel.a, s, "a");
            const Vec da = checked_kernel(kernel, kernel.da, s, "da");
            FourierSymbolDerivatives d;
            try {
                d = fourier_symbol_derivatives(kernel, s);
            } catch (const ModelError&) {
                rep.sign_failures += n - 1;
                if (rep.first_failure_sigma == 0.0) rep.first_failure_sigma = s;
                continue;
            }
            const double g0 = std::abs(d.symbols.G[0]);
            double sa = 0.0, sda = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                sa += std::abs(a[j]);
                sda += std::abs(da[j]);
            }
            const double big_s = sa / g0;
            const double big_d = (sda + std::abs(d.dG[0]) * big_s) / g0;
            for (std::size_t k = 1; k < n; ++k) {
                const cplx mu = d.symbols.mu[k];
                const double t = std::real(std::conj(mu) * d.dmu[k]);
                const double tol = 8.0 * static_cast<double>(n) * u * (std::abs(mu) * big_d + std::abs(d.dmu[k]) * big_s);
                if (std::abs(t) <= tol) {
                    ++rep.sign_indeterminate;
                } else {
                    ++rep.sign_checked;
                    if (t > 0.0) {
                        ++rep.sign_failures;
                        if (rep.first_failure_sigma == 0.0) rep.first_failure_sigma = s;
                    }
                }
            }
        }
        rep.modal_sign = rep.sign_failures == 0 && rep.sign_checked > 0;
        if (!rep.modal_sign) {
            rep.failures.push_back("(iii) Re(conj(mu_k) mu_k') >= 0 at " + std::to_string(rep.sign_failures) +
                                   " (sigma, k) pairs, first at sigma = " + std::to_string(rep.first_failure_sigma));
        }
    }

    if (b) {
        if (b->size() != n) throw ArgumentError("check_noblur_conditions: b length does not match kernel");
        const auto bt = unitary_dft(*b);
        const double total = norm2(*b);
        rep.high_frequency_energy = false;
        for (std::size_t k = 1; k < n; ++k)
            if (std::abs(bt[k]) > 1e-14 * total) rep.high_frequency_energy = true;
        if (!rep.high_frequency_energy) rep.failures.push_back("b has no energy at k >= 1; phi is constant in sigma");
    }
    rep.sigma_zero_unique_minimizer = rep.all_conditions() && rep.high_frequency_energy;
    return rep;
}

}  // namespace rvarpro
