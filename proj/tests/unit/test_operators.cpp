#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "rvarpro/errors.hpp"
#include "rvarpro/kernels.hpp"
#include "rvarpro/operators.hpp"

using namespace rvarpro;

namespace {

// Dense symmetric Toeplitz from its first column.
Eigen::MatrixXd toeplitz(const Vec& col) {
    const std::size_t n = col.size();
    Eigen::MatrixXd t(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t(i, j) = col[i > j ? i - j : j - i];
    return t;
}

// out(i,j) = sum_{k,l} psf(k,l) x((i - k + c) mod n, (j - l + c) mod n), c = floor(n/2)
Vec direct_circular_convolution(const DenseMat& psf, const Vec& x, std::size_t n) {
    const std::size_t c = n / 2;
    Vec out(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l)
                for (std::size_t k = 0; k < n; ++k) {
                    const std::size_t ii = (i + 2 * n + c - k) % n;
                    const std::size_t jj = (j + 2 * n + c - l) % n;
                    s += psf(k, l) * x[ii + jj * n];
                }
            out[i + j * n] = s;
        }
    return out;
}

}  // namespace

TEST_CASE("gaussian_column_1d: special values") {
    const Vec c0 = gaussian_column_1d(0.0, 4);
    CHECK(c0 == Vec{1, 0, 0, 0});

    for (double s : {0.3, 1.0, 2.7}) {
        const double a1 = std::exp(-1.0 / (2 * s * s));
        const Vec c = gaussian_column_1d(s, 2);
        CHECK(c[0] == doctest::Approx(1.0 / (1.0 + a1)).epsilon(1e-15));
        CHECK(c[1] == doctest::Approx(a1 / (1.0 + a1)).epsilon(1e-15));
    }

    const Vec wide = gaussian_column_1d(1e6, 4);
    for (double v : wide) CHECK(std::abs(v - 0.25) < 1e-9);
}

TEST_CASE("toeplitz_apply_1d matches dense assembly") {
    std::mt19937_64 rng(1);
    const Vec x = oracle::random_vec(16, rng);
    CHECK(toeplitz_apply_1d(0.0, x) == x);

    const Vec x2{0.7, -1.3};
    const double s = 1.4, a1 = std::exp(-1.0 / (2 * s * s));
    const Vec y2 = toeplitz_apply_1d(s, x2);
    CHECK(y2[0] == doctest::Approx((x2[0] + a1 * x2[1]) / (1 + a1)).epsilon(1e-14));
    CHECK(y2[1] == doctest::Approx((a1 * x2[0] + x2[1]) / (1 + a1)).epsilon(1e-14));

    for (double sigma : {0.4, 1.7, 3.9}) {
        const Eigen::MatrixXd t = toeplitz(gaussian_column_1d(sigma, 16));
        const Vec ref = oracle::to_vec(t * oracle::to_eigen(x));
        const Vec got = toeplitz_apply_1d(sigma, x);
        for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-13);
        CHECK((oracle::to_eigen(GaussianToeplitz1D(16).dense(sigma)) - t).norm() < 1e-14);
    }
}

TEST_CASE("GaussianToeplitz1D: transpose and derivative") {
    GaussianToeplitz1D fam(16);
    std::mt19937_64 rng(2);
    const Vec x = oracle::random_vec(16, rng), v = oracle::random_vec(16, rng);
    const double y[1] = {2.3};
    CHECK(dot(fam.apply(y, x), v) == doctest::Approx(dot(x, fam.apply_transpose(y, v))).epsilon(1e-14));

    const double zero[1] = {0.0};
    CHECK(norm2(dblur_dsigma(fam, 0.0, x)) == 0.0);
    CHECK(norm2(fam.apply_dparam(zero, 0, x)) == 0.0);

    // n = 2: d/dsigma [(1, a1); (a1, 1)] / (1 + a1) = a1' / (1+a1)^2 [(-1, 1); (1, -1)]
    GaussianToeplitz1D two(2);
    const Vec x2{0.3, 1.1};
    for (double s : {0.5, 1.0, 2.0}) {
        const double a1 = std::exp(-1.0 / (2 * s * s));
        const double da1 = a1 / (s * s * s);
        const double f = da1 / ((1 + a1) * (1 + a1));
        const Vec d = dblur_dsigma(two, s, x2);
        CHECK(d[0] == doctest::Approx(f * (x2[1] - x2[0])).epsilon(1e-13));
        CHECK(d[1] == doctest::Approx(f * (x2[0] - x2[1])).epsilon(1e-13));
    }

    for (double s : {0.6, 1.8, 4.2}) {
        const double ys[1] = {s};
        const Vec fd = oracle::central_difference(
            [&](double t) { return toeplitz_apply_1d(t, x); }, s, 1e-5);
        CHECK(oracle::rel_diff(fam.apply_dparam(ys, 0, x), fd) < 1e-8);
        CHECK(dot(fam.apply_dparam(ys, 0, x), v) ==
              doctest::Approx(dot(x, fam.apply_dparam_transpose(ys, 0, v))).epsilon(1e-13));
    }
}

TEST_CASE("gaussian_psf_2d: normalization and concentration") {
    for (double y : {0.5, 3.0, 9.0}) {
        const DenseMat p = gaussian_psf_2d(y, 16);
        double s = 0.0;
        for (double v : p.data()) s += v;
        CHECK(std::abs(s - 1.0) < 1e-14);
    }
    const DenseMat tight = gaussian_psf_2d(1e-8, 16);
    CHECK(tight(8, 8) > 1.0 - 1e-12);
    CHECK_THROWS_AS(gaussian_psf_2d(0.0, 16), ArgumentError);
    CHECK_THROWS_AS(gaussian_psf_2d(-1.0, 16), ArgumentError);
}

TEST_CASE("bccb_apply: delta, constants, direct convolution") {
    const std::size_t n = 8;
    std::mt19937_64 rng(3);
    const Vec x = oracle::random_vec(n * n, rng);

    DenseMat delta(n, n);
    delta(n / 2, n / 2) = 1.0;
    CHECK(oracle::rel_diff(bccb_apply(delta, x), x) < 1e-14);

    const DenseMat psf = gaussian_psf_2d(1.3, n);
    const Vec c(n * n, 2.5);
    for (double v : bccb_apply(psf, c)) CHECK(v == doctest::Approx(2.5).epsilon(1e-13));

    DenseMat rnd(n, n);
    for (double& v : rnd.data()) v = std::uniform_real_distribution<double>(0, 1)(rng);
    const Vec ref = direct_circular_convolution(rnd, x, n);
    const Vec got = bccb_apply(rnd, x);
    for (std::size_t i = 0; i < n * n; ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-11);

    // Transpose by the adjoint identity and by the reflected PSF.
    const Vec v = oracle::random_vec(n * n, rng);
    CHECK(dot(bccb_apply(rnd, x), v) == doctest::Approx(dot(x, bccb_apply_transpose(rnd, v))).epsilon(1e-12));
    CHECK(oracle::rel_diff(bccb_apply_transpose(rnd, v), bccb_apply(reflect_psf(rnd), v)) < 1e-12);

    // Serial direct kernel agrees with the FFT route.
    Vec direct(n * n);
    kernels::serial::circular_convolve_2d(n, psf_to_origin(rnd), x, direct);
    CHECK(oracle::rel_diff(direct, got) < 1e-12);
}

TEST_CASE("GaussianBccb2D: derivative, transpose, symbols, domain") {
    const std::size_t n = 16;
    GaussianBccb2D fam(n);
    std::mt19937_64 rng(4);
    const Vec x = oracle::random_vec(n * n, rng), v = oracle::random_vec(n * n, rng);
    const double y[1] = {3.0};
    const Vec fd = oracle::central_difference(
        [&](double t) { return bccb_apply(gaussian_psf_2d(t, n), x); }, 3.0, 1e-5);
    CHECK(oracle::rel_diff(dblur_dsigma(fam, 3.0, x), fd) < 1e-6);
    CHECK(oracle::rel_diff(fam.apply_dparam(y, 0, x), fd) < 1e-6);
    CHECK(dot(fam.apply(y, x), v) == doctest::Approx(dot(x, fam.apply_transpose(y, v))).epsilon(1e-12));
    CHECK(dot(fam.apply_dparam(y, 0, x), v) ==
          doctest::Approx(dot(x, fam.apply_dparam_transpose(y, 0, v))).epsilon(1e-11));

    const auto sym = fam.dft_symbols(y);
    REQUIRE(sym.has_value());
    CHECK(sym->geometry == DftGeometry{n, 2});
    CHECK(std::abs(sym->eigenvalues[0] - cplx(1.0, 0.0)) < 1e-14);
    const auto ev = bccb_eigenvalues(gaussian_psf_2d(3.0, n));
    for (std::size_t i = 0; i < ev.size(); ++i) CHECK(std::abs(ev[i] - sym->eigenvalues[i]) < 1e-14);

    const double bad[1] = {-0.5};
    CHECK_THROWS_AS(fam.check_domain(bad), DomainError);
    CHECK(fam.requires_positive_parameters());
}

TEST_CASE("laplacian_apply: stencil, constants, dense assembly") {
    const std::size_t n = 4;
    Vec e(n * n, 0.0);
    e[1 + 1 * n] = 1.0;
    const Vec out = laplacian_apply(e, n);
    CHECK(out[1 + 1 * n] == -4.0);
    CHECK(out[0 + 1 * n] == 1.0);
    CHECK(out[2 + 1 * n] == 1.0);
    CHECK(out[1 + 0 * n] == 1.0);
    CHECK(out[1 + 2 * n] == 1.0);
    double rest = 0.0;
    for (double v : out) rest += std::abs(v);
    CHECK(rest == 8.0);

    for (double v : laplacian_apply(Vec(64, 3.0), 8)) CHECK(v == 0.0);

    std::mt19937_64 rng(5);
    const Vec x = oracle::random_vec(64, rng);
    const RegOperator lap = RegOperator::laplacian_2d(8);
    const Eigen::MatrixXd m = oracle::to_eigen(lap.dense());
    CHECK(oracle::rel_diff(laplacian_apply(x, 8), oracle::to_vec(m * oracle::to_eigen(x))) < 1e-13);
    CHECK((m - m.transpose()).norm() == 0.0);

    // DFT symbol of L equals the eigenvalues of the dense operator.
    const auto sym = lap.dft_symbols(DftGeometry{8, 2});
    REQUIRE(sym.has_value());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    std::vector<double> a, b;
    for (const auto& s : *sym) a.push_back(s.real());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) b.push_back(es.eigenvalues()(i));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);

    CHECK_THROWS_AS(RegOperator::laplacian_2d(2), ArgumentError);
    CHECK(RegOperator::identity(64).dft_symbols(DftGeometry{8, 2}).has_value());
    CHECK_FALSE(RegOperator::identity(8).dft_symbols(DftGeometry{8, 2}).has_value());
}

TEST_CASE("kernels: serial and omp agree bit-for-bit") {
    std::mt19937_64 rng(6);
    const std::size_t n = 24;
    const Vec col = oracle::random_vec(n * n, rng), x = oracle::random_vec(n * n, rng);
    Vec a(n * n), b(n * n);

    kernels::serial::symmetric_toeplitz_apply(col, x, a);
    kernels::omp::symmetric_toeplitz_apply(col, x, b);
    CHECK(a == b);

    kernels::serial::periodic_laplacian_apply(n, x, a);
    kernels::omp::periodic_laplacian_apply(n, x, b);
    CHECK(a == b);

    const DenseMat m = oracle::random_mat(40, 30, rng);
    const Vec v30 = oracle::random_vec(30, rng), v40 = oracle::random_vec(40, rng);
    Vec s40(40), o40(40), s30(30), o30(30);
    kernels::serial::matvec(m, v30, s40);
    kernels::omp::matvec(m, v30, o40);
    CHECK(s40 == o40);
    kernels::serial::matvec_transpose(m, v40, s30);
    kernels::omp::matvec_transpose(m, v40, o30);
    CHECK(s30 == o30);
    DenseMat gs(30, 30), go(30, 30);
    kernels::serial::gram(m, gs);
    kernels::omp::gram(m, go);
    CHECK(std::equal(gs.data().begin(), gs.data().end(), go.data().begin()));

    std::vector<cplx> mu(64), ell(64), s1(64), s2(64);
    for (std::size_t i = 0; i < 64; ++i) {
        mu[i] = {x[i], x[i + 64]};
        ell[i] = {col[i], col[i + 64]};
        s1[i] = s2[i] = {x[i + 128], x[i + 192]};
    }
    Vec den1(64), den2(64);
    kernels::serial::tikhonov_denominator(mu, ell, 0.7, den1);
    kernels::omp::tikhonov_denominator(mu, ell, 0.7, den2);
    CHECK(den1 == den2);
    kernels::serial::spectral_scale(s1, mu, true);
    kernels::omp::spectral_scale(s2, mu, true);
    CHECK(s1 == s2);
    kernels::serial::spectral_divide(s1, den1);
    kernels::omp::spectral_divide(s2, den2);
    CHECK(s1 == s2);

    const std::size_t m8 = 8;
    Vec k8 = oracle::random_vec(m8 * m8, rng), i8 = oracle::random_vec(m8 * m8, rng), c1(m8 * m8), c2(m8 * m8);
    kernels::serial::circular_convolve_2d(m8, k8, i8, c1);
    kernels::omp::circular_convolve_2d(m8, k8, i8, c2);
    CHECK(c1 == c2);
    CHECK(kernels::max_threads() >= 1);
}
