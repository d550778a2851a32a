#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "rvarpro/errors.hpp"
#include "rvarpro/regularizers.hpp"

using namespace rvarpro;

namespace {

std::vector<ParamRegularizer> sample_regularizers(std::size_t r) {
    return {QuadraticRegularizer{3.8, Vec(r, 5.0)}, QuadraticRegularizer{0.7, Vec(r, -1.0)},
            LogBarrierRegularizer{Vec(r, 3.8)}, LogBarrierRegularizer{Vec(r, 0.425)}};
}

}  // namespace

TEST_CASE("reg_value: special values") {
    CHECK(reg_value(NoRegularizer{}, Vec{1.0, 2.0}) == 0.0);
    CHECK(reg_value(QuadraticRegularizer{2.0, {1.0, 2.0}}, Vec{1.0, 2.0}) == 0.0);
    CHECK(reg_value(LogBarrierRegularizer{{1.0, 2.0, 3.0}}, Vec{1.0, 1.0, 1.0}) == 0.0);
    CHECK(reg_value(QuadraticRegularizer{3.8, {5.0}}, Vec{3.0}) == doctest::Approx(28.88).epsilon(1e-14));
}

TEST_CASE("reg_gradient and reg_hessian: special values") {
    const Vec g0 = reg_gradient(QuadraticRegularizer{3.8, {5.0, 1.0}}, Vec{5.0, 1.0});
    CHECK(g0 == Vec{0.0, 0.0});
    CHECK(reg_gradient(LogBarrierRegularizer{{2.0}}, Vec{4.0})[0] == doctest::Approx(-1.0));

    const DenseMat h = reg_hessian(QuadraticRegularizer{2.0, Vec(3, 0.0)}, Vec{1, 2, 3});
    CHECK((oracle::to_eigen(h) - 4.0 * Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
    CHECK(reg_hessian(LogBarrierRegularizer{{3.0}}, Vec{3.0})(0, 0) == doctest::Approx(1.0));
    CHECK(reg_hessian(NoRegularizer{}, Vec{1.0}).max_abs() == 0.0);
}

TEST_CASE("reg_stack: special values and J^T J = hessian") {
    const RegStack q = reg_stack(QuadraticRegularizer{3.8, {5.0}}, Vec{5.0});
    CHECK(q.extra_residual == Vec{0.0});
    CHECK(q.extra_jacobian(0, 0) == doctest::Approx(3.8));
    const RegStack lb = reg_stack(LogBarrierRegularizer{{2.0}}, Vec{1.0});
    CHECK(lb.extra_residual[0] == doctest::Approx(2.0));
    CHECK(lb.extra_jacobian(0, 0) == doctest::Approx(-2.0));
    CHECK(reg_stack(NoRegularizer{}, Vec{1.0}).extra_residual.empty());

    std::mt19937_64 rng(1);
    for (const auto& reg : sample_regularizers(3)) {
        const Vec y = oracle::random_vec(3, rng, 0.5, 6.0);
        const RegStack s = reg_stack(reg, y);
        const Eigen::MatrixXd jtj = oracle::to_eigen(s.extra_jacobian).transpose() * oracle::to_eigen(s.extra_jacobian);
        CHECK((jtj - oracle::to_eigen(reg_hessian(reg, y))).norm() < 1e-13 * std::max(1.0, jtj.norm()));
        if (std::holds_alternative<QuadraticRegularizer>(reg)) {
            // The quadratic value is exactly half the squared stacked residual.
            CHECK(0.5 * dot(s.extra_residual, s.extra_residual) ==
                  doctest::Approx(reg_value(reg, y)).epsilon(1e-14));
        }
    }
}

TEST_CASE("gradient and hessian match finite differences (20 seeded samples)") {
    std::mt19937_64 rng(2);
    int samples = 0;
    for (int round = 0; round < 5; ++round) {
        for (const auto& reg : sample_regularizers(2)) {
            const Vec y = oracle::random_vec(2, rng, 0.5, 6.0);
            const Vec g = reg_gradient(reg, y);
            const DenseMat h = reg_hessian(reg, y);
            for (std::size_t j = 0; j < 2; ++j) {
                const double hstep = 1e-5 * std::max(1.0, std::abs(y[j]));
                auto at = [&](double t) {
                    Vec yy = y;
                    yy[j] = t;
                    return yy;
                };
                const double fd = oracle::central_difference(
                    [&](double t) { return reg_value(reg, at(t)); }, y[j], hstep);
                CHECK(oracle::rel_diff(g[j], fd) < 1e-8);
                const Vec fdg = oracle::central_difference(
                    [&](double t) { return reg_gradient(reg, at(t)); }, y[j], hstep);
                CHECK(oracle::rel_diff(h.column(j), fdg) < 1e-6);
            }
            ++samples;
        }
    }
    CHECK(samples == 20);
}

TEST_CASE("reg_check: argument and domain errors") {
    CHECK_THROWS_AS(reg_check(QuadraticRegularizer{-1.0, {1.0}}, Vec{1.0}), ArgumentError);
    CHECK_THROWS_AS(reg_check(QuadraticRegularizer{1.0, {1.0, 2.0}}, Vec{1.0}), ArgumentError);
    CHECK_THROWS_AS(reg_check(LogBarrierRegularizer{{0.0}}, Vec{1.0}), ArgumentError);
    CHECK_THROWS_AS(reg_check(LogBarrierRegularizer{{1.0}}, Vec{0.0}), DomainError);
    CHECK_THROWS_AS(reg_check(LogBarrierRegularizer{{1.0}}, Vec{-2.0}), DomainError);
    CHECK_THROWS_AS(reg_value(LogBarrierRegularizer{{1.0}}, Vec{-2.0}), DomainError);
    CHECK_NOTHROW(reg_check(NoRegularizer{}, Vec{-2.0}));
    CHECK(reg_requires_positive(LogBarrierRegularizer{{1.0}}));
    CHECK_FALSE(reg_requires_positive(QuadraticRegularizer{1.0, {1.0}}));
    CHECK(reg_name(NoRegularizer{}) == "none");
}

TEST_CASE("fraction_to_boundary") {
    CHECK(fraction_to_boundary(Vec{2.0}, Vec{1.0}) == 1.0);
    CHECK(fraction_to_boundary(Vec{2.0}, Vec{-1.0}) == 1.0);
    // Full step would hit -2; keep 5% of y = 0.1 -> alpha = 1.9 / 4.
    const double a = fraction_to_boundary(Vec{2.0}, Vec{-4.0});
    CHECK(a == doctest::Approx(0.95 * 2.0 / 4.0).epsilon(1e-15));
    CHECK(2.0 + a * -4.0 == doctest::Approx(0.1));
    // Worst component governs.
    const double b = fraction_to_boundary(Vec{1.0, 4.0}, Vec{-2.0, -2.0});
    CHECK(b == doctest::Approx(0.95 / 2.0));

    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const Vec y = oracle::random_vec(3, rng, 0.1, 5.0);
        const Vec s = oracle::random_vec(3, rng, -20.0, 20.0);
        const double alpha = fraction_to_boundary(y, s);
        CHECK(alpha > 0.0);
        CHECK(alpha <= 1.0);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(y[j] + alpha * s[j] > 0.0);
            if (alpha < 1.0) CHECK(y[j] + alpha * s[j] >= 0.05 * y[j] * (1 - 1e-12));
        }
    }
    CHECK_THROWS_AS(fraction_to_boundary(Vec{-1.0}, Vec{1.0}), DomainError);
}
