#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "rvarpro/errors.hpp"
#include "rvarpro/linalg.hpp"

using namespace rvarpro;

TEST_CASE("dense_normal_solve: identity and diagonal") {
    const Vec d{1.5, -2.0, 0.25};
    const Vec x = dense_normal_solve(DenseMat::identity(3), d);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(d[i]).epsilon(1e-15));

    const Vec y = dense_normal_solve(DenseMat{{2, 0}, {0, 3}}, Vec{4, 9});
    CHECK(y[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("dense_normal_solve: random 8x5 satisfies the normal equations") {
    std::mt19937_64 rng(11);
    const DenseMat k = oracle::random_mat(8, 5, rng);
    const Vec d = oracle::random_vec(8, rng);
    const Vec x = dense_normal_solve(k, d);
    const Vec r = subtract(k.multiply(x), d);
    CHECK(norm2(k.multiply_transpose(r)) < 1e-10 * norm2(k.multiply_transpose(d)));

    const Eigen::VectorXd ref = oracle::to_eigen(k).colPivHouseholderQr().solve(oracle::to_eigen(d));
    CHECK(oracle::rel_diff(x, oracle::to_vec(ref)) < 1e-12);
}

TEST_CASE("estimate_op_norm") {
    CHECK(estimate_op_norm(LinOp::from_dense(scaled(2.0, DenseMat::identity(4))), 20) ==
          doctest::Approx(2.0).epsilon(1e-8));
    const Vec diag{1, 2, 5};
    CHECK(estimate_op_norm(LinOp::from_dense(DenseMat::diagonal(diag)), 50) == doctest::Approx(5.0).epsilon(1e-6));

    std::mt19937_64 rng(3);
    const DenseMat k = oracle::random_mat(10, 6, rng);
    const double smax = oracle::singular_values(oracle::to_eigen(k))(0);
    CHECK(oracle::rel_diff(estimate_op_norm(LinOp::from_dense(k), 100, 7), smax) < 1e-4);
}

TEST_CASE("solve_spd and Cholesky") {
    const Vec a = solve_spd(DenseMat::identity(2), Vec{3, -1});
    CHECK(a[0] == 3.0);
    CHECK(a[1] == -1.0);
    const Vec b = solve_spd(DenseMat{{4, 0}, {0, 9}}, Vec{8, 27});
    CHECK(b[0] == doctest::Approx(2.0));
    CHECK(b[1] == doctest::Approx(3.0));

    std::mt19937_64 rng(5);
    const DenseMat m = oracle::random_mat(7, 5, rng);
    const DenseMat h = add(m.gram(), DenseMat::identity(5));
    const Vec g = oracle::random_vec(5, rng);
    const Vec x = solve_spd(h, g);
    CHECK(oracle::rel_diff(h.multiply(x), g) < 1e-12);

    CHECK_THROWS_AS(Cholesky(DenseMat{{1, 2}, {2, 1}}), SingularityError);
}

TEST_CASE("DenseMat algebra matches Eigen") {
    std::mt19937_64 rng(9);
    const DenseMat a = oracle::random_mat(6, 4, rng);
    const DenseMat b = oracle::random_mat(4, 3, rng);
    const Eigen::MatrixXd ab = oracle::to_eigen(a) * oracle::to_eigen(b);
    CHECK((oracle::to_eigen(matmul(a, b)) - ab).norm() < 1e-13);
    const Eigen::MatrixXd g = oracle::to_eigen(a).transpose() * oracle::to_eigen(a);
    CHECK((oracle::to_eigen(a.gram()) - g).norm() < 1e-13);
    const Vec x = oracle::random_vec(4, rng);
    CHECK(oracle::rel_diff(a.multiply(x), oracle::to_vec(oracle::to_eigen(a) * oracle::to_eigen(x))) < 1e-14);
    const Vec v = oracle::random_vec(6, rng);
    CHECK(oracle::rel_diff(a.multiply_transpose(v),
                           oracle::to_vec(oracle::to_eigen(a).transpose() * oracle::to_eigen(v))) < 1e-14);
    const DenseMat c = oracle::random_mat(3, 4, rng);
    CHECK((oracle::to_eigen(vstack(a, c)).bottomRows(3) - oracle::to_eigen(c)).norm() == 0.0);
    CHECK_THROWS_AS(vstack(a, b), ArgumentError);
}

TEST_CASE("lsqr: identity converges immediately") {
    const Vec d{1, 2, 3, 4, 5};
    LsqrOptions opts;
    opts.tolerance = 1e-9;
    const LsqrResult r = lsqr_solve(LinOp::identity(5), d, opts);
    CHECK(r.converged);
    CHECK(r.iterations_used <= 1);
    CHECK(oracle::rel_diff(r.solution, d) < 1e-14);
    CHECK(norm2(r.residual) < 1e-14);
}

TEST_CASE("lsqr: small dense system matches the normal-equations oracle") {
    const DenseMat k{{1, 0}, {0, 1}, {1, 1}};
    const Vec d{1, 2, 3};
    LsqrOptions opts;
    opts.tolerance = 1e-12;
    const LsqrResult r = lsqr_solve(LinOp::from_dense(k), d, opts);
    CHECK(r.converged);
    CHECK(r.final_criterion_value < opts.tolerance);
    CHECK(oracle::rel_diff(r.solution, dense_normal_solve(k, d)) < 1e-10);
}

TEST_CASE("lsqr: stored criterion is the explicit ratio and below eps when converged") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const DenseMat k = oracle::random_mat(30, 12, rng);
        const Vec d = oracle::random_vec(30, rng);
        for (double eps : {1e-3, 1e-6, 1e-10}) {
            LsqrOptions opts;
            opts.tolerance = eps;
            const LinOp op = LinOp::from_dense(k);
            const LsqrResult r = lsqr_solve(op, d, opts);
            REQUIRE(r.converged);
            CHECK(r.final_criterion_value < eps);
            const double explicit_value =
                lsqr_criterion(op, d, r.solution, r.operator_norm, LsqrStop::normal_equations);
            CHECK(explicit_value == doctest::Approx(r.final_criterion_value).epsilon(1e-12));
            CHECK(oracle::rel_diff(r.residual, subtract(k.multiply(r.solution), d)) < 1e-14);
        }
    }
}

TEST_CASE("lsqr: consistent stop gives the minimum-norm solution") {
    std::mt19937_64 rng(4);
    const DenseMat k = oracle::random_mat(4, 9, rng);  // underdetermined, full row rank
    const Vec d = oracle::random_vec(4, rng);
    LsqrOptions opts;
    opts.tolerance = 1e-13;
    opts.stop = LsqrStop::consistent;
    const LsqrResult r = lsqr_solve(LinOp::from_dense(k), d, opts);
    CHECK(r.converged);
    const Eigen::VectorXd ref = oracle::pseudoinverse(oracle::to_eigen(k)) * oracle::to_eigen(d);
    CHECK(oracle::rel_diff(r.solution, oracle::to_vec(ref)) < 1e-10);
}

TEST_CASE("lsqr: iteration cap is reported") {
    std::mt19937_64 rng(8);
    const DenseMat k = oracle::random_mat(40, 20, rng);
    const Vec d = oracle::random_vec(40, rng);
    LsqrOptions opts;
    opts.tolerance = 1e-15;
    opts.max_iterations = 3;
    const LsqrResult r = lsqr_solve(LinOp::from_dense(k), d, opts);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations_used == 3);
}

TEST_CASE("lsqr: residual norm history is non-increasing") {
    std::mt19937_64 rng(13);
    const DenseMat k = oracle::random_mat(25, 10, rng);
    const Vec d = oracle::random_vec(25, rng);
    LsqrOptions opts;
    opts.tolerance = 1e-12;
    opts.record_history = true;
    const LsqrResult r = lsqr_solve(LinOp::from_dense(k), d, opts);
    REQUIRE(r.residual_history.size() == r.iterations_used);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
        CHECK(r.residual_history[i] <= r.residual_history[i - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("lsqr: rejects bad arguments") {
    LsqrOptions opts;
    opts.tolerance = 0.0;
    CHECK_THROWS_AS(lsqr_solve(LinOp::identity(3), Vec{1, 2, 3}, opts), ArgumentError);
    CHECK_THROWS_AS(lsqr_solve(LinOp::identity(3), Vec{1, 2}), ArgumentError);
}
