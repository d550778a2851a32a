#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace rvarpro {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Vector helpers. Reductions are serial on purpose: summation order is fixed,
// so results do not depend on the OpenMP thread count.
// ---------------------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
Vec add(std::span<const double> a, std::span<const double> b);
Vec subtract(std::span<const double> a, std::span<const double> b);
Vec scaled(double alpha, std::span<const double> a);
Vec concat(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

// Row-major dense matrix.
class DenseMat {
public:
    DenseMat() = default;
    DenseMat(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMat(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMat identity(std::size_t n);
    static DenseMat diagonal(std::span<const double> diag);
    // Columns from a matrix-free action applied to unit vectors.
    static DenseMat from_columns(std::size_t rows, std::size_t cols,
                                 const std::function<Vec(std::span<const double>)>& apply);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    Vec column(std::size_t j) const;
    void set_column(std::size_t j, std::span<const double> values);

    Vec multiply(std::span<const double> x) const;
    Vec multiply_transpose(std::span<const double> x) const;
    DenseMat transpose() const;
    // A^T A
    DenseMat gram() const;
    // (A + A^T) / 2
    DenseMat symmetrized() const;

    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMat matmul(const DenseMat& a, const DenseMat& b);
DenseMat add(const DenseMat& a, const DenseMat& b);
DenseMat subtract(const DenseMat& a, const DenseMat& b);
DenseMat scaled(double alpha, const DenseMat& a);
// [top; bottom]
DenseMat vstack(const DenseMat& top, const DenseMat& bottom);

// Matrix-free linear operator. apply maps R^cols -> R^rows.
struct LinOp {
    using Action = std::function<Vec(std::span<const double>)>;

    std::size_t rows = 0;
    std::size_t cols = 0;
    Action apply;
    Action apply_transpose;

    LinOp transposed() const { return {cols, rows, apply_transpose, apply}; }

    static LinOp from_dense(DenseMat m);
    static LinOp identity(std::size_t n);
};

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class Cholesky {
public:
    // Throws SingularityError at the first pivot <= n u max_i a_ii.
    explicit Cholesky(const DenseMat& spd);

    Vec solve(std::span<const double> rhs) const;
    std::size_t dim() const noexcept { return factor_.rows(); }
    const DenseMat& factor() const noexcept { return factor_; }

private:
    DenseMat factor_;
};

// Returns H^{-1} g for symmetric positive definite H.
Vec solve_spd(const DenseMat& h, std::span<const double> g);

// Returns (K^T K)^{-1} K^T d. Exact oracle for the iterative solves at small sizes.
Vec dense_normal_solve(const DenseMat& k, std::span<const double> d);

// sqrt of the Rayleigh quotient after `iterations` power steps on K^T K.
double estimate_op_norm(const LinOp& k, std::size_t iterations = 30, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// LSQR
// ---------------------------------------------------------------------------

enum class LsqrStop {
    // ||K^T r|| / (||r|| ||K||) < eps, r = K x - d. Least-squares problems.
    normal_equations,
    // ||r|| / ||d|| < eps. Compatible systems (e.g. minimum-norm solves).
    consistent,
};

struct LsqrOptions {
    double tolerance = 1e-9;
    std::size_t max_iterations = 300;
    // ||K|| for the criterion denominator; estimated with 30 seeded power
    // iterations when absent.
    std::optional<double> operator_norm_estimate;
    LsqrStop stop = LsqrStop::normal_equations;
    std::uint64_t norm_seed = 0;
    bool record_history = false;
};

struct LsqrResult {
    Vec solution;
    // K x - d, recomputed from `solution`.
    Vec residual;
    std::size_t iterations_used = 0;
    double final_criterion_value = 0.0;
    bool converged = false;
    double operator_norm = 0.0;
    // Recurrence estimate of ||r^(i)|| after each iteration (when requested).
    std::vector<double> residual_history;
};

LsqrResult lsqr_solve(const LinOp& k, std::span<const double> d, const LsqrOptions& opts = {});

// The stopping ratio of `opts.stop` evaluated explicitly at x.
double lsqr_criterion(const LinOp& k, std::span<const double> d, std::span<const double> x,
                      double operator_norm, LsqrStop stop);

}  // namespace rvarpro
