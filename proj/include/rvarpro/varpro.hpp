#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rvarpro/linalg.hpp"
#include "rvarpro/operators.hpp"
#include "rvarpro/regularizers.hpp"

namespace rvarpro {

// How the exact inner Tikhonov problem is solved.
enum class InnerBackend {
    automatic,  // spectral when A(y) and L share a DFT basis, dense otherwise
    dense,      // Cholesky of A^T A + lambda^2 L^T L
    spectral,   // pointwise filter in the DFT basis
};

// min_x 1/2 ||A(y) x - b||^2 + lambda^2/2 ||L x||^2, i.e. 1/2 ||K(y) x - d||^2
// with K(y) = [A(y); lambda L] and d = [b; 0].
struct TikhonovProblem {
    std::shared_ptr<const OperatorFamily> family;
    RegOperator L;
    double lambda = 1.0;
    Vec b;
    InnerBackend backend = InnerBackend::automatic;

    void validate() const;
    std::size_t data_rows() const { return family->rows(); }
    std::size_t stacked_rows() const { return family->rows() + L.rows(); }
    std::size_t unknowns() const { return family->cols(); }

    LinOp stacked(std::span<const double> y) const;
    Vec stacked_rhs() const;
    // K(y) x
    Vec stacked_apply(std::span<const double> y, std::span<const double> x) const;
    // K(y)^T v
    Vec stacked_apply_transpose(std::span<const double> y, std::span<const double> v) const;
};

// Exact solver for (A^T A + lambda^2 L^T L) z = w at a fixed y.
class NormalSolver {
public:
    // Largest unknown count for which the dense backend is assembled.
    static constexpr std::size_t kDenseLimit = 2048;

    NormalSolver(const TikhonovProblem& prob, std::span<const double> y);

    bool is_spectral() const noexcept { return spectral_; }
    Vec solve(std::span<const double> w) const;
    // Tikhonov minimizer x(y).
    Vec solve_x() const;
    // K^dagger v
    Vec pinv(std::span<const double> v) const;
    // (K^dagger)^T w = K (K^T K)^{-1} w
    Vec pinv_transpose(std::span<const double> w) const;
    // 2-norm condition number of K(y).
    double condition_number() const;

private:
    const TikhonovProblem* prob_;
    Vec y_;
    bool spectral_ = false;
    DftGeometry geometry_;
    Vec denominator_;
    std::optional<Cholesky> chol_;
    DenseMat normal_;
};

// The two projection actions that appear in the Jacobian columns.
struct ProjectionOps {
    std::function<Vec(std::span<const double>)> pinv;            // K^dagger v
    std::function<Vec(std::span<const double>)> pinv_transpose;  // (K^dagger)^T w
};

// Column j = P_perp [dA_j x; 0] + (K^dagger)^T dA_j^T (b - A x), with
// P_perp v = v - K K^dagger v. Shared by the exact and inexact solvers.
DenseMat jacobian_from_projections(const TikhonovProblem& prob, std::span<const double> y,
                                   std::span<const double> x, const ProjectionOps& ops);

Vec solve_x(const TikhonovProblem& prob, std::span<const double> y);
// K(y) x - d
Vec residual_f(const TikhonovProblem& prob, std::span<const double> y, std::span<const double> x);
DenseMat jacobian_f(const TikhonovProblem& prob, std::span<const double> y, std::span<const double> x);

struct ReducedEval {
    Vec y;
    Vec x;
    Vec f;
    double phi = 0.0;
    Vec grad;
    DenseMat J;
    DenseMat H;
};

ReducedEval evaluate_reduced(const TikhonovProblem& prob, const ParamRegularizer& reg,
                             std::span<const double> y);
// phi(y) alone, without the Jacobian.
double reduced_phi(const TikhonovProblem& prob, const ParamRegularizer& reg,
                   std::span<const double> y);

// Throws DomainError if y is outside the family or regularizer domain.
void check_parameter_domain(const TikhonovProblem& prob, const ParamRegularizer& reg,
                            std::span<const double> y);

struct SolverConfig {
    std::size_t max_outer_iterations = 30;
    // Stop when ||s|| <= step_tolerance * max(1, ||y||).
    double step_tolerance = 1e-8;
    // Stop when ||grad phi|| <= gradient_tolerance.
    double gradient_tolerance = 1e-10;
};

struct Truth {
    Vec x;
    Vec y;
};

struct IterationRecord {
    std::size_t k = 0;
    Vec y;
    double phi = 0.0;
    double grad_norm = 0.0;
    // Norm of the step taken from this iterate (0 on the last record).
    double step_norm = 0.0;
    double eps = 0.0;
    std::size_t inner_iterations = 0;
    std::size_t cumulative_inner_iterations = 0;
    double wall_ms = 0.0;
    std::optional<double> rre_x;
    std::optional<double> rre_y;
    bool damped = false;
    bool inner_cap_hit = false;
    bool theory_warning = false;
};

enum class StopReason { step_tolerance, gradient_tolerance, max_iterations };
std::string to_string(StopReason reason);

struct SolverTrace {
    std::vector<IterationRecord> records;
    Vec final_x;
    Vec final_y;
    StopReason stop = StopReason::max_iterations;
};

// Algorithm 1: y <- y - H^{-1}(J^T f + grad R) with exact inner solves.
SolverTrace rgenvarpro(const TikhonovProblem& prob, const ParamRegularizer& reg,
                       std::span<const double> y0, const SolverConfig& cfg,
                       const std::optional<Truth>& truth = std::nullopt);

double relative_error(std::span<const double> x, std::span<const double> reference);

}  // namespace rvarpro
