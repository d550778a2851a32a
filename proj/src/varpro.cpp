#include "rvarpro/varpro.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include <lapacke.h>

#include "outer_loop.hpp"
#include "rvarpro/errors.hpp"
#include "rvarpro/fft.hpp"
#include "rvarpro/kernels.hpp"

namespace rvarpro {

// ---------------------------------------------------------------------------
// TikhonovProblem
// ---------------------------------------------------------------------------

void TikhonovProblem::validate() const {
    if (!family) throw ArgumentError("TikhonovProblem: operator family is missing");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ArgumentError("TikhonovProblem: lambda must be positive and finite");
    }
    if (b.size() != family->rows()) throw ArgumentError("TikhonovProblem: b length does not match A rows");
    if (L.cols() != family->cols()) throw ArgumentError("TikhonovProblem: L columns do not match A columns");
    if (!all_finite(b)) throw ArgumentError("TikhonovProblem: b has non-finite entries");
}

Vec TikhonovProblem::stacked_apply(std::span<const double> y, std::span<const double> x) const {
    Vec top = family->apply(y, x);
    Vec bottom = L.apply(x);
    scale(lambda, bottom);
    return concat(top, bottom);
}

Vec TikhonovProblem::stacked_apply_transpose(std::span<const double> y,
                                             std::span<const double> v) const {
    const std::size_t m = family->rows();
    if (v.size() != m + L.rows()) throw ArgumentError("stacked_apply_transpose: wrong length");
    Vec out = family->apply_transpose(y, v.subspan(0, m));
    axpy(lambda, L.apply_transpose(v.subspan(m)), out);
    return out;
}

LinOp TikhonovProblem::stacked(std::span<const double> y) const {
    Vec yy(y.begin(), y.end());
    return {stacked_rows(), unknowns(),
            [this, yy](std::span<const double> x) { return stacked_apply(yy, x); },
            [this, yy](std::span<const double> v) { return stacked_apply_transpose(yy, v); }};
}

Vec TikhonovProblem::stacked_rhs() const {
    Vec d(stacked_rows(), 0.0);
    std::copy(b.begin(), b.end(), d.begin());
    return d;
}

// ---------------------------------------------------------------------------
// NormalSolver
// ---------------------------------------------------------------------------

namespace {

fft::CVec forward(const DftGeometry& g, std::span<const double> x) {
    const auto c = fft::to_complex(x);
    return g.dims == 1 ? fft::forward_1d(c) : fft::forward_2d(g.n, c);
}

Vec inverse_real(const DftGeometry& g, std::span<const cplx> s) {
    return fft::real_part_checked(g.dims == 1 ? fft::inverse_1d(s) : fft::inverse_2d(g.n, s));
}

// Extreme eigenvalues of a symmetric matrix (LAPACK dsyev, eigenvalues only).
std::pair<double, double> symmetric_extreme_eigenvalues(const DenseMat& m) {
    const auto n = static_cast<lapack_int>(m.rows());
    Vec a(m.data().begin(), m.data().end());
    Vec w(m.rows());
    const lapack_int info = LAPACKE_dsyev(LAPACK_ROW_MAJOR, 'N', 'U', n, a.data(), n, w.data());
    if (info != 0) throw NumericError("dsyev failed with info = " + std::to_string(info));
    return {w.front(), w.back()};
}

}  // namespace

NormalSolver::NormalSolver(const TikhonovProblem& prob, std::span<const double> y)
    : prob_(&prob), y_(y.begin(), y.end()) {
    prob.validate();
    prob.family->check_domain(y);

    std::optional<DftSymbols> sym;
    std::optional<std::vector<cplx>> lsym;
    if (prob.backend != InnerBackend::dense) {
        sym = prob.family->dft_symbols(y);
        if (sym) lsym = prob.L.dft_symbols(sym->geometry);
    }
    if (sym && lsym) {
        spectral_ = true;
        geometry_ = sym->geometry;
        denominator_.resize(geometry_.size());
        kernels::omp::tikhonov_denominator(sym->eigenvalues, *lsym, prob.lambda, denominator_);
        const double floor = static_cast<double>(denominator_.size()) *
                             std::numeric_limits<double>::epsilon() * norm_inf(denominator_);
        for (std::size_t k = 0; k < denominator_.size(); ++k) {
            if (!(denominator_[k] > floor)) {
                throw ModelError("inner solve: A(y) and L share a null-space direction (DFT mode " +
                                 std::to_string(k) + ")");
            }
        }
        return;
    }
    if (prob.backend == InnerBackend::spectral) {
        throw ModelError("inner solve: spectral backend requested but A(y) and L are not jointly DFT-diagonal");
    }
    const std::size_t n = prob.unknowns();
    if (n > kDenseLimit) {
        throw ModelError("inner solve: " + std::to_string(n) +
                         " unknowns exceed the dense backend limit and no spectral backend applies");
    }
    const DenseMat a = DenseMat::from_columns(
        prob.family->rows(), n, [&](std::span<const double> e) { return prob.family->apply(y, e); });
    const DenseMat l = prob.L.dense();
    normal_ = add(a.gram(), scaled(prob.lambda * prob.lambda, l.gram())).symmetrized();
    try {
        chol_.emplace(normal_);
    } catch (const SingularityError& e) {
        throw ModelError("inner solve: A^T A + lambda^2 L^T L is not positive definite (pivot " +
                         std::to_string(e.pivot()) + "); N(A(y)) and N(L) intersect");
    }
}

Vec NormalSolver::solve(std::span<const double> w) const {
    if (w.size() != prob_->unknowns()) throw ArgumentError("NormalSolver::solve: wrong length");
    if (!spectral_) return chol_->solve(w);
    fft::CVec s = forward(geometry_, w);
    kernels::omp::spectral_divide(s, denominator_);
    return inverse_real(geometry_, s);
}

Vec NormalSolver::solve_x() const { return solve(prob_->family->apply_transpose(y_, prob_->b)); }

Vec NormalSolver::pinv(std::span<const double> v) const {
    return solve(prob_->stacked_apply_transpose(y_, v));
}

Vec NormalSolver::pinv_transpose(std::span<const double> w) const {
    return prob_->stacked_apply(y_, solve(w));
}

double NormalSolver::condition_number() const {
    if (spectral_) {
        const auto [lo, hi] = std::minmax_element(denominator_.begin(), denominator_.end());
        return std::sqrt(*hi / *lo);
    }
    const auto [lo, hi] = symmetric_extreme_eigenvalues(normal_);
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

// ---------------------------------------------------------------------------
// Reduced functional pieces
// ---------------------------------------------------------------------------

void check_parameter_domain(const TikhonovProblem& prob, const ParamRegularizer& reg,
                            std::span<const double> y) {
    prob.family->check_domain(y);
    reg_check(reg, y);
}

DenseMat jacobian_from_projections(const TikhonovProblem& prob, std::span<const double> y,
                                   std::span<const double> x, const ProjectionOps& ops) {
    const std::size_t r = prob.family->param_dim();
    const std::size_t rows = prob.stacked_rows();
    const Vec data_residual = subtract(prob.b, prob.family->apply(y, x));  // b - A x
    DenseMat j(rows, r);
    std::vector<std::exception_ptr> errors(r);

#pragma omp parallel for schedule(static) if (r > 1)
    for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(r); ++jj) {
        const auto col = static_cast<std::size_t>(jj);
        try {
            Vec v(rows, 0.0);
            const Vec dax = prob.family->apply_dparam(y, col, x);
            std::copy(dax.begin(), dax.end(), v.begin());
            // P_perp v = v - K K^dagger v
            const Vec kkv = prob.stacked_apply(y, ops.pinv(v));
            Vec column = subtract(v, kkv);
            const Vec w = prob.family->apply_dparam_transpose(y, col, data_residual);
            axpy(1.0, ops.pinv_transpose(w), column);
            j.set_column(col, column);
        } catch (...) {
            errors[col] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return j;
}

Vec solve_x(const TikhonovProblem& prob, std::span<const double> y) {
    return NormalSolver(prob, y).solve_x();
}

Vec residual_f(const TikhonovProblem& prob, std::span<const double> y, std::span<const double> x) {
    Vec f = prob.stacked_apply(y, x);
    axpy(-1.0, prob.b, std::span<double>(f).subspan(0, prob.data_rows()));
    return f;
}

namespace {

ProjectionOps exact_projections(const NormalSolver& ns) {
    return {[&ns](std::span<const double> v) { return ns.pinv(v); },
            [&ns](std::span<const double> w) { return ns.pinv_transpose(w); }};
}

}  // namespace

DenseMat jacobian_f(const TikhonovProblem& prob, std::span<const double> y, std::span<const double> x) {
    const NormalSolver ns(prob, y);
    return jacobian_from_projections(prob, y, x, exact_projections(ns));
}

ReducedEval evaluate_reduced(const TikhonovProblem& prob, const ParamRegularizer& reg,
                             std::span<const double> y) {
    check_parameter_domain(prob, reg, y);
    const NormalSolver ns(prob, y);
    ReducedEval ev;
    ev.y.assign(y.begin(), y.end());
    ev.x = ns.solve_x();
    ev.f = residual_f(prob, y, ev.x);
    ev.J = jacobian_from_projections(prob, y, ev.x, exact_projections(ns));
    const double fn = norm2(ev.f);
    ev.phi = 0.5 * fn * fn + reg_value(reg, y);
    ev.grad = add(ev.J.multiply_transpose(ev.f), reg_gradient(reg, y));
    ev.H = add(ev.J.gram(), reg_hessian(reg, y)).symmetrized();
    return ev;
}

double reduced_phi(const TikhonovProblem& prob, const ParamRegularizer& reg, std::span<const double> y) {
    check_parameter_domain(prob, reg, y);
    const Vec x = solve_x(prob, y);
    const double fn = norm2(residual_f(prob, y, x));
    return 0.5 * fn * fn + reg_value(reg, y);
}

double relative_error(std::span<const double> x, std::span<const double> reference) {
    const double denom = norm2(reference);
    if (denom == 0.0) throw ArgumentError("relative_error: reference has zero norm");
    return norm2(subtract(x, reference)) / denom;
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::step_tolerance: return "step_tolerance";
        case StopReason::gradient_tolerance: return "gradient_tolerance";
        case StopReason::max_iterations: return "max_iterations";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

namespace detail {

SolverTrace run_outer_loop(const TikhonovProblem& prob, const ParamRegularizer& reg,
                           std::span<const double> y0, const SolverConfig& cfg,
                           const std::optional<Truth>& truth, const OuterEvalFn& evaluate) {
    if (cfg.max_outer_iterations == 0) throw ArgumentError("SolverConfig: max_outer_iterations must be >= 1");
    if (!(cfg.step_tolerance >= 0.0) || !(cfg.gradient_tolerance >= 0.0)) {
        throw ArgumentError("SolverConfig: tolerances must be nonnegative");
    }
    if (y0.size() != prob.family->param_dim()) throw ArgumentError("initial guess has the wrong dimension");
    const bool positive = prob.family->requires_positive_parameters() || reg_requires_positive(reg);

    SolverTrace trace;
    Vec y(y0.begin(), y0.end());
    std::size_t cumulative = 0;
    std::optional<StopReason> pending;

    for (std::size_t k = 0;; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        OuterEval ev;
        try {
            ev = evaluate(k, y);
        } catch (const DomainError& e) {
            throw DomainError("iteration " + std::to_string(k) + ": " + e.what());
        } catch (const ModelError& e) {
            throw SolverError(e.what(), k);
        }

        IterationRecord rec;
        rec.k = k;
        rec.y = y;
        rec.phi = ev.phi;
        rec.grad_norm = norm2(ev.grad);
        rec.eps = ev.eps;
        rec.inner_iterations = ev.inner_iterations;
        cumulative += ev.inner_iterations;
        rec.cumulative_inner_iterations = cumulative;
        rec.inner_cap_hit = ev.inner_cap_hit;
        rec.theory_warning = ev.theory_warning;
        if (truth) {
            rec.rre_x = relative_error(ev.x, truth->x);
            rec.rre_y = relative_error(y, truth->y);
        }
        trace.final_x = ev.x;
        trace.final_y = y;

        auto finish = [&](StopReason why) {
            rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            trace.records.push_back(std::move(rec));
            trace.stop = why;
        };
        if (pending) {
            finish(*pending);
            break;
        }
        if (rec.grad_norm <= cfg.gradient_tolerance) {
            finish(StopReason::gradient_tolerance);
            break;
        }
        if (k == cfg.max_outer_iterations) {
            finish(StopReason::max_iterations);
            break;
        }

        Vec step;
        try {
            step = solve_spd(ev.H, scaled(-1.0, ev.grad));
        } catch (const SingularityError& e) {
            std::string msg = "singular approximate Hessian (pivot " + std::to_string(e.pivot()) + ")";
            if (ev.eps > 0.0) msg += " at eps = " + std::to_string(ev.eps);
            throw SolverError(msg, k);
        }
        if (!all_finite(step)) throw SolverError("non-finite quasi-Newton step", k);
        if (positive) {
            const double alpha = fraction_to_boundary(y, step);
            if (alpha < 1.0) {
                scale(alpha, step);
                rec.damped = true;
            }
        }
        rec.step_norm = norm2(step);
        const double threshold = cfg.step_tolerance * std::max(1.0, norm2(y));
        axpy(1.0, step, y);
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (rec.step_norm <= threshold) pending = StopReason::step_tolerance;
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

}  // namespace detail

SolverTrace rgenvarpro(const TikhonovProblem& prob, const ParamRegularizer& reg,
                       std::span<const double> y0, const SolverConfig& cfg,
                       const std::optional<Truth>& truth) {
    prob.validate();
    check_parameter_domain(prob, reg, y0);
    return detail::run_outer_loop(prob, reg, y0, cfg, truth,
                                  [&](std::size_t, std::span<const double> y) {
                                      ReducedEval ev = evaluate_reduced(prob, reg, y);
                                      detail::OuterEval out;
                                      out.phi = ev.phi;
                                      out.grad = std::move(ev.grad);
                                      out.H = std::move(ev.H);
                                      out.x = std::move(ev.x);
                                      return out;
                                  });
}

}  // namespace rvarpro
