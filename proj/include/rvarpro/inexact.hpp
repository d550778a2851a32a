#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "rvarpro/varpro.hpp"

namespace rvarpro {

// Inner tolerance rules: S fixed small (1e-9), AB halving, LB harmonic, B fixed eps0.
enum class ScheduleKind { s, ab, lb, b };

struct ToleranceSchedule {
    ScheduleKind kind = ScheduleKind::ab;
    double eps0 = 1e-3;
};

double schedule_epsilon(const ToleranceSchedule& sched, std::size_t k);
std::string to_string(ScheduleKind kind);
// Accepts s, ab, lb, b (case-insensitive); throws ArgumentError otherwise.
ScheduleKind parse_schedule(const std::string& name);

struct InexactEval {
    Vec y;
    Vec x_bar;
    Vec g;  // K x_bar - d
    double phi = 0.0;
    Vec grad;
    DenseMat J_bar;
    DenseMat H_bar;
    double eps_used = 0.0;
    // LSQR iterations of the primary solve for x_bar.
    std::size_t inner_iterations = 0;
    // LSQR iterations spent on the projections inside the Jacobian.
    std::size_t projection_iterations = 0;
    bool converged = false;
    bool cap_hit = false;
    double criterion_value = 0.0;
    double operator_norm = 0.0;
    std::optional<double> condition_number;
    // eps * kappa >= 1/2: the error bound hypothesis does not hold.
    bool theory_warning = false;

    std::size_t total_iterations() const { return inner_iterations + projection_iterations; }
};

InexactEval inexact_evaluate(const TikhonovProblem& prob, const ParamRegularizer& reg,
                             std::span<const double> y, double eps, std::size_t lsqr_cap = 300);

// Algorithm 2: quasi-Newton steps from LSQR-approximated residual and Jacobian,
// with eps^(k) from `sched`.
SolverTrace irgenvarpro(const TikhonovProblem& prob, const ParamRegularizer& reg,
                        std::span<const double> y0, const ToleranceSchedule& sched,
                        const SolverConfig& cfg, std::size_t lsqr_cap = 300,
                        const std::optional<Truth>& truth = std::nullopt);

}  // namespace rvarpro
