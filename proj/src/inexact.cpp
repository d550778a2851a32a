#include "rvarpro/inexact.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>

#include "outer_loop.hpp"
#include "rvarpro/errors.hpp"

namespace rvarpro {

double schedule_epsilon(const ToleranceSchedule& sched, std::size_t k) {
    if (!(sched.eps0 > 0.0)) throw ArgumentError("tolerance schedule: eps0 must be positive");
    switch (sched.kind) {
        case ScheduleKind::s: return 1e-9;
        case ScheduleKind::ab: return std::ldexp(sched.eps0, -static_cast<int>(std::min<std::size_t>(k, 1000)));
        case ScheduleKind::lb: return k == 0 ? sched.eps0 : sched.eps0 / static_cast<double>(k);
        case ScheduleKind::b: return sched.eps0;
    }
    return sched.eps0;
}

std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::s: return "s";
        case ScheduleKind::ab: return "ab";
        case ScheduleKind::lb: return "lb";
        case ScheduleKind::b: return "b";
    }
    return "?";
}

ScheduleKind parse_schedule(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "s") return ScheduleKind::s;
    if (s == "ab") return ScheduleKind::ab;
    if (s == "lb") return ScheduleKind::lb;
    if (s == "b") return ScheduleKind::b;
    throw ArgumentError("unknown tolerance schedule '" + name + "' (expected s, ab, lb or b)");
}

InexactEval inexact_evaluate(const TikhonovProblem& prob, const ParamRegularizer& reg,
                             std::span<const double> y, double eps, std::size_t lsqr_cap) {
    if (!(eps > 0.0)) throw ArgumentError("inexact_evaluate: eps must be positive");
    if (lsqr_cap == 0) throw ArgumentError("inexact_evaluate: lsqr_cap must be >= 1");
    prob.validate();
    check_parameter_domain(prob, reg, y);

    InexactEval ev;
    ev.y.assign(y.begin(), y.end());
    ev.eps_used = eps;

    const LinOp k = prob.stacked(y);
    const LinOp kt = k.transposed();
    const Vec d = prob.stacked_rhs();
    ev.operator_norm = estimate_op_norm(k, 30, 0);

    try {
        ev.condition_number = NormalSolver(prob, y).condition_number();
    } catch (const ModelError&) {
        // Too large for a dense estimate: no hypothesis check.
    }
    if (ev.condition_number) ev.theory_warning = eps * *ev.condition_number >= 0.5;

    LsqrOptions opts;
    opts.tolerance = eps;
    opts.max_iterations = lsqr_cap;
    opts.operator_norm_estimate = ev.operator_norm;

    const LsqrResult primary = lsqr_solve(k, d, opts);
    ev.x_bar = primary.solution;
    ev.g = primary.residual;
    ev.inner_iterations = primary.iterations_used;
    ev.converged = primary.converged;
    ev.criterion_value = primary.final_criterion_value;

    std::atomic<std::size_t> proj_iters{0};
    std::atomic<bool> proj_cap{false};
    LsqrOptions tr_opts = opts;
    tr_opts.stop = LsqrStop::consistent;
    const ProjectionOps ops{
        [&](std::span<const double> v) {
            LsqrResult r = lsqr_solve(k, v, opts);
            proj_iters += r.iterations_used;
            if (!r.converged) proj_cap = true;
            return std::move(r.solution);
        },
        // Minimum-norm solution of K^T u = w, which is (K^dagger)^T w.
        [&](std::span<const double> w) {
            LsqrResult r = lsqr_solve(kt, w, tr_opts);
            proj_iters += r.iterations_used;
            if (!r.converged) proj_cap = true;
            return std::move(r.solution);
        }};
    ev.J_bar = jacobian_from_projections(prob, y, ev.x_bar, ops);
    ev.projection_iterations = proj_iters.load();
    ev.cap_hit = !primary.converged || proj_cap.load();

    const double gn = norm2(ev.g);
    ev.phi = 0.5 * gn * gn + reg_value(reg, y);
    ev.grad = add(ev.J_bar.multiply_transpose(ev.g), reg_gradient(reg, y));
    ev.H_bar = add(ev.J_bar.gram(), reg_hessian(reg, y)).symmetrized();
    return ev;
}

SolverTrace irgenvarpro(const TikhonovProblem& prob, const ParamRegularizer& reg,
                        std::span<const double> y0, const ToleranceSchedule& sched,
                        const SolverConfig& cfg, std::size_t lsqr_cap,
                        const std::optional<Truth>& truth) {
    prob.validate();
    check_parameter_domain(prob, reg, y0);
    return detail::run_outer_loop(prob, reg, y0, cfg, truth,
                                  [&](std::size_t k, std::span<const double> y) {
                                      const double eps = schedule_epsilon(sched, k);
                                      InexactEval ev = inexact_evaluate(prob, reg, y, eps, lsqr_cap);
                                      detail::OuterEval out;
                                      out.phi = ev.phi;
                                      out.grad = std::move(ev.grad);
                                      out.H = std::move(ev.H_bar);
                                      out.x = std::move(ev.x_bar);
                                      out.eps = eps;
                                      out.inner_iterations = ev.total_iterations();
                                      out.inner_cap_hit = ev.cap_hit;
                                      out.theory_warning = ev.theory_warning;
                                      return out;
                                  });
}

}  // namespace rvarpro
