// LSQR (Paige & Saunders) from a zero start, stopped on a relative residual
// criterion. The bidiagonalization recurrences give cheap estimates of ||r||
// and ||K^T r||; convergence is only declared after the criterion has been
// recomputed explicitly from the iterate, so the stored value is exact.

#include <cmath>
#include <limits>

#include "rvarpro/errors.hpp"
#include "rvarpro/linalg.hpp"

namespace rvarpro {

namespace {

struct Explicit {
    Vec residual;
    double criterion = 0.0;
};

Explicit explicit_check(const LinOp& k, std::span<const double> d, std::span<const double> x,
                        double knorm, LsqrStop stop) {
    Explicit e;
    e.residual = subtract(k.apply(x), d);
    const double rn = norm2(e.residual);
    if (stop == LsqrStop::consistent) {
        const double dn = norm2(d);
        e.criterion = dn == 0.0 ? 0.0 : rn / dn;
        return e;
    }
    // r = 0 up to the rounding error of forming K x - d: the system is
    // consistent and the ratio below would only compare rounding noise.
    constexpr double u = std::numeric_limits<double>::epsilon();
    if (rn <= 64.0 * u * (norm2(d) + knorm * norm2(x))) return e;
    const double ktr = norm2(k.apply_transpose(e.residual));
    if (ktr == 0.0) return e;
    e.criterion = ktr / (rn * knorm);
    return e;
}

}  // namespace

double lsqr_criterion(const LinOp& k, std::span<const double> d, std::span<const double> x,
                      double operator_norm, LsqrStop stop) {
    return explicit_check(k, d, x, operator_norm, stop).criterion;
}

LsqrResult lsqr_solve(const LinOp& k, std::span<const double> d, const LsqrOptions& opts) {
    if (!(opts.tolerance > 0.0)) throw ArgumentError("lsqr_solve: tolerance must be positive");
    if (opts.max_iterations == 0) throw ArgumentError("lsqr_solve: max_iterations must be >= 1");
    if (d.size() != k.rows) throw ArgumentError("lsqr_solve: rhs length does not match operator rows");

    LsqrResult res;
    res.solution.assign(k.cols, 0.0);
    const double eps = opts.tolerance;

    const double beta0 = norm2(d);
    if (beta0 == 0.0) {
        res.residual.assign(k.rows, 0.0);
        res.converged = true;
        return res;
    }

    double knorm = opts.operator_norm_estimate.value_or(0.0);
    if (!opts.operator_norm_estimate) knorm = estimate_op_norm(k, 30, opts.norm_seed);
    if (!(knorm > 0.0)) knorm = 1.0;  // zero operator: K^T r = 0 makes the ratio 0 anyway
    res.operator_norm = knorm;

    Vec& x = res.solution;
    Vec u = scaled(1.0 / beta0, d);
    Vec v = k.apply_transpose(u);
    double alpha = norm2(v);
    if (alpha > 0.0) scale(1.0 / alpha, v);
    Vec w = v;
    double phibar = beta0;
    double rhobar = alpha;

    auto finish = [&](bool force) {
        Explicit e = explicit_check(k, d, x, knorm, opts.stop);
        const bool ok = e.criterion < eps;
        if (ok || force) {
            res.residual = std::move(e.residual);
            res.final_criterion_value = e.criterion;
            res.converged = ok;
            return true;
        }
        return false;
    };

    // K^T d = 0: x = 0 already solves the least-squares problem.
    if (alpha == 0.0 && finish(false)) return res;

    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        Vec kv = k.apply(v);
        axpy(-alpha, u, kv);
        u = std::move(kv);
        const double beta = norm2(u);
        if (beta > 0.0) scale(1.0 / beta, u);

        Vec ktu = k.apply_transpose(u);
        axpy(-beta, v, ktu);
        v = std::move(ktu);
        alpha = norm2(v);
        if (alpha > 0.0) scale(1.0 / alpha, v);

        const double rho = std::hypot(rhobar, beta);
        const double c = rhobar / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rhobar = -c * alpha;
        const double phi = c * phibar;
        phibar = s * phibar;

        axpy(phi / rho, w, x);
        Vec wn = v;
        axpy(-theta / rho, w, wn);
        w = std::move(wn);

        res.iterations_used = it;
        if (opts.record_history) res.residual_history.push_back(phibar);

        double estimate = 0.0;
        if (opts.stop == LsqrStop::consistent) {
            estimate = phibar / beta0;
        } else if (phibar > 64.0 * std::numeric_limits<double>::epsilon() * (beta0 + knorm * norm2(x))) {
            estimate = alpha * std::abs(c) / knorm;
        }
        const bool breakdown = alpha == 0.0 || beta == 0.0;
        if ((estimate < eps || breakdown) && finish(breakdown)) return res;
    }
    finish(true);
    return res;
}

}  // namespace rvarpro
