#include "rvarpro/regularizers.hpp"

#include <algorithm>
#include <cmath>

#include "rvarpro/errors.hpp"

namespace rvarpro {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

std::string reg_name(const ParamRegularizer& reg) {
    return std::visit(overloaded{[](const NoRegularizer&) { return std::string("none"); },
                                 [](const QuadraticRegularizer&) { return std::string("quadratic"); },
                                 [](const LogBarrierRegularizer&) { return std::string("logbarrier"); }},
                      reg);
}

bool reg_requires_positive(const ParamRegularizer& reg) {
    return std::holds_alternative<LogBarrierRegularizer>(reg);
}

void reg_check(const ParamRegularizer& reg, std::span<const double> y) {
    if (!all_finite(y)) throw DomainError("regularizer: non-finite parameter");
    std::visit(overloaded{
                   [](const NoRegularizer&) {},
                   [&](const QuadraticRegularizer& q) {
                       if (!(q.mu >= 0.0)) throw ArgumentError("quadratic regularizer: mu must be >= 0");
                       if (q.anchor.size() != y.size()) {
                           throw ArgumentError("quadratic regularizer: anchor length does not match y");
                       }
                   },
                   [&](const LogBarrierRegularizer& l) {
                       if (l.mu.size() != y.size()) {
                           throw ArgumentError("log-barrier regularizer: mu length does not match y");
                       }
                       for (double m : l.mu)
                           if (!(m > 0.0)) throw ArgumentError("log-barrier regularizer: mu_j must be > 0");
                       for (std::size_t j = 0; j < y.size(); ++j) {
                           if (!(y[j] > 0.0)) {
                               throw DomainError("log-barrier regularizer: y_" + std::to_string(j) +
                                                 " = " + std::to_string(y[j]) + " is not positive");
                           }
                       }
                   }},
               reg);
}

double reg_value(const ParamRegularizer& reg, std::span<const double> y) {
    reg_check(reg, y);
    return std::visit(overloaded{[](const NoRegularizer&) { return 0.0; },
                                 [&](const QuadraticRegularizer& q) {
                                     const double r = norm2(subtract(y, q.anchor));
                                     return 0.5 * q.mu * q.mu * r * r;
                                 },
                                 [&](const LogBarrierRegularizer& l) {
                                     double s = 0.0;
                                     for (std::size_t j = 0; j < y.size(); ++j)
                                         s -= l.mu[j] * l.mu[j] * std::log(y[j]);
                                     return s;
                                 }},
                      reg);
}

Vec reg_gradient(const ParamRegularizer& reg, std::span<const double> y) {
    reg_check(reg, y);
    return std::visit(overloaded{[&](const NoRegularizer&) { return Vec(y.size(), 0.0); },
                                 [&](const QuadraticRegularizer& q) {
                                     return scaled(q.mu * q.mu, subtract(y, q.anchor));
                                 },
                                 [&](const LogBarrierRegularizer& l) {
                                     Vec g(y.size());
                                     for (std::size_t j = 0; j < y.size(); ++j)
                                         g[j] = -l.mu[j] * l.mu[j] / y[j];
                                     return g;
                                 }},
                      reg);
}

DenseMat reg_hessian(const ParamRegularizer& reg, std::span<const double> y) {
    reg_check(reg, y);
    const std::size_t r = y.size();
    return std::visit(overloaded{[&](const NoRegularizer&) { return DenseMat(r, r); },
                                 [&](const QuadraticRegularizer& q) {
                                     return scaled(q.mu * q.mu, DenseMat::identity(r));
                                 },
                                 [&](const LogBarrierRegularizer& l) {
                                     Vec d(r);
                                     for (std::size_t j = 0; j < r; ++j) {
                                         const double t = l.mu[j] / y[j];
                                         d[j] = t * t;
                                     }
                                     return DenseMat::diagonal(d);
                                 }},
                      reg);
}

RegStack reg_stack(const ParamRegularizer& reg, std::span<const double> y) {
    reg_check(reg, y);
    const std::size_t r = y.size();
    return std::visit(overloaded{[&](const NoRegularizer&) { return RegStack{}; },
                                 [&](const QuadraticRegularizer& q) {
                                     return RegStack{scaled(q.mu, subtract(y, q.anchor)),
                                                     scaled(q.mu, DenseMat::identity(r))};
                                 },
                                 [&](const LogBarrierRegularizer& l) {
                                     Vec d(r);
                                     for (std::size_t j = 0; j < r; ++j) d[j] = -l.mu[j] / y[j];
                                     return RegStack{l.mu, DenseMat::diagonal(d)};
                                 }},
                      reg);
}

double fraction_to_boundary(std::span<const double> y, std::span<const double> step, double keep) {
    if (y.size() != step.size()) throw ArgumentError("fraction_to_boundary: size mismatch");
    if (!(keep >= 0.0 && keep < 1.0)) throw ArgumentError("fraction_to_boundary: keep must be in [0,1)");
    bool feasible = true;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (!(y[j] > 0.0)) throw DomainError("fraction_to_boundary: current iterate is not positive");
        if (!(y[j] + step[j] > 0.0)) feasible = false;
    }
    if (feasible) return 1.0;
    double alpha = 1.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (step[j] < 0.0) alpha = std::min(alpha, (1.0 - keep) * y[j] / -step[j]);
    }
    return alpha;
}

}  // namespace rvarpro
