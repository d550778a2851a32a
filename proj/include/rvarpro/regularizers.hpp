#pragma once

#include <span>
#include <string>
#include <variant>

#include "rvarpro/linalg.hpp"

namespace rvarpro {

struct NoRegularizer {};

// R(y) = mu^2/2 ||y - anchor||^2
struct QuadraticRegularizer {
    double mu = 0.0;
    Vec anchor;
};

// R(y) = -sum_j mu_j^2 log(y_j), defined for y > 0
struct LogBarrierRegularizer {
    Vec mu;
};

using ParamRegularizer = std::variant<NoRegularizer, QuadraticRegularizer, LogBarrierRegularizer>;

// Extra rows appended to the Gauss-Newton system: [f; extra_residual] with
// Jacobian [J; extra_jacobian].
struct RegStack {
    Vec extra_residual;
    DenseMat extra_jacobian;
};

std::string reg_name(const ParamRegularizer& reg);
bool reg_requires_positive(const ParamRegularizer& reg);
// Throws ArgumentError on malformed settings or size mismatch, DomainError
// when y lies outside the regularizer's domain.
void reg_check(const ParamRegularizer& reg, std::span<const double> y);

double reg_value(const ParamRegularizer& reg, std::span<const double> y);
Vec reg_gradient(const ParamRegularizer& reg, std::span<const double> y);
DenseMat reg_hessian(const ParamRegularizer& reg, std::span<const double> y);
RegStack reg_stack(const ParamRegularizer& reg, std::span<const double> y);

// Largest alpha in (0,1] keeping y + alpha*step >= keep * y componentwise, or
// 1 when the full step already stays strictly positive. Requires y > 0.
double fraction_to_boundary(std::span<const double> y, std::span<const double> step,
                            double keep = 0.05);

}  // namespace rvarpro
