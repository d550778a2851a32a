#pragma once

// Outer quasi-Newton loop shared by the exact and inexact solvers.

#include <functional>
#include <optional>
#include <span>

#include "rvarpro/varpro.hpp"

namespace rvarpro::detail {

struct OuterEval {
    double phi = 0.0;
    Vec grad;
    DenseMat H;
    Vec x;
    double eps = 0.0;
    std::size_t inner_iterations = 0;
    bool inner_cap_hit = false;
    bool theory_warning = false;
};

using OuterEvalFn = std::function<OuterEval(std::size_t k, std::span<const double> y)>;

SolverTrace run_outer_loop(const TikhonovProblem& prob, const ParamRegularizer& reg,
                           std::span<const double> y0, const SolverConfig& cfg,
                           const std::optional<Truth>& truth, const OuterEvalFn& evaluate);

}  // namespace rvarpro::detail
