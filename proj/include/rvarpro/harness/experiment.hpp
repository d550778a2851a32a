#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "rvarpro/harness/config.hpp"
#include "rvarpro/regularizers.hpp"
#include "rvarpro/varpro.hpp"

namespace rvarpro::harness {

struct GeneratedProblem {
    // Image side (2D) or signal length (1D).
    std::size_t n = 0;
    int dimension = 2;
    Vec x_true;
    Vec b_true;  // A(y_true) x_true
    Vec b;       // b_true + noise
};

// Builtin test signals. 2D values lie in [0, intensity]; 1D likewise.
Vec shapes_phantom(std::size_t n, double intensity = 1.0);
Vec edgy_signal(std::size_t n, double intensity = 1.0);
Vec smooth_signal(std::size_t n, double intensity = 1.0);

GeneratedProblem generate_problem(const ExperimentConfig& cfg);

std::shared_ptr<const OperatorFamily> make_family(const ExperimentConfig& cfg, std::size_t n);
TikhonovProblem make_problem(const ExperimentConfig& cfg, const GeneratedProblem& data);
ParamRegularizer make_regularizer(const ExperimentConfig& cfg);

struct Metrics {
    double rre_x = 0.0;
    double rre_y = 0.0;
    double ssim = 0.0;
};

// Mean SSIM over non-overlapping 8x8 windows (8-sample windows in 1D),
// K1 = 0.01, K2 = 0.03, dynamic range max(x_true) - min(x_true).
double ssim(const Vec& x, const Vec& x_true, std::size_t n, int dimension);
Metrics compute_metrics(const Vec& x, const Vec& y, const Vec& x_true, const Vec& y_true,
                        std::size_t n, int dimension);

struct ScanRow {
    double sigma = 0.0;
    double phi = 0.0;
    double dphi = 0.0;
    bool domain_error = false;
};

Vec scan_grid(const ExperimentConfig& cfg);
std::vector<ScanRow> scan_phi(const ExperimentConfig& cfg, const Vec& sigma_grid);
std::vector<ScanRow> scan_phi(const TikhonovProblem& prob, const ParamRegularizer& reg,
                              const Vec& sigma_grid);
std::string scan_csv(const std::vector<ScanRow>& rows);

// Grid argmin followed by bisection on dphi inside the bracketing cells.
double locate_minimizer(const TikhonovProblem& prob, const ParamRegularizer& reg,
                        const Vec& sigma_grid, double tolerance = 1e-10);

SolverTrace solve(const ExperimentConfig& cfg, const TikhonovProblem& prob,
                  const ParamRegularizer& reg, const Truth& truth);

std::string trace_csv(const SolverTrace& trace);

struct ExperimentResult {
    GeneratedProblem data;
    SolverTrace trace;
    Metrics metrics;
    std::string trace_path;
    std::string recon_path;
    std::string summary_path;
};

// Writes trace.csv, recon.pgm and summary.txt into cfg.output.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct CheckResult {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Finite-difference suites for the configured problem: operator derivative,
// Jacobian, and gradient under each regularizer.
std::vector<CheckResult> run_gradcheck(const ExperimentConfig& cfg, std::size_t points = 5);

// ||a - b|| / max(||b||, floor)
double fd_relative_error(const Vec& a, const Vec& b, double floor);

}  // namespace rvarpro::harness
