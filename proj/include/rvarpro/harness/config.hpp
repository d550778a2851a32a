#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rvarpro/inexact.hpp"

namespace rvarpro::harness {

enum class RegKind { none, quadratic, logbarrier };
enum class SolverKind { exact, inexact };

struct ExperimentConfig {
    int dimension = 2;
    std::size_t n = 64;
    // Builtin phantom (2D: shapes; 1D: edgy, smooth) or a PGM path (2D).
    std::string image = "shapes";
    // Peak intensity of builtin phantoms.
    double intensity = 3.5;
    double y_true = 3.0;
    double y_init = 5.0;
    double noise_level = 0.05;
    std::uint64_t seed = 1;
    double lambda = 1.5;
    RegKind reg = RegKind::quadratic;
    double mu = 3.8;
    // Quadratic anchor y0; defaults to y_init.
    std::optional<double> anchor;
    // auto: laplacian in 2D, identity in 1D.
    std::string reg_operator = "auto";
    SolverKind solver = SolverKind::exact;
    ScheduleKind schedule = ScheduleKind::ab;
    double eps0 = 1e-3;
    std::size_t max_iterations = 30;
    double step_tolerance = 1e-8;
    double gradient_tolerance = 1e-10;
    std::size_t lsqr_cap = 300;
    std::string output = "out";
    double scan_min = 0.05;
    double scan_max = 8.0;
    std::size_t scan_points = 160;

    double anchor_value() const { return anchor.value_or(y_init); }
};

// Keys accepted in config files and as --key overrides (hyphens allowed).
const std::vector<std::string>& config_keys();

// Throws ConfigError on unknown keys or unparsable values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
// Parses key = value lines (# starts a comment). Throws IoError if unreadable.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
// Throws ConfigError when the settings cannot describe a runnable experiment.
void validate(const ExperimentConfig& cfg);
// key = value text that parse_config reads back to the same settings.
std::string dump_config(const ExperimentConfig& cfg);

std::string to_string(RegKind kind);
std::string to_string(SolverKind kind);

}  // namespace rvarpro::harness
