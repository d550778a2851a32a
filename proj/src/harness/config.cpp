#include "rvarpro/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rvarpro/errors.hpp"
#include "rvarpro/harness/io.hpp"

namespace rvarpro::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError(key + ": '" + v + "' is not a number");
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError(key + ": '" + v + "' is not a nonnegative integer");
    return out;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "dimension", "n", "image", "intensity", "y_true", "y_init", "noise_level", "seed",
        "lambda", "reg", "mu", "anchor", "reg_operator", "solver", "schedule", "eps0",
        "max_iterations", "step_tolerance", "gradient_tolerance", "lsqr_cap", "output",
        "scan_min", "scan_max", "scan_points"};
    return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = normalize_key(trim(raw_key));
    const std::string v = trim(raw_value);
    if (key == "dimension") {
        const auto d = parse_uint(key, v);
        if (d != 1 && d != 2) throw ConfigError("dimension must be 1 or 2");
        cfg.dimension = static_cast<int>(d);
    } else if (key == "n") {
        cfg.n = parse_uint(key, v);
    } else if (key == "image") {
        cfg.image = v;
    } else if (key == "intensity") {
        cfg.intensity = parse_real(key, v);
    } else if (key == "y_true") {
        cfg.y_true = parse_real(key, v);
    } else if (key == "y_init") {
        cfg.y_init = parse_real(key, v);
    } else if (key == "noise_level") {
        cfg.noise_level = parse_real(key, v);
    } else if (key == "seed") {
        cfg.seed = parse_uint(key, v);
    } else if (key == "lambda") {
        cfg.lambda = parse_real(key, v);
    } else if (key == "reg") {
        const std::string s = lower(v);
        if (s == "none") cfg.reg = RegKind::none;
        else if (s == "quadratic") cfg.reg = RegKind::quadratic;
        else if (s == "logbarrier" || s == "log-barrier") cfg.reg = RegKind::logbarrier;
        else throw ConfigError("reg must be none, quadratic or logbarrier");
    } else if (key == "mu") {
        cfg.mu = parse_real(key, v);
    } else if (key == "anchor") {
        if (v.empty() || lower(v) == "auto") cfg.anchor.reset();
        else cfg.anchor = parse_real(key, v);
    } else if (key == "reg_operator") {
        const std::string s = lower(v);
        if (s != "auto" && s != "identity" && s != "laplacian") {
            throw ConfigError("reg_operator must be auto, identity or laplacian");
        }
        cfg.reg_operator = s;
    } else if (key == "solver") {
        const std::string s = lower(v);
        if (s == "exact") cfg.solver = SolverKind::exact;
        else if (s == "inexact") cfg.solver = SolverKind::inexact;
        else throw ConfigError("solver must be exact or inexact");
    } else if (key == "schedule") {
        try {
            cfg.schedule = parse_schedule(v);
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "eps0") {
        cfg.eps0 = parse_real(key, v);
    } else if (key == "max_iterations") {
        cfg.max_iterations = parse_uint(key, v);
    } else if (key == "step_tolerance") {
        cfg.step_tolerance = parse_real(key, v);
    } else if (key == "gradient_tolerance") {
        cfg.gradient_tolerance = parse_real(key, v);
    } else if (key == "lsqr_cap") {
        cfg.lsqr_cap = parse_uint(key, v);
    } else if (key == "output") {
        cfg.output = v;
    } else if (key == "scan_min") {
        cfg.scan_min = parse_real(key, v);
    } else if (key == "scan_max") {
        cfg.scan_max = parse_real(key, v);
    } else if (key == "scan_points") {
        cfg.scan_points = parse_uint(key, v);
    } else {
        throw ConfigError("unknown config key '" + raw_key + "'");
    }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    const bool builtin = cfg.image == "shapes" || cfg.image == "edgy" || cfg.image == "smooth";
    if (cfg.dimension == 2) {
        if (builtin && cfg.image != "shapes") fail("2D builtin image must be 'shapes'");
        if (builtin && (!is_power_of_two(cfg.n) || cfg.n < 16 || cfg.n > 512)) {
            fail("n must be a power of two in [16, 512] for 2D problems, got " + std::to_string(cfg.n));
        }
        if (!(cfg.y_true > 0.0)) fail("y_true must be positive for the 2D Gaussian family");
        if (!(cfg.y_init > 0.0)) fail("y_init must be positive for the 2D Gaussian family");
    } else {
        if (cfg.image != "edgy" && cfg.image != "smooth") fail("1D image must be 'edgy' or 'smooth'");
        if (cfg.n < 2 || cfg.n > 2048) fail("n must be in [2, 2048] for 1D problems");
        if (cfg.reg_operator == "laplacian") fail("the laplacian regularization operator is 2D only");
    }
    if (!(cfg.intensity > 0.0)) fail("intensity must be positive");
    if (!(cfg.noise_level >= 0.0)) fail("noise_level must be >= 0");
    if (!(cfg.lambda > 0.0)) fail("lambda must be positive");
    if (cfg.reg == RegKind::quadratic && !(cfg.mu >= 0.0)) fail("mu must be >= 0");
    if (cfg.reg == RegKind::logbarrier) {
        if (!(cfg.mu > 0.0)) fail("mu must be > 0 for the log-barrier");
        if (!(cfg.y_init > 0.0)) fail("y_init must be positive for the log-barrier");
    }
    if (cfg.max_iterations == 0) fail("max_iterations must be >= 1");
    if (!(cfg.step_tolerance >= 0.0) || !(cfg.gradient_tolerance >= 0.0)) fail("tolerances must be >= 0");
    if (!(cfg.eps0 > 0.0)) fail("eps0 must be positive");
    if (cfg.lsqr_cap == 0) fail("lsqr_cap must be >= 1");
    if (cfg.output.empty()) fail("output directory must not be empty");
    if (!(cfg.scan_min < cfg.scan_max) || cfg.scan_points < 2) fail("scan grid needs scan_min < scan_max and >= 2 points");
}

std::string to_string(RegKind kind) {
    switch (kind) {
        case RegKind::none: return "none";
        case RegKind::quadratic: return "quadratic";
        case RegKind::logbarrier: return "logbarrier";
    }
    return "?";
}

std::string to_string(SolverKind kind) { return kind == SolverKind::exact ? "exact" : "inexact"; }

std::string dump_config(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "dimension = " << c.dimension << "\n"
      << "n = " << c.n << "\n"
      << "image = " << c.image << "\n"
      << "intensity = " << format_real(c.intensity) << "\n"
      << "y_true = " << format_real(c.y_true) << "\n"
      << "y_init = " << format_real(c.y_init) << "\n"
      << "noise_level = " << format_real(c.noise_level) << "\n"
      << "seed = " << c.seed << "\n"
      << "lambda = " << format_real(c.lambda) << "\n"
      << "reg = " << to_string(c.reg) << "\n"
      << "mu = " << format_real(c.mu) << "\n"
      << "anchor = " << (c.anchor ? format_real(*c.anchor) : std::string("auto")) << "\n"
      << "reg_operator = " << c.reg_operator << "\n"
      << "solver = " << to_string(c.solver) << "\n"
      << "schedule = " << to_string(c.schedule) << "\n"
      << "eps0 = " << format_real(c.eps0) << "\n"
      << "max_iterations = " << c.max_iterations << "\n"
      << "step_tolerance = " << format_real(c.step_tolerance) << "\n"
      << "gradient_tolerance = " << format_real(c.gradient_tolerance) << "\n"
      << "lsqr_cap = " << c.lsqr_cap << "\n"
      << "output = " << c.output << "\n"
      << "scan_min = " << format_real(c.scan_min) << "\n"
      << "scan_max = " << format_real(c.scan_max) << "\n"
      << "scan_points = " << c.scan_points << "\n";
    return o.str();
}

}  // namespace rvarpro::harness
