// rvarpro: experiment driver for the variable-projection deblurring solvers.
//
//   rvarpro gen-data   --config FILE [--key value ...]
//   rvarpro scan-phi   --config FILE [--out FILE]
//   rvarpro run        --config FILE
//   rvarpro gradcheck  --config FILE
//   rvarpro conditions [--n 32] [--kernel wrapped|sampled]
//
// Exit codes: 0 success, 2 config error, 3 solver error, 4 I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "rvarpro/errors.hpp"
#include "rvarpro/harness/config.hpp"
#include "rvarpro/harness/experiment.hpp"
#include "rvarpro/harness/io.hpp"
#include "rvarpro/spectral.hpp"

namespace {

using namespace rvarpro;
using namespace rvarpro::harness;

struct ConfigOptions {
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* sub, ConfigOptions& opts) {
    sub->add_option("--config", opts.config_path, "key = value config file");
    for (const auto& key : config_keys()) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        sub->add_option_function<std::string>(
            "--" + flag, [&opts, key](const std::string& v) { opts.overrides[key] = v; },
            "override '" + key + "'");
    }
}

ExperimentConfig resolve(const ConfigOptions& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
    for (const auto& [k, v] : opts.overrides) apply_setting(cfg, k, v);
    validate(cfg);
    return cfg;
}

int cmd_gen_data(const ConfigOptions& opts) {
    const ExperimentConfig cfg = resolve(opts);
    ensure_writable_directory(cfg.output);
    const GeneratedProblem p = generate_problem(cfg);
    const std::size_t height = p.dimension == 2 ? p.n : 1;
    const std::filesystem::path dir(cfg.output);
    write_file_atomic((dir / "x_true.pgm").string(), encode_pgm(p.x_true, height, p.n));
    write_file_atomic((dir / "b.pgm").string(), encode_pgm(p.b, height, p.n));
    std::string csv = "index,x_true,b_true,b\n";
    for (std::size_t i = 0; i < p.b.size(); ++i) {
        csv += std::to_string(i) + "," + format_real(p.x_true[i]) + "," + format_real(p.b_true[i]) + "," +
               format_real(p.b[i]) + "\n";
    }
    write_file_atomic((dir / "data.csv").string(), csv);
    std::cout << "wrote x_true.pgm, b.pgm, data.csv to " << cfg.output << "\n"
              << "noise ratio ||b - b_true|| / ||b_true|| = "
              << format_real(norm2(subtract(p.b, p.b_true)) / norm2(p.b_true)) << "\n";
    return 0;
}

int cmd_scan(const ConfigOptions& opts, const std::string& out_path) {
    const ExperimentConfig cfg = resolve(opts);
    const auto rows = scan_phi(cfg, scan_grid(cfg));
    const std::string csv = scan_csv(rows);
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        write_file_atomic(out_path, csv);
    }
    return 0;
}

int cmd_run(const ConfigOptions& opts) {
    const ExperimentConfig cfg = resolve(opts);
    const ExperimentResult r = run_experiment(cfg);
    const auto& last = r.trace.records.back();
    std::cout << "y = " << format_real(r.trace.final_y[0]) << "  rre_x = " << format_real(r.metrics.rre_x)
              << "  rre_y = " << format_real(r.metrics.rre_y) << "  ssim = " << format_real(r.metrics.ssim)
              << "\nouter iterations = " << r.trace.records.size() - 1 << " (" << to_string(r.trace.stop)
              << "), cumulative inner iterations = " << last.cumulative_inner_iterations << "\n"
              << "wrote " << r.trace_path << ", " << r.recon_path << ", " << r.summary_path << "\n";
    return 0;
}

int cmd_gradcheck(const ConfigOptions& opts, std::size_t points) {
    const ExperimentConfig cfg = resolve(opts);
    bool ok = true;
    for (const auto& c : run_gradcheck(cfg, points)) {
        std::printf("%-22s max rel err %.3e (tol %.0e)  %s\n", c.name.c_str(), c.max_error, c.tolerance,
                    c.passed ? "PASS" : "FAIL");
        ok = ok && c.passed;
    }
    return ok ? 0 : 1;
}

int cmd_conditions(std::size_t n, const std::string& kernel_name, double smin, double smax, std::size_t points) {
    if (kernel_name != "wrapped" && kernel_name != "sampled") {
        throw ConfigError("--kernel must be wrapped or sampled");
    }
    if (!(smin > 0.0 && smin < smax) || points < 2) throw ConfigError("need 0 < sigma-min < sigma-max and >= 2 points");
    const SpectralKernel k = kernel_name == "wrapped" ? gaussian_kernel_wrapped(n) : gaussian_kernel_sampled(n);
    Vec grid(points);
    // Logarithmic grid.
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = smin * std::pow(smax / smin, static_cast<double>(i) / static_cast<double>(points - 1));
    }
    const NoBlurReport r = check_noblur_conditions(k, grid);
    std::printf("kernel %s, n = %zu, sigma in [%g, %g] (%zu points)\n", k.name.c_str(), n, smin, smax, points);
    std::printf("(i)   A(sigma_min) -> I        %s  (max deviation %.3e)\n", r.limit_identity ? "pass" : "FAIL", r.limit_error);
    std::printf("(ii)  evenness in sigma        %s  (max deviation %.3e)\n", r.evenness ? "pass" : "FAIL", r.evenness_error);
    std::printf("(iii) Re(conj(mu) mu') < 0     %s  (%zu checked, %zu failed, %zu below round-off)\n",
                r.modal_sign ? "pass" : "FAIL", r.sign_checked, r.sign_failures, r.sign_indeterminate);
    std::printf("verdict: %s\n", r.sigma_zero_unique_minimizer ? "sigma = 0 is the unique global minimizer of phi"
                                                                : "conditions not all satisfied");
    for (const auto& f : r.failures) std::printf("  %s\n", f.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-projection solvers for semi-blind Gaussian deblurring"};
    app.require_subcommand(1);

    ConfigOptions gen_opts, scan_opts, run_opts, grad_opts;
    auto* gen = app.add_subcommand("gen-data", "write x_true, b (PGM) and data.csv");
    add_config_options(gen, gen_opts);

    std::string scan_out;
    auto* scan = app.add_subcommand("scan-phi", "tabulate phi and dphi over the scan grid as CSV");
    add_config_options(scan, scan_opts);
    scan->add_option("--out", scan_out, "CSV output path (default stdout)");

    auto* run = app.add_subcommand("run", "run the configured solver and write trace.csv, recon.pgm, summary.txt");
    add_config_options(run, run_opts);

    std::size_t grad_points = 5;
    auto* grad = app.add_subcommand("gradcheck", "finite-difference checks of derivatives, Jacobian and gradients");
    add_config_options(grad, grad_opts);
    grad->add_option("--points", grad_points, "sample points per suite")->check(CLI::PositiveNumber);

    std::size_t cond_n = 32, cond_points = 400;
    std::string cond_kernel = "wrapped";
    double cond_min = 1e-3, cond_max = 10.0;
    auto* cond = app.add_subcommand("conditions", "check the no-blur degeneracy conditions for a circulant Gaussian");
    cond->add_option("--n", cond_n, "signal length")->check(CLI::Range(2, 4096));
    cond->add_option("--kernel", cond_kernel, "wrapped or sampled");
    cond->add_option("--sigma-min", cond_min, "smallest grid sigma");
    cond->add_option("--sigma-max", cond_max, "largest grid sigma");
    cond->add_option("--points", cond_points, "grid points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) return cmd_gen_data(gen_opts);
        if (*scan) return cmd_scan(scan_opts, scan_out);
        if (*run) return cmd_run(run_opts);
        if (*grad) return cmd_gradcheck(grad_opts, grad_points);
        if (*cond) return cmd_conditions(cond_n, cond_kernel, cond_min, cond_max, cond_points);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
