#include "rvarpro/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "rvarpro/errors.hpp"
#include "rvarpro/harness/io.hpp"
#include "rvarpro/inexact.hpp"

namespace rvarpro::harness {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Test signals
// ---------------------------------------------------------------------------

Vec shapes_phantom(std::size_t n, double intensity) {
    Vec x(n * n, 0.0);
    const double nn = static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(i) + 0.5) / nn;
            const double v = (static_cast<double>(j) + 0.5) / nn;
            double val = 0.0;
            if (u >= 0.15 && u < 0.45 && v >= 0.10 && v < 0.50) val = 0.5;
            const double dr = std::hypot(u - 0.65, v - 0.65);
            if (dr < 0.20) val = 1.0;
            if (dr < 0.08) val = 0.3;
            if (u >= 0.70 && u < 0.85 && v >= 0.15 && v < 0.30) val = 0.8;
            const double eu = (u - 0.30) / 0.12, ev = (v - 0.75) / 0.06;
            if (eu * eu + ev * ev < 1.0) val = 0.7;
            x[i + j * n] = intensity * val;
        }
    return x;
}

Vec edgy_signal(std::size_t n, double intensity) {
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        double v = 0.0;
        if (t >= 0.10 && t < 0.30) v = 1.0;
        else if (t >= 0.30 && t < 0.50) v = 0.3;
        else if (t >= 0.50 && t < 0.60) v = 0.8;
        else if (t >= 0.75 && t < 0.90) v = 0.6;
        x[i] = intensity * v;
    }
    return x;
}

Vec smooth_signal(std::size_t n, double intensity) {
    struct Bump {
        double c, w, h;
    };
    constexpr Bump bumps[] = {{0.25, 0.05, 1.0}, {0.55, 0.08, 0.6}, {0.80, 0.03, 0.8}};
    Vec x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        for (const auto& b : bumps) x[i] += b.h * std::exp(-(t - b.c) * (t - b.c) / (2.0 * b.w * b.w));
        x[i] *= intensity;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Problem assembly
// ---------------------------------------------------------------------------

std::shared_ptr<const OperatorFamily> make_family(const ExperimentConfig& cfg, std::size_t n) {
    if (cfg.dimension == 1) return std::make_shared<GaussianToeplitz1D>(n);
    return std::make_shared<GaussianBccb2D>(n);
}

GeneratedProblem generate_problem(const ExperimentConfig& cfg) {
    validate(cfg);
    GeneratedProblem p;
    p.dimension = cfg.dimension;
    if (cfg.dimension == 1) {
        p.n = cfg.n;
        p.x_true = cfg.image == "edgy" ? edgy_signal(cfg.n, cfg.intensity) : smooth_signal(cfg.n, cfg.intensity);
    } else if (cfg.image == "shapes") {
        p.n = cfg.n;
        p.x_true = shapes_phantom(cfg.n, cfg.intensity);
    } else {
        GrayImage img = read_pgm(cfg.image);
        if (img.width != img.height) throw ConfigError("PGM image '" + cfg.image + "' must be square");
        const std::size_t n = img.width;
        if ((n & (n - 1)) != 0 || n < 16 || n > 512) {
            throw ConfigError("PGM image side must be a power of two in [16, 512], got " + std::to_string(n));
        }
        p.n = n;
        p.x_true = std::move(img.pixels);
    }
    const auto family = make_family(cfg, p.n);
    const double y[1] = {cfg.y_true};
    p.b_true = family->apply(y, p.x_true);
    p.b = p.b_true;
    if (cfg.noise_level > 0.0) {
        const double sd = cfg.noise_level * norm2(p.b_true) / std::sqrt(static_cast<double>(p.b_true.size()));
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& v : p.b) v += sd * normal(rng);
    }
    return p;
}

TikhonovProblem make_problem(const ExperimentConfig& cfg, const GeneratedProblem& data) {
    const bool laplacian = cfg.reg_operator == "laplacian" || (cfg.reg_operator == "auto" && data.dimension == 2);
    TikhonovProblem prob{make_family(cfg, data.n),
                         laplacian ? RegOperator::laplacian_2d(data.n) : RegOperator::identity(data.x_true.size()),
                         cfg.lambda, data.b, InnerBackend::automatic};
    prob.validate();
    return prob;
}

ParamRegularizer make_regularizer(const ExperimentConfig& cfg) {
    switch (cfg.reg) {
        case RegKind::none: return NoRegularizer{};
        case RegKind::quadratic: return QuadraticRegularizer{cfg.mu, {cfg.anchor_value()}};
        case RegKind::logbarrier: return LogBarrierRegularizer{{cfg.mu}};
    }
    return NoRegularizer{};
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

struct WindowStats {
    double mx = 0, my = 0, vx = 0, vy = 0, cxy = 0;
};

WindowStats window_stats(const Vec& x, const Vec& y, const std::vector<std::size_t>& idx) {
    WindowStats s;
    const double m = static_cast<double>(idx.size());
    for (auto i : idx) {
        s.mx += x[i];
        s.my += y[i];
    }
    s.mx /= m;
    s.my /= m;
    for (auto i : idx) {
        const double dx = x[i] - s.mx, dy = y[i] - s.my;
        s.vx += dx * dx;
        s.vy += dy * dy;
        s.cxy += dx * dy;
    }
    s.vx /= m;
    s.vy /= m;
    s.cxy /= m;
    return s;
}

}  // namespace

double ssim(const Vec& x, const Vec& x_true, std::size_t n, int dimension) {
    const std::size_t total = dimension == 1 ? n : n * n;
    if (x.size() != total || x_true.size() != total) throw ArgumentError("ssim: size mismatch");
    const auto [lo, hi] = std::minmax_element(x_true.begin(), x_true.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw ArgumentError("ssim: reference image is constant");
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    const std::size_t w = std::min<std::size_t>(8, n);
    const std::size_t windows = n / w;

    double sum = 0.0;
    std::size_t count = 0;
    std::vector<std::size_t> idx;
    auto accumulate = [&]() {
        const WindowStats s = window_stats(x, x_true, idx);
        sum += ((2 * s.mx * s.my + c1) * (2 * s.cxy + c2)) /
               ((s.mx * s.mx + s.my * s.my + c1) * (s.vx + s.vy + c2));
        ++count;
    };
    if (dimension == 1) {
        for (std::size_t b = 0; b < windows; ++b) {
            idx.clear();
            for (std::size_t i = 0; i < w; ++i) idx.push_back(b * w + i);
            accumulate();
        }
    } else {
        for (std::size_t bj = 0; bj < windows; ++bj)
            for (std::size_t bi = 0; bi < windows; ++bi) {
                idx.clear();
                for (std::size_t j = 0; j < w; ++j)
                    for (std::size_t i = 0; i < w; ++i) idx.push_back((bi * w + i) + (bj * w + j) * n);
                accumulate();
            }
    }
    return sum / static_cast<double>(count);
}

Metrics compute_metrics(const Vec& x, const Vec& y, const Vec& x_true, const Vec& y_true,
                        std::size_t n, int dimension) {
    Metrics m;
    m.rre_x = relative_error(x, x_true);
    m.rre_y = relative_error(y, y_true);
    m.ssim = ssim(x, x_true, n, dimension);
    return m;
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

Vec scan_grid(const ExperimentConfig& cfg) {
    Vec g(cfg.scan_points);
    for (std::size_t i = 0; i < cfg.scan_points; ++i) {
        g[i] = cfg.scan_min + (cfg.scan_max - cfg.scan_min) * static_cast<double>(i) /
                                  static_cast<double>(cfg.scan_points - 1);
    }
    return g;
}

std::vector<ScanRow> scan_phi(const TikhonovProblem& prob, const ParamRegularizer& reg, const Vec& sigma_grid) {
    for (std::size_t i = 1; i < sigma_grid.size(); ++i) {
        if (!(sigma_grid[i] > sigma_grid[i - 1])) throw ArgumentError("scan_phi: grid must be sorted increasing");
    }
    std::vector<ScanRow> rows(sigma_grid.size());
    std::vector<std::exception_ptr> errors(sigma_grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(sigma_grid.size()); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        ScanRow& row = rows[i];
        row.sigma = sigma_grid[i];
        try {
            const double y[1] = {row.sigma};
            const ReducedEval ev = evaluate_reduced(prob, reg, y);
            row.phi = ev.phi;
            row.dphi = ev.grad[0];
        } catch (const DomainError&) {
            row.domain_error = true;
            row.phi = row.dphi = std::numeric_limits<double>::quiet_NaN();
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

std::vector<ScanRow> scan_phi(const ExperimentConfig& cfg, const Vec& sigma_grid) {
    const GeneratedProblem data = generate_problem(cfg);
    return scan_phi(make_problem(cfg, data), make_regularizer(cfg), sigma_grid);
}

std::string scan_csv(const std::vector<ScanRow>& rows) {
    std::string out = "sigma,phi,dphi,status\n";
    for (const auto& r : rows) {
        out += format_real(r.sigma) + "," + format_real(r.phi) + "," + format_real(r.dphi) + "," +
               (r.domain_error ? "domain_error" : "ok") + "\n";
    }
    return out;
}

double locate_minimizer(const TikhonovProblem& prob, const ParamRegularizer& reg, const Vec& sigma_grid,
                        double tolerance) {
    const auto rows = scan_phi(prob, reg, sigma_grid);
    std::size_t best = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].domain_error) continue;
        if (best == rows.size() || rows[i].phi < rows[best].phi) best = i;
    }
    if (best == rows.size()) throw DomainError("locate_minimizer: no grid point inside the domain");
    auto dphi = [&](double s) {
        const double y[1] = {s};
        return evaluate_reduced(prob, reg, y).grad[0];
    };
    double lo = 0.0, hi = 0.0;
    if (best > 0 && !rows[best - 1].domain_error && rows[best - 1].dphi < 0.0 && rows[best].dphi >= 0.0) {
        lo = rows[best - 1].sigma;
        hi = rows[best].sigma;
    } else if (best + 1 < rows.size() && rows[best].dphi <= 0.0 && rows[best + 1].dphi > 0.0) {
        lo = rows[best].sigma;
        hi = rows[best + 1].sigma;
    } else {
        return rows[best].sigma;
    }
    while (hi - lo > tolerance * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (dphi(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

SolverTrace solve(const ExperimentConfig& cfg, const TikhonovProblem& prob, const ParamRegularizer& reg,
                  const Truth& truth) {
    SolverConfig sc;
    sc.max_outer_iterations = cfg.max_iterations;
    sc.step_tolerance = cfg.step_tolerance;
    sc.gradient_tolerance = cfg.gradient_tolerance;
    const Vec y0 = {cfg.y_init};
    if (cfg.solver == SolverKind::exact) return rgenvarpro(prob, reg, y0, sc, truth);
    return irgenvarpro(prob, reg, y0, ToleranceSchedule{cfg.schedule, cfg.eps0}, sc, cfg.lsqr_cap, truth);
}

std::string trace_csv(const SolverTrace& trace) {
    std::string out = "k,y,phi,grad_norm,step_norm,eps_k,inner_iters,cum_inner_iters,wall_ms,rre_x,rre_y\n";
    for (const auto& r : trace.records) {
        std::string y;
        for (std::size_t j = 0; j < r.y.size(); ++j) y += (j ? ";" : "") + format_real(r.y[j]);
        out += std::to_string(r.k) + "," + y + "," + format_real(r.phi) + "," + format_real(r.grad_norm) + "," +
               format_real(r.step_norm) + "," + format_real(r.eps) + "," + std::to_string(r.inner_iterations) +
               "," + std::to_string(r.cumulative_inner_iterations) + "," + format_real(r.wall_ms) + "," +
               (r.rre_x ? format_real(*r.rre_x) : "") + "," + (r.rre_y ? format_real(*r.rre_y) : "") + "\n";
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    ensure_writable_directory(cfg.output);

    ExperimentResult res;
    res.data = generate_problem(cfg);
    const TikhonovProblem prob = make_problem(cfg, res.data);
    const ParamRegularizer reg = make_regularizer(cfg);
    const Truth truth{res.data.x_true, {cfg.y_true}};
    res.trace = solve(cfg, prob, reg, truth);
    res.metrics = compute_metrics(res.trace.final_x, res.trace.final_y, res.data.x_true, truth.y, res.data.n,
                                  res.data.dimension);

    const fs::path dir(cfg.output);
    res.trace_path = (dir / "trace.csv").string();
    res.recon_path = (dir / "recon.pgm").string();
    res.summary_path = (dir / "summary.txt").string();

    write_file_atomic(res.trace_path, trace_csv(res.trace));
    const std::size_t height = res.data.dimension == 2 ? res.data.n : 1;
    write_file_atomic(res.recon_path, encode_pgm(res.trace.final_x, height, res.data.n));

    std::size_t damped = 0, cap_hits = 0, warnings = 0;
    for (const auto& r : res.trace.records) {
        damped += r.damped;
        cap_hits += r.inner_cap_hit;
        warnings += r.theory_warning;
    }
    const auto& last = res.trace.records.back();
    std::ostringstream s;
    s << "# results\n"
      << "final_y = " << format_real(res.trace.final_y[0]) << "\n"
      << "final_phi = " << format_real(last.phi) << "\n"
      << "final_grad_norm = " << format_real(last.grad_norm) << "\n"
      << "rre_x = " << format_real(res.metrics.rre_x) << "\n"
      << "rre_y = " << format_real(res.metrics.rre_y) << "\n"
      << "ssim = " << format_real(res.metrics.ssim) << "\n"
      << "outer_iterations = " << (res.trace.records.size() - 1) << "\n"
      << "stop_reason = " << to_string(res.trace.stop) << "\n"
      << "cum_inner_iters = " << last.cumulative_inner_iterations << "\n"
      << "damped_steps = " << damped << "\n"
      << "inner_cap_hits = " << cap_hits << "\n"
      << "eps_kappa_warnings = " << warnings << "\n"
      << "# config\n"
      << dump_config(cfg);
    write_file_atomic(res.summary_path, s.str());
    return res;
}

// ---------------------------------------------------------------------------
// Finite-difference checks
// ---------------------------------------------------------------------------

double fd_relative_error(const Vec& a, const Vec& b, double floor) {
    return norm2(subtract(a, b)) / std::max(norm2(b), floor);
}

std::vector<CheckResult> run_gradcheck(const ExperimentConfig& cfg, std::size_t points) {
    const GeneratedProblem data = generate_problem(cfg);
    const TikhonovProblem prob = make_problem(cfg, data);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> pick(1.0, 6.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec ys(points);
    for (double& y : ys) y = pick(rng);
    constexpr double tol = 1e-6;

    std::vector<CheckResult> out;
    auto step = [](double y) { return 1e-5 * std::max(1.0, std::abs(y)); };

    {
        CheckResult c{"operator-derivative", 0.0, tol, false};
        for (double y0 : ys) {
            Vec x(prob.unknowns());
            for (double& v : x) v = normal(rng);
            const double h = step(y0);
            const double yp[1] = {y0 + h}, ym[1] = {y0 - h}, yc[1] = {y0};
            const Vec fd = scaled(0.5 / h, subtract(prob.family->apply(yp, x), prob.family->apply(ym, x)));
            c.max_error = std::max(c.max_error, fd_relative_error(prob.family->apply_dparam(yc, 0, x), fd, 1e-300));
        }
        c.passed = c.max_error < tol;
        out.push_back(c);
    }
    {
        CheckResult c{"jacobian", 0.0, tol, false};
        for (double y0 : ys) {
            const double h = step(y0);
            const double yp[1] = {y0 + h}, ym[1] = {y0 - h}, yc[1] = {y0};
            const Vec fp = residual_f(prob, yp, solve_x(prob, yp));
            const Vec fm = residual_f(prob, ym, solve_x(prob, ym));
            const Vec fd = scaled(0.5 / h, subtract(fp, fm));
            const DenseMat j = jacobian_f(prob, yc, solve_x(prob, yc));
            c.max_error = std::max(c.max_error, fd_relative_error(j.column(0), fd, 1e-300));
        }
        c.passed = c.max_error < tol;
        out.push_back(c);
    }
    ExperimentConfig variant = cfg;
    for (RegKind kind : {RegKind::none, RegKind::quadratic, RegKind::logbarrier}) {
        variant.reg = kind;
        const ParamRegularizer reg = make_regularizer(variant);
        CheckResult c{"gradient-" + to_string(kind), 0.0, tol, false};
        for (double y0 : ys) {
            const double h = step(y0);
            const double yp[1] = {y0 + h}, ym[1] = {y0 - h}, yc[1] = {y0};
            const double fd = (reduced_phi(prob, reg, yp) - reduced_phi(prob, reg, ym)) / (2.0 * h);
            const ReducedEval ev = evaluate_reduced(prob, reg, yc);
            c.max_error = std::max(c.max_error, fd_relative_error(ev.grad, {fd}, 1e-300));
        }
        c.passed = c.max_error < tol;
        out.push_back(c);
    }
    return out;
}

}  // namespace rvarpro::harness
