#include "rvarpro/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "rvarpro/errors.hpp"
#include "rvarpro/kernels.hpp"

namespace rvarpro {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* where) {
    if (a != b) {
        throw ArgumentError(std::string(where) + ": size mismatch (" + std::to_string(a) + " vs " +
                            std::to_string(b) + ")");
    }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    // Scaled accumulation so that tiny or huge entries do not under/overflow.
    double scale_ = 0.0;
    double ssq = 1.0;
    for (double v : a) {
        if (v == 0.0) continue;
        const double av = std::abs(v);
        if (scale_ < av) {
            ssq = 1.0 + ssq * (scale_ / av) * (scale_ / av);
            scale_ = av;
        } else {
            ssq += (av / scale_) * (av / scale_);
        }
    }
    return scale_ * std::sqrt(ssq);
}

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require_same_size(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
    for (double& v : x) v *= alpha;
}

Vec add(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size(), "add");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Vec subtract(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size(), "subtract");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Vec scaled(double alpha, std::span<const double> a) {
    Vec out(a.begin(), a.end());
    scale(alpha, out);
    return out;
}

Vec concat(std::span<const double> a, std::span<const double> b) {
    Vec out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// DenseMat
// ---------------------------------------------------------------------------

DenseMat::DenseMat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMat::DenseMat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ArgumentError("DenseMat: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMat DenseMat::identity(std::size_t n) {
    DenseMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMat DenseMat::diagonal(std::span<const double> diag) {
    DenseMat m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

DenseMat DenseMat::from_columns(std::size_t rows, std::size_t cols,
                                const std::function<Vec(std::span<const double>)>& apply) {
    DenseMat m(rows, cols);
    Vec e(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        e[j] = 1.0;
        const Vec c = apply(e);
        require_same_size(c.size(), rows, "DenseMat::from_columns");
        m.set_column(j, c);
        e[j] = 0.0;
    }
    return m;
}

Vec DenseMat::column(std::size_t j) const {
    Vec c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

void DenseMat::set_column(std::size_t j, std::span<const double> values) {
    require_same_size(values.size(), rows_, "DenseMat::set_column");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Vec DenseMat::multiply(std::span<const double> x) const {
    require_same_size(x.size(), cols_, "DenseMat::multiply");
    Vec out(rows_);
    kernels::omp::matvec(*this, x, out);
    return out;
}

Vec DenseMat::multiply_transpose(std::span<const double> x) const {
    require_same_size(x.size(), rows_, "DenseMat::multiply_transpose");
    Vec out(cols_);
    kernels::omp::matvec_transpose(*this, x, out);
    return out;
}

DenseMat DenseMat::transpose() const {
    DenseMat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

DenseMat DenseMat::gram() const {
    DenseMat g(cols_, cols_);
    kernels::omp::gram(*this, g);
    return g;
}

DenseMat DenseMat::symmetrized() const {
    require_same_size(rows_, cols_, "DenseMat::symmetrized");
    DenseMat s(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    return s;
}

double DenseMat::max_abs() const { return norm_inf(data_); }

DenseMat matmul(const DenseMat& a, const DenseMat& b) {
    require_same_size(a.cols(), b.rows(), "matmul");
    DenseMat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

DenseMat add(const DenseMat& a, const DenseMat& b) {
    require_same_size(a.rows(), b.rows(), "add");
    require_same_size(a.cols(), b.cols(), "add");
    DenseMat c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i] + b.data()[i];
    return c;
}

DenseMat subtract(const DenseMat& a, const DenseMat& b) {
    require_same_size(a.rows(), b.rows(), "subtract");
    require_same_size(a.cols(), b.cols(), "subtract");
    DenseMat c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
    return c;
}

DenseMat scaled(double alpha, const DenseMat& a) {
    DenseMat c = a;
    scale(alpha, c.data());
    return c;
}

DenseMat vstack(const DenseMat& top, const DenseMat& bottom) {
    if (top.empty()) return bottom;
    if (bottom.empty()) return top;
    require_same_size(top.cols(), bottom.cols(), "vstack");
    DenseMat s(top.rows() + bottom.rows(), top.cols());
    std::copy(top.data().begin(), top.data().end(), s.data().begin());
    std::copy(bottom.data().begin(), bottom.data().end(),
              s.data().begin() + static_cast<std::ptrdiff_t>(top.data().size()));
    return s;
}

LinOp LinOp::from_dense(DenseMat m) {
    auto shared = std::make_shared<const DenseMat>(std::move(m));
    return {shared->rows(), shared->cols(),
            [shared](std::span<const double> x) { return shared->multiply(x); },
            [shared](std::span<const double> v) { return shared->multiply_transpose(v); }};
}

LinOp LinOp::identity(std::size_t n) {
    auto copy = [](std::span<const double> x) { return Vec(x.begin(), x.end()); };
    return {n, n, copy, copy};
}

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

Cholesky::Cholesky(const DenseMat& spd) : factor_(spd.rows(), spd.cols()) {
    require_same_size(spd.rows(), spd.cols(), "Cholesky");
    const std::size_t n = spd.rows();
    // Pivots at or below the rounding level of the largest diagonal entry
    // are treated as zero.
    double max_diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) max_diag = std::max(max_diag, std::abs(spd(j, j)));
    const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = spd(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= factor_(j, k) * factor_(j, k);
        if (!(diag > floor) || !std::isfinite(diag)) {
            throw SingularityError("Cholesky: matrix is not positive definite", j);
        }
        const double ljj = std::sqrt(diag);
        factor_(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = spd(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= factor_(i, k) * factor_(j, k);
            factor_(i, j) = s / ljj;
        }
    }
}

Vec Cholesky::solve(std::span<const double> rhs) const {
    const std::size_t n = dim();
    require_same_size(rhs.size(), n, "Cholesky::solve");
    Vec z(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) z[i] -= factor_(i, k) * z[k];
        z[i] /= factor_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t k = ii + 1; k < n; ++k) z[ii] -= factor_(k, ii) * z[k];
        z[ii] /= factor_(ii, ii);
    }
    return z;
}

Vec solve_spd(const DenseMat& h, std::span<const double> g) { return Cholesky(h).solve(g); }

Vec dense_normal_solve(const DenseMat& k, std::span<const double> d) {
    require_same_size(d.size(), k.rows(), "dense_normal_solve");
    return Cholesky(k.gram()).solve(k.multiply_transpose(d));
}

double estimate_op_norm(const LinOp& k, std::size_t iterations, std::uint64_t seed) {
    if (iterations == 0) throw ArgumentError("estimate_op_norm: iterations must be >= 1");
    if (k.cols == 0 || k.rows == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(k.cols);
    for (double& e : v) e = normal(rng);
    scale(1.0 / norm2(v), v);

    for (std::size_t it = 0; it < iterations; ++it) {
        const Vec kv = k.apply(v);
        Vec w = k.apply_transpose(kv);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        scale(1.0 / nw, w);
        v = std::move(w);
    }
    return norm2(k.apply(v));
}

}  // namespace rvarpro
