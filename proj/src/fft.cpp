#include "rvarpro/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "rvarpro/errors.hpp"

namespace rvarpro::fft {

namespace {

// Plans are created once per (rank, n, sign) and reused with the new-array
// execute interface, which FFTW documents as thread-safe. Planner calls are
// not, hence the mutex. FFTW_ESTIMATE keeps plans (and results) reproducible.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int rank, std::size_t n, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(rank, n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        const std::size_t total = rank == 1 ? n : n * n;
        CVec scratch_in(total), scratch_out(total);
        auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
        auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        const int ni = static_cast<int>(n);
        fftw_plan plan = rank == 1 ? fftw_plan_dft_1d(ni, in, out, sign, flags)
                                   : fftw_plan_dft_2d(ni, ni, in, out, sign, flags);
        if (plan == nullptr) throw NumericError("fftw: plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

CVec execute(int rank, std::size_t n, int sign, std::span<const cplx> in) {
    const std::size_t total = rank == 1 ? n : n * n;
    if (in.size() != total) throw ArgumentError("fft: input length does not match transform size");
    if (n == 0) return {};
    fftw_plan plan = PlanCache::instance().get(rank, n, sign);
    CVec src(in.begin(), in.end());
    CVec out(total);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(src.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    if (sign == FFTW_BACKWARD) {
        const double inv = 1.0 / static_cast<double>(total);
        for (auto& v : out) v *= inv;
    }
    return out;
}

}  // namespace

CVec forward_1d(std::span<const cplx> in) { return execute(1, in.size(), FFTW_FORWARD, in); }
CVec inverse_1d(std::span<const cplx> in) { return execute(1, in.size(), FFTW_BACKWARD, in); }

CVec forward_2d(std::size_t n, std::span<const cplx> in) { return execute(2, n, FFTW_FORWARD, in); }
CVec inverse_2d(std::size_t n, std::span<const cplx> in) { return execute(2, n, FFTW_BACKWARD, in); }

CVec to_complex(std::span<const double> in) {
    CVec out(in.size());
    std::transform(in.begin(), in.end(), out.begin(), [](double v) { return cplx(v, 0.0); });
    return out;
}

Vec real_part_checked(std::span<const cplx> in, double rel_tol) {
    Vec out(in.size());
    double max_real = 0.0;
    double max_imag = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = in[i].real();
        max_real = std::max(max_real, std::abs(in[i].real()));
        max_imag = std::max(max_imag, std::abs(in[i].imag()));
    }
    if (!(max_imag <= rel_tol * std::max(1.0, max_real))) {
        throw NumericError("fft: imaginary residue " + std::to_string(max_imag) +
                           " exceeds tolerance");
    }
    return out;
}

}  // namespace rvarpro::fft
