#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "modspace/numeric.hpp"

namespace modspace::fft {

// In-place n-dimensional complex FFT backed by FFTW. Plans are cached per
// (rank, size, direction); planning is serialized, execution is thread-safe.
namespace detail {

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int rank, int size, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(rank, size, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::size_t total = 1;
        for (int r = 0; r < rank; ++r) total *= static_cast<std::size_t>(size);
        std::vector<cplx> scratch(total);
        std::vector<int> dims(static_cast<std::size_t>(rank), size);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft(rank, dims.data(), buf, buf, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw ConstructionError("fftw_plan_dft failed");
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
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void execute(std::span<cplx> data, int rank, int size, int sign) {
    std::size_t total = 1;
    for (int r = 0; r < rank; ++r) total *= static_cast<std::size_t>(size);
    if (data.size() != total) throw StructuralError("fft: buffer size does not match plan");
    fftw_plan plan = PlanCache::instance().get(rank, size, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace detail

/// X_k = sum_j x_j exp(-2 pi i jk/N), unnormalized, per axis.
inline void forward(std::span<cplx> data, int rank, int size) {
    detail::execute(data, rank, size, FFTW_FORWARD);
}

/// x_j = sum_k X_k exp(+2 pi i jk/N), unnormalized, per axis.
inline void backward(std::span<cplx> data, int rank, int size) {
    detail::execute(data, rank, size, FFTW_BACKWARD);
}

}  // namespace modspace::fft
