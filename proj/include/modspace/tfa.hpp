#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "modspace/exponents.hpp"
#include "modspace/fft.hpp"
#include "modspace/grid.hpp"
#include "modspace/numeric.hpp"
#include "modspace/parallel.hpp"
#include "modspace/profiles.hpp"

namespace modspace {

enum class WindowKind { gaussian, bump };

inline const char* window_name(WindowKind k) { return k == WindowKind::gaussian ? "gaussian" : "bump"; }

struct Window {
    SampledSignal signal;
    WindowKind label = WindowKind::gaussian;
    double normalization = 1.0;  ///< L2 norm of `signal`
};

inline Window make_window(SampledSignal s, WindowKind kind) {
    const double nrm = lp_norm(s, 2.0);
    if (!(nrm > 0.0)) throw StructuralError("Window: window must be nonzero");
    return {std::move(s), kind, nrm};
}

/// exp(-|t|^2 / (2 width^2)), L2-normalized unless `normalized` is false.
inline Window gaussian_window(const Grid& g, double width = 1.0, bool normalized = true) {
    if (!(width > 0.0)) throw PreconditionError("gaussian_window: width must be positive");
    auto s = SampledSignal::sample(g, [&](const Point& t) {
        const double r2 = t[0] * t[0] + t[1] * t[1];
        return cplx(std::exp(-r2 / (2.0 * width * width)), 0.0);
    });
    if (normalized) s *= 1.0 / lp_norm(s, 2.0);
    return make_window(std::move(s), WindowKind::gaussian);
}

/// Compactly supported C^inf bump exp(-1/(1 - |t/radius|^2)), L2-normalized.
inline Window bump_window(const Grid& g, double radius = 2.5) {
    if (!(radius > 0.0) || radius >= g.half_length()) {
        throw PreconditionError("bump_window: radius must lie in (0, L)");
    }
    auto s = SampledSignal::sample(g, [&](const Point& t) {
        const double r = norm2(t, g.dim()) / radius;
        return cplx(r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0, 0.0);
    });
    s *= 1.0 / lp_norm(s, 2.0);
    return make_window(std::move(s), WindowKind::bump);
}

/// V_gamma f on a (position x frequency) lattice, position-major:
/// values[i * frequency_count() + k]. Positions may be decimated by `position_stride`.
struct StftField {
    Grid grid;
    std::vector<cplx> values;
    WindowKind window_label = WindowKind::gaussian;
    int position_stride = 1;

    [[nodiscard]] std::size_t position_count() const {
        return values.size() / frequency_count();
    }
    [[nodiscard]] std::size_t frequency_count() const { return grid.size(); }
    [[nodiscard]] cplx at(std::size_t pos, std::size_t freq) const {
        return values[pos * frequency_count() + freq];
    }
    [[nodiscard]] double position_cell() const {
        return std::pow(grid.dx() * position_stride, grid.dim());
    }
    [[nodiscard]] double frequency_cell() const { return grid.frequency_cell_volume(); }
};

namespace detail {

// Accumulates the inner x-integral of |V|^p for every frequency; rows are
// added one position at a time. Blocks merge in a fixed order.
class MixedNormAccumulator {
public:
    MixedNormAccumulator(std::size_t frequencies, double p)
        : p_(p), sums_(frequencies), maxima_(frequencies, 0.0) {}

    void add_row(const cplx* row) {
        for (std::size_t k = 0; k < sums_.size(); ++k) add(k, row[k]);
    }
    void add(std::size_t k, cplx v) {
        const double a = std::abs(v);
        if (std::isinf(p_)) {
            maxima_[k] = std::max(maxima_[k], a);
        } else {
            sums_[k] += (p_ == 2.0) ? std::norm(v) : std::pow(a, p_);
        }
    }
    void merge(const MixedNormAccumulator& o) {
        for (std::size_t k = 0; k < sums_.size(); ++k) {
            sums_[k] += o.sums_[k].value();
            maxima_[k] = std::max(maxima_[k], o.maxima_[k]);
        }
    }
    [[nodiscard]] double finish(double position_cell, double frequency_cell, double q) const {
        CompensatedSum outer;
        double outer_max = 0.0;
        for (std::size_t k = 0; k < sums_.size(); ++k) {
            const double inner = std::isinf(p_) ? maxima_[k]
                                                : std::pow(sums_[k].value() * position_cell, 1.0 / p_);
            if (std::isinf(q)) {
                outer_max = std::max(outer_max, inner);
            } else {
                outer += (q == p_) ? sums_[k].value() * position_cell : std::pow(inner, q);
            }
        }
        if (std::isinf(q)) return outer_max;
        return std::pow(outer.value() * frequency_cell, 1.0 / q);
    }

private:
    double p_;
    std::vector<CompensatedSum> sums_;
    std::vector<double> maxima_;
};

inline void require_pq(const ExponentPair& e) {
    if (e.p() < 1.0 || e.q() < 1.0) throw PreconditionError("mixed norm: p, q must be >= 1");
}

// Row of the dense STFT at position index `pos`: dft of f(t) conj(gamma(t - x_pos)).
inline void stft_row(const SampledSignal& f, const Window& w, std::size_t pos, std::vector<cplx>& row) {
    const Grid& g = f.grid;
    const int n = g.points_per_axis();
    const auto pi = g.unflatten(pos);
    row.resize(g.size());
    for (std::size_t t = 0; t < g.size(); ++t) {
        auto ti = g.unflatten(t);
        ti[0] = wrap(static_cast<long long>(ti[0]) - pi[0] + n / 2, n);
        if (g.dim() == 2) ti[1] = wrap(static_cast<long long>(ti[1]) - pi[1] + n / 2, n);
        row[t] = f.values[t] * std::conj(w.signal.values[g.flatten(ti)]);
    }
    auto spec = samples_to_spectrum(g, row);
    const double cell = g.cell_volume();
    for (std::size_t k = 0; k < g.size(); ++k) row[k] = spec[k] * cell;
}

inline void require_window(const SampledSignal& f, const Window& w, const char* what) {
    require_same_grid(f.grid, w.signal.grid, what);
    if (f.domain != Domain::space) throw StructuralError(std::string(what) + ": space-domain input required");
}

inline constexpr std::size_t kNormBlocks = 16;

}  // namespace detail

/// Dense STFT: V(x_i, xi_k) = sum_t f(t) conj(exp(i xi_k t) gamma(t - x_i)) dx^n.
inline StftField stft(const SampledSignal& f, const Window& w, int parallel = 1) {
    detail::require_window(f, w, "stft");
    const Grid& g = f.grid;
    std::vector<cplx> values(g.size() * g.size());
    parallel_for(g.size(), parallel, [&](std::size_t pos) {
        std::vector<cplx> row;
        detail::stft_row(f, w, pos, row);
        std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(pos * g.size()));
    });
    return {g, std::move(values), w.label, 1};
}

/// (int (int |F|^p dx)^{q/p} dxi)^{1/q}, x inner, xi outer; infinite exponents use suprema.
inline double mixed_lpq_norm(const StftField& F, const ExponentPair& e) {
    detail::require_pq(e);
    detail::MixedNormAccumulator acc(F.frequency_count(), e.p());
    for (std::size_t i = 0; i < F.position_count(); ++i) acc.add_row(&F.values[i * F.frequency_count()]);
    return acc.finish(F.position_cell(), F.frequency_cell(), e.q());
}

/// ||V_gamma f||_{L^{p,q}} streamed row by row without storing the field.
inline double modulation_norm(const SampledSignal& f, const Window& w, const ExponentPair& e,
                              int parallel = 1) {
    detail::require_window(f, w, "modulation_norm");
    detail::require_pq(e);
    const Grid& g = f.grid;
    const std::size_t rows = g.size();
    const std::size_t blocks = std::min(detail::kNormBlocks, rows);
    std::vector<detail::MixedNormAccumulator> partial(blocks, detail::MixedNormAccumulator(g.size(), e.p()));
    parallel_for(blocks, parallel, [&](std::size_t b) {
        std::vector<cplx> row;
        for (std::size_t pos = b * rows / blocks; pos < (b + 1) * rows / blocks; ++pos) {
            detail::stft_row(f, w, pos, row);
            partial[b].add_row(row.data());
        }
    });
    for (std::size_t b = 1; b < blocks; ++b) partial[0].merge(partial[b]);
    return partial[0].finish(g.cell_volume(), g.frequency_cell_volume(), e.q());
}

/// Frequency-side STFT for large one-dimensional grids.
///
/// V(x, xi_k) = (2pi)^{-1} dxi sum_s hat f(xi_k + zeta_s) conj(hat gamma(zeta_s)) exp(i zeta_s x),
/// which is exact on the lattice. The window transform is truncated where it
/// drops below `window_tolerance` of its peak, and positions are decimated to
/// `positions` equispaced points evaluated with one length-`positions` FFT per row.
class DecimatedStft {
public:
    /// Rows whose window footprint only sees spectrum at or below `spectrum_floor`
    /// times the spectral peak are skipped in norms; 0 skips exact zeros only.
    DecimatedStft(const Window& w, int positions, double window_tolerance = 1e-15, double spectrum_floor = 0.0)
        : grid_(w.signal.grid), label_(w.label), positions_(positions), spectrum_floor_(spectrum_floor) {
        if (grid_.dim() != 1) throw StructuralError("DecimatedStft: one-dimensional grids only");
        const int n = grid_.points_per_axis();
        if (positions_ < 2 || n % positions_ != 0) {
            throw PreconditionError("DecimatedStft: positions must divide N");
        }
        const auto G = dft(w.signal).values;
        double peak = 0.0;
        for (const auto& z : G) peak = std::max(peak, std::abs(z));
        half_width_ = 0;
        for (int j = 0; j < n; ++j) {
            if (std::abs(G[static_cast<std::size_t>(j)]) > window_tolerance * peak) {
                half_width_ = std::max(half_width_, std::abs(grid_.frequency_index(j)));
            }
        }
        if (half_width_ >= n / 2 - 1) {
            throw PreconditionError("DecimatedStft: window is not concentrated in frequency");
        }
        taps_.resize(static_cast<std::size_t>(2 * half_width_ + 1));
        for (int s = -half_width_; s <= half_width_; ++s) {
            const double sign = (s % 2 == 0) ? 1.0 : -1.0;
            taps_[static_cast<std::size_t>(s + half_width_)] =
                sign * std::conj(G[static_cast<std::size_t>(s + n / 2)]) * grid_.dxi() / kTwoPi;
        }
    }

    [[nodiscard]] int half_width() const { return half_width_; }
    [[nodiscard]] int positions() const { return positions_; }
    [[nodiscard]] int stride() const { return grid_.points_per_axis() / positions_; }

    /// Row of V at frequency index k (ascending) over the decimated positions.
    void row(const std::vector<cplx>& fhat, int k, std::vector<cplx>& out) const {
        const int n = grid_.points_per_axis();
        out.assign(static_cast<std::size_t>(positions_), cplx{});
        for (int s = -half_width_; s <= half_width_; ++s) {
            const cplx v = fhat[static_cast<std::size_t>(detail::wrap(k + s, n))];
            if (v == cplx{}) continue;
            out[static_cast<std::size_t>(detail::wrap(s, positions_))] +=
                v * taps_[static_cast<std::size_t>(s + half_width_)];
        }
        fft::backward(out, 1, positions_);
    }

    [[nodiscard]] StftField field(const SampledSignal& f) const {
        check(f);
        const auto fhat = dft(f).values;
        const std::size_t nf = grid_.size();
        std::vector<cplx> values(static_cast<std::size_t>(positions_) * nf);
        std::vector<cplx> r;
        for (std::size_t k = 0; k < nf; ++k) {
            row(fhat, static_cast<int>(k), r);
            for (int i = 0; i < positions_; ++i) values[static_cast<std::size_t>(i) * nf + k] = r[static_cast<std::size_t>(i)];
        }
        return {grid_, std::move(values), label_, stride()};
    }

    [[nodiscard]] double norm(const SampledSignal& f, const ExponentPair& e) const {
        check(f);
        return norm_from_spectrum(dft(f).values, e);
    }

    /// Mixed norm from the Riemann-sum transform hat f (ascending order).
    [[nodiscard]] double norm_from_spectrum(const std::vector<cplx>& fhat, const ExponentPair& e) const {
        detail::require_pq(e);
        const std::size_t nf = grid_.size();
        const double pos_cell = grid_.dx() * stride();
        CompensatedSum outer;
        double outer_max = 0.0;
        std::vector<cplx> r;
        const int n = grid_.points_per_axis();
        double peak = 0.0;
        for (const auto& z : fhat) peak = std::max(peak, std::abs(z));
        const double cut = spectrum_floor_ * peak;
        std::vector<int> nonzero_before(static_cast<std::size_t>(n) + 1, 0);
        for (int j = 0; j < n; ++j) {
            nonzero_before[static_cast<std::size_t>(j) + 1] =
                nonzero_before[static_cast<std::size_t>(j)] + (std::abs(fhat[static_cast<std::size_t>(j)]) > cut ? 1 : 0);
        }
        auto touches = [&](int k) {
            const int lo = k - half_width_, hi = k + half_width_;
            if (lo >= 0 && hi < n) return nonzero_before[static_cast<std::size_t>(hi) + 1] > nonzero_before[static_cast<std::size_t>(lo)];
            return true;
        };
        for (std::size_t k = 0; k < nf; ++k) {
            if (!touches(static_cast<int>(k))) continue;
            row(fhat, static_cast<int>(k), r);
            double inner;
            if (std::isinf(e.p())) {
                inner = 0.0;
                for (const auto& z : r) inner = std::max(inner, std::abs(z));
            } else {
                CompensatedSum s;
                for (const auto& z : r) s += (e.p() == 2.0) ? std::norm(z) : std::pow(std::abs(z), e.p());
                inner = std::pow(s.value() * pos_cell, 1.0 / e.p());
            }
            if (std::isinf(e.q())) {
                outer_max = std::max(outer_max, inner);
            } else {
                outer += std::pow(inner, e.q());
            }
        }
        if (std::isinf(e.q())) return outer_max;
        return std::pow(outer.value() * grid_.dxi(), 1.0 / e.q());
    }

private:
    void check(const SampledSignal& f) const {
        require_same_grid(f.grid, grid_, "DecimatedStft");
        if (f.domain != Domain::space) throw StructuralError("DecimatedStft: space-domain input required");
    }

    Grid grid_;
    WindowKind label_;
    int positions_;
    double spectrum_floor_ = 0.0;
    int half_width_ = 0;
    std::vector<cplx> taps_;
};

/// Gabor atom M_{xi0} T_{x0} gamma.
inline SampledSignal gabor_atom(const Window& w, const Point& x0, const Point& xi0) {
    return modulate(translate(w.signal, x0), xi0);
}

struct BandNormResult {
    double value = 0.0;
    std::size_t active_bands = 0;  ///< lattice points nu whose shifted profile meets the grid band
    double min_coverage = 0.0;     ///< min over grid frequencies of |sum_nu eta(xi - nu)|
};

/// (sum_nu ||eta(D - nu) f||_{L^p}^q)^{1/q} over integer nu with eta(. - nu) nonzero on the grid.
inline BandNormResult band_norm(const SampledSignal& f, const FrequencyProfile& eta, const ExponentPair& e,
                                double coverage_floor = 1e-3) {
    if (f.domain != Domain::space) throw StructuralError("band_norm: space-domain input required");
    detail::require_pq(e);
    const Grid& g = f.grid;
    const int dim = g.dim();
    const auto fhat = dft(f);
    const int reach = static_cast<int>(std::floor(g.nyquist() + eta.radius));

    std::vector<double> coverage(g.size(), 0.0);
    CompensatedSum outer;
    double outer_max = 0.0;
    BandNormResult res;
    std::vector<cplx> piece(g.size());
    std::vector<double> weights(g.size());
    for (int n0 = -reach; n0 <= reach; ++n0) {
        for (int n1 = (dim == 2 ? -reach : 0); n1 <= (dim == 2 ? reach : 0); ++n1) {
            const Point nu{static_cast<double>(n0), static_cast<double>(n1)};
            bool any = false;
            for (std::size_t k = 0; k < g.size(); ++k) {
                const Point xi = g.frequency_at(k);
                const Point d{xi[0] - nu[0], xi[1] - nu[1]};
                weights[k] = (norm_inf(d, dim) < eta.radius) ? eta(d) : 0.0;
                if (weights[k] != 0.0) any = true;
            }
            if (!any) continue;
            ++res.active_bands;
            bool nonzero = false;
            for (std::size_t k = 0; k < g.size(); ++k) {
                coverage[k] += weights[k];
                piece[k] = weights[k] * fhat.values[k];
                if (piece[k] != cplx{}) nonzero = true;
            }
            if (!nonzero) continue;
            const double nrm = lp_norm(idft(SampledSignal(g, piece, Domain::frequency)), e.p());
            if (std::isinf(e.q())) {
                outer_max = std::max(outer_max, nrm);
            } else {
                outer += std::pow(nrm, e.q());
            }
        }
    }
    res.min_coverage = kInf;
    for (double c : coverage) res.min_coverage = std::min(res.min_coverage, std::abs(c));
    if (!(res.min_coverage >= coverage_floor)) {
        throw PreconditionError("band_norm: covering condition fails, min |sum eta(xi - nu)| = " +
                                std::to_string(res.min_coverage));
    }
    res.value = std::isinf(e.q()) ? outer_max : std::pow(outer.value(), 1.0 / e.q());
    return res;
}

}  // namespace modspace
