#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "modspace/fft.hpp"
#include "modspace/numeric.hpp"

namespace modspace {

using Point = std::array<double, 2>;

/// Uniform periodic grid on [-L, L)^n with N points per axis.
///
/// Positions x_i = -L + i*dx, dx = 2L/N. Frequencies are the DFT nodes
/// xi_k = pi*k/L for k = -N/2 .. N/2-1, stored in ascending order: array index
/// j corresponds to k = j - N/2. With these conventions dx*dxi*N = 2*pi.
class Grid {
public:
    Grid(int dim, int points_per_axis, double half_length)
        : dim_(dim), n_(points_per_axis), half_length_(half_length) {
        if (dim_ != 1 && dim_ != 2) throw StructuralError("Grid: dimension must be 1 or 2");
        if (n_ < 2 || n_ % 2 != 0) throw StructuralError("Grid: points per axis must be even and >= 2");
        if (!(half_length_ > 0.0) || !std::isfinite(half_length_)) {
            throw StructuralError("Grid: half length must be positive");
        }
        total_ = static_cast<std::size_t>(n_);
        if (dim_ == 2) total_ *= static_cast<std::size_t>(n_);
    }

    /// Default desk-scale grid: L=16, N=512 (n=1) or L=8, N=128 (n=2).
    static Grid standard(int dim = 1) {
        return dim == 1 ? Grid(1, 512, 16.0) : Grid(2, 128, 8.0);
    }

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int points_per_axis() const { return n_; }
    [[nodiscard]] double half_length() const { return half_length_; }
    [[nodiscard]] std::size_t size() const { return total_; }
    [[nodiscard]] double dx() const { return 2.0 * half_length_ / n_; }
    [[nodiscard]] double dxi() const { return kPi / half_length_; }
    [[nodiscard]] double cell_volume() const { return std::pow(dx(), dim_); }
    [[nodiscard]] double frequency_cell_volume() const { return std::pow(dxi(), dim_); }
    /// Largest |xi| component represented (the Nyquist node sits at -N/2).
    [[nodiscard]] double nyquist() const { return kPi * (n_ / 2) / half_length_; }

    [[nodiscard]] double position(int i) const { return -half_length_ + i * dx(); }
    [[nodiscard]] int frequency_index(int j) const { return j - n_ / 2; }
    [[nodiscard]] double frequency(int j) const { return dxi() * frequency_index(j); }

    /// Axis indices of a flat (row-major) index.
    [[nodiscard]] std::array<int, 2> unflatten(std::size_t flat) const {
        if (dim_ == 1) return {static_cast<int>(flat), 0};
        return {static_cast<int>(flat / static_cast<std::size_t>(n_)),
                static_cast<int>(flat % static_cast<std::size_t>(n_))};
    }
    [[nodiscard]] std::size_t flatten(std::array<int, 2> idx) const {
        if (dim_ == 1) return static_cast<std::size_t>(idx[0]);
        return static_cast<std::size_t>(idx[0]) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(idx[1]);
    }
    [[nodiscard]] Point position_at(std::size_t flat) const {
        const auto idx = unflatten(flat);
        return {position(idx[0]), dim_ == 2 ? position(idx[1]) : 0.0};
    }
    [[nodiscard]] Point frequency_at(std::size_t flat) const {
        const auto idx = unflatten(flat);
        return {frequency(idx[0]), dim_ == 2 ? frequency(idx[1]) : 0.0};
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_length_ == b.half_length_;
    }

private:
    int dim_;
    int n_;
    double half_length_;
    std::size_t total_ = 0;
};

inline double norm2(const Point& p, int dim) {
    return dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}
inline double norm_inf(const Point& p, int dim) {
    return dim == 1 ? std::abs(p[0]) : std::max(std::abs(p[0]), std::abs(p[1]));
}
inline double dot(const Point& a, const Point& b, int dim) {
    return dim == 1 ? a[0] * b[0] : a[0] * b[0] + a[1] * b[1];
}

enum class Domain { space, frequency };

/// Complex samples on a grid, either at positions or at frequency nodes.
struct SampledSignal {
    Grid grid;
    std::vector<cplx> values;
    Domain domain = Domain::space;

    SampledSignal(Grid g, std::vector<cplx> v, Domain d = Domain::space)
        : grid(g), values(std::move(v)), domain(d) {
        if (values.size() != grid.size()) {
            throw StructuralError("SampledSignal: expected " + std::to_string(grid.size()) +
                                  " values, got " + std::to_string(values.size()));
        }
        for (const auto& z : values) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                throw StructuralError("SampledSignal: non-finite sample");
            }
        }
    }

    static SampledSignal zeros(const Grid& g, Domain d = Domain::space) {
        return {g, std::vector<cplx>(g.size()), d};
    }

    /// Samples fn at every position (space) or frequency node (frequency).
    template <class Fn>
    static SampledSignal sample(const Grid& g, Fn&& fn, Domain d = Domain::space) {
        std::vector<cplx> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            v[i] = fn(d == Domain::space ? g.position_at(i) : g.frequency_at(i));
        }
        return {g, std::move(v), d};
    }

    [[nodiscard]] double cell_volume() const {
        return domain == Domain::space ? grid.cell_volume() : grid.frequency_cell_volume();
    }

    SampledSignal& operator*=(cplx c) {
        for (auto& z : values) z *= c;
        return *this;
    }
    SampledSignal& operator+=(const SampledSignal& o) {
        if (!(grid == o.grid) || domain != o.domain) throw StructuralError("signal sum: grid mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
        return *this;
    }
    friend SampledSignal operator*(cplx c, SampledSignal s) { return s *= c; }
    friend SampledSignal operator+(SampledSignal a, const SampledSignal& b) { return a += b; }
    friend SampledSignal operator-(SampledSignal a, const SampledSignal& b) {
        return a += (-1.0) * b;
    }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw StructuralError(std::string(what) + ": grid mismatch");
}

namespace detail {

// Index permutation between ascending frequency order and FFT order: per axis
// fft_index = (j + N/2) mod N. For even N this map is an involution.
inline std::size_t fft_order(const Grid& g, std::size_t flat) {
    const int n = g.points_per_axis();
    auto idx = g.unflatten(flat);
    idx[0] = (idx[0] + n / 2) % n;
    if (g.dim() == 2) idx[1] = (idx[1] + n / 2) % n;
    return g.flatten(idx);
}

// (-1)^(k_1 + ... + k_n) for the frequency node at ascending flat index.
inline double alternating_sign(const Grid& g, std::size_t flat) {
    const auto idx = g.unflatten(flat);
    int s = g.frequency_index(idx[0]);
    if (g.dim() == 2) s += g.frequency_index(idx[1]);
    return (s % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace detail

/// F(xi_k) = sum_l f(x_l) exp(-i xi_k . x_l), unnormalized, ascending order.
inline std::vector<cplx> samples_to_spectrum(const Grid& g, std::span<const cplx> f) {
    if (f.size() != g.size()) throw StructuralError("samples_to_spectrum: length mismatch");
    std::vector<cplx> tmp(f.begin(), f.end());
    fft::forward(tmp, g.dim(), g.points_per_axis());
    std::vector<cplx> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        out[j] = detail::alternating_sign(g, j) * tmp[detail::fft_order(g, j)];
    }
    return out;
}

/// s(x_l) = sum_k c(xi_k) exp(+i xi_k . x_l), unnormalized.
inline std::vector<cplx> spectrum_to_samples(const Grid& g, std::span<const cplx> c) {
    if (c.size() != g.size()) throw StructuralError("spectrum_to_samples: length mismatch");
    std::vector<cplx> tmp(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        tmp[detail::fft_order(g, j)] = detail::alternating_sign(g, j) * c[j];
    }
    fft::backward(tmp, g.dim(), g.points_per_axis());
    return tmp;
}

/// t(x_l) = sum_k c(xi_k) exp(-i xi_k . x_l); the row transform used by quantization.
inline std::vector<cplx> spectrum_to_samples_conj_phase(const Grid& g, std::span<const cplx> c) {
    if (c.size() != g.size()) throw StructuralError("spectrum_to_samples_conj_phase: length mismatch");
    std::vector<cplx> tmp(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        tmp[detail::fft_order(g, j)] = detail::alternating_sign(g, j) * c[j];
    }
    fft::forward(tmp, g.dim(), g.points_per_axis());
    return tmp;
}

/// Riemann-sum Fourier transform: hat f(xi_k) = sum_l exp(-i xi_k.x_l) f(x_l) dx^n.
inline SampledSignal dft(const SampledSignal& f) {
    if (f.domain != Domain::space) throw StructuralError("dft: input must be space-domain samples");
    auto out = samples_to_spectrum(f.grid, f.values);
    const double w = f.grid.cell_volume();
    for (auto& z : out) z *= w;
    return {f.grid, std::move(out), Domain::frequency};
}

/// Inverse with the (2 pi)^{-n} factor: f(x_l) = (2pi)^{-n} sum_k exp(i xi_k.x_l) hat f(xi_k) dxi^n.
inline SampledSignal idft(const SampledSignal& fhat) {
    if (fhat.domain != Domain::frequency) {
        throw StructuralError("idft: input must be frequency-domain samples");
    }
    auto out = spectrum_to_samples(fhat.grid, fhat.values);
    const double w = fhat.grid.frequency_cell_volume() / std::pow(kTwoPi, fhat.grid.dim());
    for (auto& z : out) z *= w;
    return {fhat.grid, std::move(out), Domain::space};
}

namespace detail {

inline int lattice_steps(double value, double spacing, const char* what) {
    const double r = value / spacing;
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(r))) {
        throw PreconditionError(std::string(what) + ": " + std::to_string(value) +
                                " is not on the lattice (spacing " + std::to_string(spacing) + ")");
    }
    return static_cast<int>(k);
}

inline int wrap(long long i, int n) {
    long long r = i % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace detail

/// T_{x0} f (t) = f(t - x0), periodic; x0 must be a multiple of dx per axis.
inline SampledSignal translate(const SampledSignal& f, const Point& x0) {
    if (f.domain != Domain::space) throw StructuralError("translate: space-domain input required");
    const Grid& g = f.grid;
    const int n = g.points_per_axis();
    const int s0 = detail::lattice_steps(x0[0], g.dx(), "translate");
    const int s1 = g.dim() == 2 ? detail::lattice_steps(x0[1], g.dx(), "translate") : 0;
    std::vector<cplx> out(g.size());
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        auto idx = g.unflatten(flat);
        idx[0] = detail::wrap(static_cast<long long>(idx[0]) - s0, n);
        if (g.dim() == 2) idx[1] = detail::wrap(static_cast<long long>(idx[1]) - s1, n);
        out[flat] = f.values[g.flatten(idx)];
    }
    return {g, std::move(out)};
}

/// M_{xi0} f (t) = exp(i xi0.t) f(t); xi0 must lie on the frequency lattice.
inline SampledSignal modulate(const SampledSignal& f, const Point& xi0) {
    if (f.domain != Domain::space) throw StructuralError("modulate: space-domain input required");
    const Grid& g = f.grid;
    const int n = g.points_per_axis();
    std::array<int, 2> k0{detail::lattice_steps(xi0[0], g.dxi(), "modulate"),
                          g.dim() == 2 ? detail::lattice_steps(xi0[1], g.dxi(), "modulate") : 0};
    // xi0*x_i = -pi*k0 + 2*pi*k0*i/N, reduced modulo N for accuracy.
    std::vector<cplx> out(g.size());
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        const auto idx = g.unflatten(flat);
        double phase = 0.0;
        int parity = 0;
        for (int a = 0; a < g.dim(); ++a) {
            const int r = detail::wrap(static_cast<long long>(k0[a]) * idx[a], n);
            phase += kTwoPi * r / n;
            parity += k0[a];
        }
        const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
        out[flat] = f.values[flat] * sign * std::polar(1.0, phase);
    }
    return {g, std::move(out)};
}

/// Result of a dilation; the flags mark a violated periodic-box precondition.
struct DilateResult {
    SampledSignal signal;
    bool wraparound = false;  ///< spatial mass near/outside the dilated box edge
    bool aliasing = false;    ///< spectral mass beyond the dilated Nyquist band
    double boundary_mass_fraction = 0.0;
    double spectral_tail_fraction = 0.0;
    [[nodiscard]] bool ok() const { return !wraparound && !aliasing; }
};

inline constexpr double kDilateMassTolerance = 1e-8;

/// Lambda_a f(x) = f(a x) by trigonometric interpolation of the samples.
///
/// The interpolant is evaluated at a*x_i; target points outside the box get 0
/// (f is taken to vanish outside [-L, L)^n). The Nyquist term is split
/// symmetrically so real band-limited input stays real.
inline DilateResult dilate(const SampledSignal& f, double a) {
    if (f.domain != Domain::space) throw StructuralError("dilate: space-domain input required");
    if (!(a > 0.0) || !std::isfinite(a)) throw PreconditionError("dilate: factor must be positive");
    const Grid& g = f.grid;
    const int n = g.points_per_axis();
    const double L = g.half_length();

    // Precondition diagnostics.
    CompensatedSum total_mass, edge_mass;
    const double inner = std::min(1.0, a) * L - 2.0 * g.dx();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double m = std::abs(f.values[i]);
        total_mass += m;
        if (norm_inf(g.position_at(i), g.dim()) >= inner) edge_mass += m;
    }
    const auto spec = samples_to_spectrum(g, f.values);
    CompensatedSum spec_total, spec_tail;
    const double band = g.nyquist() / std::max(1.0, a);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double m = std::abs(spec[j]);
        spec_total += m;
        if (norm_inf(g.frequency_at(j), g.dim()) >= band - 0.5 * g.dxi()) spec_tail += m;
    }
    const double mass_frac = total_mass.value() > 0 ? edge_mass.value() / total_mass.value() : 0.0;
    const double spec_frac = spec_total.value() > 0 ? spec_tail.value() / spec_total.value() : 0.0;

    // 1D interpolation matrix E[i][k] = w_k(a*x_i) / N.
    std::vector<cplx> interp(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const double y = a * g.position(i);
        if (y < -L || y >= L) continue;
        for (int j = 0; j < n; ++j) {
            const double xi = g.frequency(j);
            cplx w = (j == 0) ? cplx(std::cos(xi * y), 0.0) : std::polar(1.0, xi * y);
            interp[static_cast<std::size_t>(i) * n + j] = w / static_cast<double>(n);
        }
    }

    // Separable application: 1D spectrum along each axis, then E.
    std::vector<cplx> data = f.values;
    const Grid line(1, n, L);
    std::vector<cplx> buf(static_cast<std::size_t>(n));
    for (int axis = 0; axis < g.dim(); ++axis) {
        const std::size_t lines = g.size() / static_cast<std::size_t>(n);
        for (std::size_t l = 0; l < lines; ++l) {
            auto at = [&](int t) -> cplx& {
                if (g.dim() == 1) return data[static_cast<std::size_t>(t)];
                return axis == 0 ? data[static_cast<std::size_t>(t) * n + l]
                                 : data[l * n + static_cast<std::size_t>(t)];
            };
            for (int t = 0; t < n; ++t) buf[static_cast<std::size_t>(t)] = at(t);
            const auto c = samples_to_spectrum(line, buf);
            for (int i = 0; i < n; ++i) {
                cplx acc = 0.0;
                const cplx* row = &interp[static_cast<std::size_t>(i) * n];
                for (int j = 0; j < n; ++j) acc += row[j] * c[static_cast<std::size_t>(j)];
                at(i) = acc;
            }
        }
    }
    DilateResult r{SampledSignal(g, std::move(data))};
    r.boundary_mass_fraction = mass_frac;
    r.spectral_tail_fraction = spec_frac;
    r.wraparound = mass_frac > kDilateMassTolerance;
    r.aliasing = spec_frac > kDilateMassTolerance;
    return r;
}

/// (sum |f|^p cell)^{1/p}; p = infinity gives max |f|. Cell is dx^n or dxi^n by domain.
inline double lp_norm(const SampledSignal& f, double p) {
    if (!(p >= 1.0)) throw PreconditionError("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& z : f.values) m = std::max(m, std::abs(z));
        return m;
    }
    CompensatedSum s;
    for (const auto& z : f.values) s += std::pow(std::abs(z), p);
    return std::pow(s.value() * f.cell_volume(), 1.0 / p);
}

/// Weighted L2 inner product (f, g) = sum f conj(g) dx^n.
inline cplx inner_product(const SampledSignal& f, const SampledSignal& g) {
    require_same_grid(f.grid, g.grid, "inner_product");
    CompensatedSum re, im;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const cplx z = f.values[i] * std::conj(g.values[i]);
        re += z.real();
        im += z.imag();
    }
    return cplx(re.value(), im.value()) * f.cell_volume();
}

/// Random signal whose spectrum is supported in |xi|_inf <= bandwidth, with a
/// smooth spectral taper. Deterministic in the engine state.
template <class Rng>
SampledSignal random_bandlimited(const Grid& g, double bandwidth, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<cplx> spec(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double r = norm_inf(g.frequency_at(j), g.dim()) / bandwidth;
        const double re = normal(rng);
        const double im = normal(rng);
        if (r < 1.0) spec[j] = cplx(re, im) * std::exp(-1.0 / (1.0 - r * r) + 1.0);
    }
    return idft(SampledSignal(g, std::move(spec), Domain::frequency));
}

}  // namespace modspace
