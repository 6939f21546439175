#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modspace/grid.hpp"
#include "modspace/numeric.hpp"
#include "modspace/parallel.hpp"
#include "modspace/profiles.hpp"
#include "modspace/symbols.hpp"

namespace modspace {

/// Radial bump phi(xi) = c exp(-1/(1 - |8 xi|^2)) on |xi| < 1/8 with
/// integral one, and its inverse Fourier transform Phi, tabulated on
/// [0, y_max] with Hermite interpolation.
class BumpTransform {
public:
    static constexpr double kRadius = 0.125;

    explicit BumpTransform(int dim = 1, double y_max = 140.0, double spacing = 0.01, int nodes = 1024)
        : dim_(dim), h_(spacing), y_max_(y_max) {
        if (dim != 1 && dim != 2) throw PreconditionError("BumpTransform: dim must be 1 or 2");
        if (!(spacing > 0.0) || !(y_max > 0.0) || nodes < 64) throw PreconditionError("BumpTransform: bad table");

        // Trapezoid nodes on (0, 1/8); the integrand vanishes to all orders at the ends.
        const double dr = kRadius / nodes;
        std::vector<double> r(static_cast<std::size_t>(nodes)), w(r.size());
        for (int i = 0; i < nodes; ++i) {
            r[static_cast<std::size_t>(i)] = (i + 0.5) * dr;
            w[static_cast<std::size_t>(i)] = raw(r[static_cast<std::size_t>(i)]) * dr;
        }
        // mass = int phi over R^n
        CompensatedSum mass;
        for (std::size_t i = 0; i < r.size(); ++i) mass.add(dim == 1 ? 2.0 * w[i] : kTwoPi * r[i] * w[i]);
        c_ = 1.0 / mass.value();
        for (auto& x : w) x *= c_;

        const std::size_t count = static_cast<std::size_t>(std::ceil(y_max / spacing)) + 2;
        value_.resize(count);
        slope_.resize(count);
        for (std::size_t t = 0; t < count; ++t) {
            const double y = static_cast<double>(t) * spacing;
            CompensatedSum v, d, im;
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (dim == 1) {
                    // (1/2pi) int_{-1/8}^{1/8} e^{iy xi} phi: cosine part doubles, sine parts cancel pairwise
                    v.add(2.0 * std::cos(y * r[i]) * w[i] / kTwoPi);
                    d.add(-2.0 * r[i] * std::sin(y * r[i]) * w[i] / kTwoPi);
                    im.add((std::sin(y * r[i]) + std::sin(-y * r[i])) * w[i] / kTwoPi);
                } else {
                    v.add(std::cyl_bessel_j(0.0, y * r[i]) * r[i] * w[i] / kTwoPi);
                    d.add(-std::cyl_bessel_j(1.0, y * r[i]) * r[i] * r[i] * w[i] / kTwoPi);
                }
            }
            value_[t] = v.value();
            slope_[t] = d.value();
            imag_residue_ = std::max(imag_residue_, std::abs(im.value()));
        }
    }

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] double y_max() const { return y_max_; }
    [[nodiscard]] double normalization() const { return c_; }
    /// Largest |Im Phi| seen while tabulating; Phi is real because phi is radial.
    [[nodiscard]] double imag_residue() const { return imag_residue_; }

    /// phi itself (radial argument).
    [[nodiscard]] double phi(double r) const { return c_ * raw(r); }

    /// Phi at radial argument r = |y|. Throws past y_max.
    [[nodiscard]] double operator()(double r) const {
        r = std::abs(r);
        const double u = r / h_;
        const auto t = static_cast<std::size_t>(u);
        if (t + 1 >= value_.size()) {
            if (r > y_max_) throw PreconditionError("BumpTransform: argument beyond the tabulated range");
            return value_.back();
        }
        const double s = u - static_cast<double>(t);
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * value_[t] + (s3 - 2 * s2 + s) * h_ * slope_[t] +
               (-2 * s3 + 3 * s2) * value_[t + 1] + (s3 - s2) * h_ * slope_[t + 1];
    }

private:
    static double raw(double r) {
        const double z = 8.0 * r;
        if (z >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - z * z));
    }

    int dim_;
    double h_;
    double y_max_;
    double c_ = 1.0;
    double imag_residue_ = 0.0;
    std::vector<double> value_, slope_;
};

/// Which of the admissibility inequalities for j0 fails, if any.
/// Comparisons are made on log2 scales; the last inequality can hold with equality.
inline std::optional<std::string> j0_violation(int j0, double delta, int dim, bool require_moment_condition = true) {
    constexpr double tol = 1e-12;
    const double e = j0 * (delta - 1.0) + 1.0;  // log2 of 2^{j0(delta-1)+1}
    const double t = std::exp2(e);
    if (!(std::log2(1.0 + t) <= 0.25 + tol)) return "1 + 2^{j0(delta-1)+1} <= 2^{1/4}";
    if (!(1.0 - t > 0.0 && std::log2(1.0 - t) >= -0.25 - tol)) return "1 - 2^{j0(delta-1)+1} >= 2^{-1/4}";
    if (!(-j0 * delta / 2.0 + 0.5 * std::log2(static_cast<double>(dim)) <= -3.0 + tol)) {
        return "2^{-j0 delta/2} sqrt(n) <= 2^{-3}";
    }
    if (require_moment_condition && !(e + 1.0 < -0.5)) return "2^{j0(delta-1)+2} < 2^{-1/2}";
    return std::nullopt;
}

inline int minimal_j0(double delta, int dim, bool require_moment_condition = true) {
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("minimal_j0: delta must lie in (0, 1)");
    if (dim < 1) throw PreconditionError("minimal_j0: dim must be positive");
    for (int j0 = 1; j0 < 100000; ++j0) {
        if (!j0_violation(j0, delta, dim, require_moment_condition)) return j0;
    }
    throw PreconditionError("minimal_j0: no admissible j0");
}

struct CounterexampleParams {
    double m = 0.0;
    double delta = 0.5;
    int dim = 1;
    int j0 = 0;     ///< 0 selects minimal_j0
    int j_max = 0;  ///< last band kept; 0 selects j0

    /// Fills defaults and checks admissibility.
    [[nodiscard]] CounterexampleParams resolved() const {
        CounterexampleParams r = *this;
        if (!std::isfinite(m)) throw PreconditionError("CounterexampleParams: m must be finite");
        if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("CounterexampleParams: delta must lie in (0, 1)");
        if (dim != 1 && dim != 2) throw PreconditionError("CounterexampleParams: dim must be 1 or 2");
        if (r.j0 == 0) r.j0 = minimal_j0(delta, dim);
        if (auto v = j0_violation(r.j0, delta, dim)) {
            throw PreconditionError("CounterexampleParams: j0 = " + std::to_string(r.j0) + " violates " + *v);
        }
        if (r.j_max == 0) r.j_max = r.j0;
        if (r.j_max < r.j0) throw PreconditionError("CounterexampleParams: j_max < j0");
        return r;
    }
};

/// sigma(x, xi) = sum_{j=j0}^{j_max} 2^{jm} a_j(x) eta(2^{-j} xi) with
/// a_j(x) = sum_{0<|k|<=s_j} e^{-i k.(s_j x - k)} Phi(s_j x - k), s_j = 2^{j delta/2}.
class CounterexampleSymbol {
public:
    explicit CounterexampleSymbol(const CounterexampleParams& cp, std::shared_ptr<const BumpTransform> Phi = nullptr)
        : cp_(cp.resolved()), Phi_(std::move(Phi)) {
        if (!Phi_) Phi_ = std::make_shared<BumpTransform>(cp_.dim);
        if (Phi_->dim() != cp_.dim) throw StructuralError("CounterexampleSymbol: Phi dimension mismatch");
    }

    [[nodiscard]] const CounterexampleParams& params() const { return cp_; }
    [[nodiscard]] const BumpTransform& Phi() const { return *Phi_; }
    [[nodiscard]] SymbolClassParams class_params() const { return {cp_.m, 1.0, cp_.delta}; }

    [[nodiscard]] double scale(int j) const { return std::exp2(j * cp_.delta / 2.0); }

    /// Lattice points 0 < |k| <= s_j.
    [[nodiscard]] std::vector<std::array<int, 2>> lattice(int j) const {
        const double s = scale(j);
        const int r = static_cast<int>(std::floor(s + 1e-12));
        std::vector<std::array<int, 2>> ks;
        for (int a = -r; a <= r; ++a) {
            for (int b = (cp_.dim == 2 ? -r : 0); b <= (cp_.dim == 2 ? r : 0); ++b) {
                const double n2 = static_cast<double>(a) * a + static_cast<double>(b) * b;
                if (n2 == 0.0 || std::sqrt(n2) > s + 1e-12) continue;
                ks.push_back({a, b});
            }
        }
        return ks;
    }

    /// e^{-i k.y} for the band argument y = s_j x - k.
    [[nodiscard]] static cplx modulation(const std::array<int, 2>& k, const Point& y, int dim) {
        double ph = k[0] * y[0];
        if (dim == 2) ph += k[1] * y[1];
        return std::polar(1.0, -ph);
    }

    /// The x-dependent factor of band j, restricted to one lattice point.
    [[nodiscard]] cplx band_term(int j, const std::array<int, 2>& k, const Point& x) const {
        const double s = scale(j);
        const Point y{s * x[0] - k[0], cp_.dim == 2 ? s * x[1] - k[1] : 0.0};
        return modulation(k, y, cp_.dim) * (*Phi_)(norm2(y, cp_.dim));
    }

    [[nodiscard]] cplx band_factor(int j, const Point& x) const { return band_factor(j, lattice(j), x); }
    [[nodiscard]] cplx band_factor(int j, const std::vector<std::array<int, 2>>& ks, const Point& x) const {
        cplx v = 0.0;
        for (const auto& k : ks) v += band_term(j, k, x);
        return v;
    }

    [[nodiscard]] double band_profile(int j, const Point& xi) const {
        const double r = norm2(xi, cp_.dim) * std::ldexp(1.0, -j);
        const double e = eta_annulus_value(r);
        return e == 0.0 ? 0.0 : std::exp2(j * cp_.m) * e;
    }

    [[nodiscard]] cplx operator()(const Point& x, const Point& xi) const {
        cplx v = 0.0;
        for (int j = cp_.j0; j <= cp_.j_max; ++j) {
            const double b = band_profile(j, xi);
            if (b != 0.0) v += b * band_factor(j, x);
        }
        return v;
    }

    /// Samples on a grid as one separable term per band.
    [[nodiscard]] SeparableSymbol on_grid(const Grid& g, int parallel = 1) const {
        if (g.dim() != cp_.dim) throw StructuralError("counterexample_symbol: grid dimension mismatch");
        const double top = g.nyquist() * (cp_.dim == 2 ? std::sqrt(2.0) : 1.0);
        if (std::exp2(cp_.j_max - 0.5) >= top) {
            throw PreconditionError("counterexample_symbol: band j_max = " + std::to_string(cp_.j_max) +
                                    " lies above the grid's frequencies");
        }
        SeparableSymbol out{g, class_params(), SymbolProvenance::counterexample, {}, {}};
        out.terms.resize(static_cast<std::size_t>(cp_.j_max - cp_.j0 + 1));
        parallel_for(out.terms.size(), parallel, [&](std::size_t t) {
            const int j = cp_.j0 + static_cast<int>(t);
            auto& term = out.terms[t];
            const auto ks = lattice(j);
            term.a.resize(g.size());
            term.b.resize(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                term.a[i] = band_factor(j, ks, g.position_at(i));
                term.b[i] = band_profile(j, g.frequency_at(i));
            }
        });
        const bool exact = std::exp2(cp_.j_max + 0.5) >= top;
        out.note = "j0=" + std::to_string(cp_.j0) + " j_max=" + std::to_string(cp_.j_max) +
                   (exact ? " truncation exact on grid" : " warning: bands above j_max would be visible on this grid");
        return out;
    }

private:
    CounterexampleParams cp_;
    std::shared_ptr<const BumpTransform> Phi_;
};

/// Seminorm estimate straight from the closed form (n = 1), on the lattice
/// x = i x_unit, xi = k xi_unit.
inline SeminormEstimate seminorm_estimate(const CounterexampleSymbol& s, int order, const SeminormBox& box,
                                          double x_unit, double xi_unit, int h_units = 2, long stride = 1) {
    if (s.params().dim != 1) throw PreconditionError("seminorm_estimate: one-dimensional symbols only");
    if (!(x_unit > 0.0 && xi_unit > 0.0)) throw PreconditionError("seminorm_estimate: lattice units must be positive");
    const long i_lo = static_cast<long>(std::ceil(box.x_lo / x_unit - 1e-9));
    const long i_hi = static_cast<long>(std::floor(box.x_hi / x_unit + 1e-9));
    const long k_lo = static_cast<long>(std::ceil(box.xi_lo / xi_unit - 1e-9));
    const long k_hi = static_cast<long>(std::floor(box.xi_hi / xi_unit + 1e-9));
    if (i_lo > i_hi || k_lo > k_hi) throw PreconditionError("seminorm_estimate: empty box");
    auto eval = [&](long i, long k) { return s({i * x_unit, 0.0}, {k * xi_unit, 0.0}); };
    return seminorm_core(eval, s.class_params(), order, i_lo, i_hi, k_lo, k_hi, x_unit, xi_unit, h_units, stride);
}

inline SymbolGrid counterexample_symbol(const CounterexampleParams& cp, const Grid& g) {
    return CounterexampleSymbol(cp).on_grid(g).to_dense();
}

}  // namespace modspace
