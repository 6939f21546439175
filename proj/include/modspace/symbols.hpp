#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "modspace/grid.hpp"
#include "modspace/numeric.hpp"
#include "modspace/partitions.hpp"

namespace modspace {

/// Order m and type (rho, delta) of a Hoermander class S^m_{rho,delta}.
struct SymbolClassParams {
    double m = 0.0;
    double rho = 1.0;
    double delta = 0.0;

    void validate() const {
        if (!std::isfinite(m)) throw PreconditionError("SymbolClassParams: m must be finite");
        if (!(delta >= 0.0 && delta <= rho && rho <= 1.0)) {
            throw PreconditionError("SymbolClassParams: require 0 <= delta <= rho <= 1");
        }
    }
};

enum class SymbolProvenance { bessel, counterexample, custom, piece };

inline const char* provenance_name(SymbolProvenance p) {
    switch (p) {
        case SymbolProvenance::bessel: return "bessel";
        case SymbolProvenance::counterexample: return "counterexample";
        case SymbolProvenance::custom: return "custom";
        case SymbolProvenance::piece: return "piece";
    }
    return "?";
}

struct PieceTag {
    int j = 0;
    std::array<int, 2> k{};
    std::array<int, 2> l{};
};

/// Samples sigma(x_i, xi_k) on grid x frequency nodes, position-major:
/// values[i * grid.size() + k].
struct SymbolGrid {
    Grid grid;
    std::vector<cplx> values;
    SymbolClassParams params;
    SymbolProvenance provenance = SymbolProvenance::custom;
    std::optional<PieceTag> piece;
    bool empty = false;
    std::string note;

    SymbolGrid(Grid g, std::vector<cplx> v, SymbolClassParams p, SymbolProvenance prov)
        : grid(g), values(std::move(v)), params(p), provenance(prov) {
        params.validate();
        if (values.size() != grid.size() * grid.size()) throw StructuralError("SymbolGrid: wrong value count");
        for (const auto& z : values) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                throw StructuralError("SymbolGrid: non-finite value");
            }
        }
    }

    template <class Fn>
    static SymbolGrid sample(const Grid& g, SymbolClassParams p, SymbolProvenance prov, Fn&& fn) {
        std::vector<cplx> v(g.size() * g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Point x = g.position_at(i);
            for (std::size_t k = 0; k < g.size(); ++k) v[i * g.size() + k] = fn(x, g.frequency_at(k));
        }
        return {g, std::move(v), p, prov};
    }

    [[nodiscard]] cplx at(std::size_t i, std::size_t k) const { return values[i * grid.size() + k]; }
    [[nodiscard]] bool x_independent(double tol = 0.0) const {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            for (std::size_t k = 0; k < grid.size(); ++k) {
                if (std::abs(at(i, k) - at(0, k)) > tol) return false;
            }
        }
        return true;
    }
};

/// (1 + |xi|^2)^{m/2}, in S^m_{1,0}.
inline double bessel_value(const Point& xi, int dim, double m) {
    const double r = norm2(xi, dim);
    return std::pow(1.0 + r * r, 0.5 * m);
}

inline SymbolGrid bessel_symbol(double m, const Grid& g) {
    return SymbolGrid::sample(g, {m, 1.0, 0.0}, SymbolProvenance::bessel,
                              [&](const Point&, const Point& xi) { return cplx(bessel_value(xi, g.dim(), m), 0.0); });
}

/// sigma(x_i, xi_k) = sum_t a_t(x_i) b_t(xi_k): a low-rank symbol that never
/// needs the full N^n x N^n table.
struct SeparableSymbol {
    struct Term {
        std::vector<cplx> a;  ///< over positions
        std::vector<cplx> b;  ///< over frequencies (ascending)
    };

    Grid grid;
    SymbolClassParams params;
    SymbolProvenance provenance = SymbolProvenance::custom;
    std::vector<Term> terms;
    std::string note;

    [[nodiscard]] cplx at(std::size_t i, std::size_t k) const {
        cplx v = 0.0;
        for (const auto& t : terms) v += t.a[i] * t.b[k];
        return v;
    }

    [[nodiscard]] SymbolGrid to_dense() const {
        const std::size_t M = grid.size();
        std::vector<cplx> v(M * M);
        for (const auto& t : terms) {
            if (t.a.size() != M || t.b.size() != M) throw StructuralError("SeparableSymbol: term size mismatch");
            for (std::size_t i = 0; i < M; ++i) {
                if (t.a[i] == cplx{}) continue;
                for (std::size_t k = 0; k < M; ++k) v[i * M + k] += t.a[i] * t.b[k];
            }
        }
        SymbolGrid s(grid, std::move(v), params, provenance);
        s.note = note;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Finite differences

namespace detail {

struct Stencil {
    int half = 0;                 // taps at offsets -half..half (in units of h)
    std::array<double, 7> w{};    // index offset + 3
    double denom = 1.0;           // multiply by 1/(denom * h^order)
};

// Fourth-order central stencils for derivatives of order 0..4.
inline const Stencil& central_stencil(int order) {
    static const std::array<Stencil, 5> table{{
        {0, {0, 0, 0, 1, 0, 0, 0}, 1.0},
        {2, {0, 1, -8, 0, 8, -1, 0}, 12.0},
        {2, {0, -1, 16, -30, 16, -1, 0}, 12.0},
        {3, {1, -8, 13, 0, -13, 8, -1}, 8.0},
        {3, {-1, 12, -39, 56, -39, 12, -1}, 6.0},
    }};
    if (order < 0 || order > 4) throw PreconditionError("finite differences: order must be <= 4");
    return table[static_cast<std::size_t>(order)];
}

}  // namespace detail

struct SeminormBox {
    double x_lo = 0.0, x_hi = 0.0;
    double xi_lo = 0.0, xi_hi = 0.0;
};

struct SeminormEstimate {
    double value = 0.0;
    int alpha = 0;  ///< xi-derivative order at the maximizer
    int beta = 0;   ///< x-derivative order at the maximizer
    double x = 0.0;
    double xi = 0.0;
    std::size_t samples = 0;
};

/// Weighted finite-difference sup over a sampled box (one dimension).
///
/// `eval(i, k)` returns sigma at x = i * x_unit, xi = k * xi_unit (integer
/// lattice). Derivatives use step h = h_units lattice units. Sample indices are
/// multiples of `stride`, so a larger box always samples a superset.
template <class Eval>
SeminormEstimate seminorm_core(Eval&& eval, const SymbolClassParams& cls, int order, long i_lo, long i_hi,
                               long k_lo, long k_hi, double x_unit, double xi_unit, int h_units, long stride) {
    if (order < 0 || order > 4) throw PreconditionError("seminorm_estimate: derivative order must be in [0, 4]");
    if (h_units < 1 || stride < 1) throw PreconditionError("seminorm_estimate: step and stride must be positive");
    SeminormEstimate best;
    auto first = [stride](long lo) { return lo >= 0 ? (lo + stride - 1) / stride * stride : -((-lo) / stride * stride); };
    const double hx = h_units * x_unit, hxi = h_units * xi_unit;
    for (long i = first(i_lo); i <= i_hi; i += stride) {
        for (long k = first(k_lo); k <= k_hi; k += stride) {
            const double xi = k * xi_unit;
            ++best.samples;
            for (int a = 0; a <= order; ++a) {
                const auto& sa = detail::central_stencil(a);
                for (int b = 0; a + b <= order; ++b) {
                    const auto& sb = detail::central_stencil(b);
                    cplx d = 0.0;
                    for (int u = -sa.half; u <= sa.half; ++u) {
                        const double wa = sa.w[static_cast<std::size_t>(u + 3)];
                        if (wa == 0.0) continue;
                        for (int v = -sb.half; v <= sb.half; ++v) {
                            const double wb = sb.w[static_cast<std::size_t>(v + 3)];
                            if (wb == 0.0) continue;
                            d += wa * wb * eval(i + static_cast<long>(v) * h_units, k + static_cast<long>(u) * h_units);
                        }
                    }
                    d /= sa.denom * std::pow(hxi, a) * sb.denom * std::pow(hx, b);
                    const double weight = std::pow(1.0 + std::abs(xi), -(cls.m - cls.rho * a + cls.delta * b));
                    const double val = weight * std::abs(d);
                    if (val > best.value) {
                        best.value = val;
                        best.alpha = a;
                        best.beta = b;
                        best.x = i * x_unit;
                        best.xi = xi;
                    }
                }
            }
        }
    }
    return best;
}

/// Seminorm estimate for a grid symbol (n = 1). The box must keep every
/// stencil point on the grid; h is `h_units` grid spacings.
inline SeminormEstimate seminorm_estimate(const SymbolGrid& s, int order, const SeminormBox& box, int h_units = 2,
                                          long stride = 1) {
    const Grid& g = s.grid;
    if (g.dim() != 1) throw PreconditionError("seminorm_estimate: one-dimensional symbols only");
    const int n = g.points_per_axis();
    // Positions x = -L + i dx = (i - N/2) dx, so the integer lattice is shifted by N/2.
    const long half = n / 2;
    const long i_lo = static_cast<long>(std::ceil(box.x_lo / g.dx() - 1e-9));
    const long i_hi = static_cast<long>(std::floor(box.x_hi / g.dx() + 1e-9));
    const long k_lo = static_cast<long>(std::ceil(box.xi_lo / g.dxi() - 1e-9));
    const long k_hi = static_cast<long>(std::floor(box.xi_hi / g.dxi() + 1e-9));
    const long margin = 3L * h_units;
    if (i_lo - margin < -half || i_hi + margin > half - 1 || k_lo - margin < -half || k_hi + margin > half - 1 ||
        i_lo > i_hi || k_lo > k_hi) {
        throw PreconditionError("seminorm_estimate: box (with stencil margin) exceeds the grid");
    }
    auto eval = [&](long i, long k) {
        return s.at(static_cast<std::size_t>(i + half), static_cast<std::size_t>(k + half));
    };
    return seminorm_core(eval, s.params, order, i_lo, i_hi, k_lo, k_hi, g.dx(), g.dxi(), h_units, stride);
}

// ---------------------------------------------------------------------------
// Pieces and supports

/// sigma_j^{k,l} = phi(2^{-j delta} D_x - k) sigma(x, xi) phi(2^{-j delta} xi - l) psi_j(xi).
inline SymbolGrid symbol_piece(const SymbolGrid& s, const PartitionFamily& P, int j, std::array<int, 2> k,
                               std::array<int, 2> l, double delta) {
    if (j < 0) throw PreconditionError("symbol_piece: level must be nonnegative");
    const Grid& g = s.grid;
    if (P.dim != g.dim()) throw StructuralError("symbol_piece: partition dimension mismatch");
    const double scale = std::pow(2.0, -j * delta);
    const std::size_t M = g.size();

    std::vector<double> xfilter(M);
    bool x_active = false;
    for (std::size_t m = 0; m < M; ++m) {
        const Point eta = g.frequency_at(m);
        xfilter[m] = P.phi({scale * eta[0] - k[0], scale * eta[1] - k[1]});
        x_active = x_active || xfilter[m] != 0.0;
    }
    std::vector<double> xicut(M);
    bool xi_active = false;
    for (std::size_t c = 0; c < M; ++c) {
        const Point xi = g.frequency_at(c);
        xicut[c] = P.phi({scale * xi[0] - l[0], scale * xi[1] - l[1]}) * P.psi_j(j, xi);
        xi_active = xi_active || xicut[c] != 0.0;
    }

    std::vector<cplx> out(M * M);
    if (x_active && xi_active) {
        std::vector<cplx> col(M);
        for (std::size_t c = 0; c < M; ++c) {
            if (xicut[c] == 0.0) continue;
            for (std::size_t i = 0; i < M; ++i) col[i] = s.at(i, c);
            auto spec = samples_to_spectrum(g, col);
            for (std::size_t m = 0; m < M; ++m) spec[m] *= xfilter[m] / static_cast<double>(M);
            const auto back = spectrum_to_samples(g, spec);
            for (std::size_t i = 0; i < M; ++i) out[i * M + c] = back[i] * xicut[c];
        }
    }
    SymbolGrid r(g, std::move(out), s.params, SymbolProvenance::piece);
    r.piece = PieceTag{j, k, l};
    r.empty = !(x_active && xi_active);
    if (r.empty) r.note = "cutoffs disjoint from the grid band";
    return r;
}

/// Smallest j0 >= 1 with 2^{j0(1-delta)-3} >= sqrt(n).
inline int disjointness_j0(double delta, int n) {
    if (!(delta >= 0.0 && delta < 1.0)) throw PreconditionError("disjointness_j0: require 0 <= delta < 1");
    const double need = 3.0 + 0.5 * std::log2(static_cast<double>(n));
    int j0 = 1;
    while (j0 * (1.0 - delta) < need - 1e-12) ++j0;
    return j0;
}

/// Range [min |xi|, max |xi|] over the cube 2^{j delta}(l + [-1,1]^n).
inline std::array<double, 2> cube_radius_range(std::array<int, 2> l, int j, double delta, int n) {
    const double s = std::pow(2.0, j * delta);
    double lo2 = 0.0, hi2 = 0.0;
    for (int a = 0; a < n; ++a) {
        const double c0 = s * (l[static_cast<std::size_t>(a)] - 1), c1 = s * (l[static_cast<std::size_t>(a)] + 1);
        const double near = (c0 <= 0.0 && c1 >= 0.0) ? 0.0 : std::min(std::abs(c0), std::abs(c1));
        const double far = std::max(std::abs(c0), std::abs(c1));
        lo2 += near * near;
        hi2 += far * far;
    }
    return {std::sqrt(lo2), std::sqrt(hi2)};
}

/// True when the cube 2^{j delta}(l + [-1,1]^n) misses the annulus 2^{j-1} <= |xi| <= 2^{j+1}.
inline bool supports_disjoint(std::array<int, 2> l, int j, double delta, int n) {
    const auto [lo, hi] = cube_radius_range(l, j, delta, n);
    return lo > std::ldexp(1.0, j + 1) || hi < std::ldexp(1.0, j - 1);
}

/// As supports_disjoint, with the j0 precondition checked.
inline bool support_disjoint(std::array<int, 2> l, int j, double delta, int j0, int n = 1) {
    if (j0 < disjointness_j0(delta, n)) {
        throw PreconditionError("support_disjoint: j0 = " + std::to_string(j0) + " is below the admissible minimum " +
                                std::to_string(disjointness_j0(delta, n)));
    }
    return supports_disjoint(l, j, delta, n);
}

/// Smallest j >= j0 + 1 (up to j_limit) at which the two supports meet.
inline std::optional<int> level_of(std::array<int, 2> l, double delta, int j0, int n, int j_limit = 200) {
    for (int j = j0 + 1; j <= j_limit; ++j) {
        if (!supports_disjoint(l, j, delta, n)) return j;
    }
    return std::nullopt;
}

}  // namespace modspace
