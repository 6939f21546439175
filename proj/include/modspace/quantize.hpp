#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "modspace/fit.hpp"
#include "modspace/grid.hpp"
#include "modspace/numeric.hpp"
#include "modspace/parallel.hpp"
#include "modspace/partitions.hpp"
#include "modspace/symbols.hpp"
#include "modspace/tfa.hpp"

namespace modspace {

/// Dense operator on grid samples: (A f)(x_i) = sum_j A[i, j] f(x_j).
struct OperatorMatrix {
    Grid grid;
    std::vector<cplx> entries;  ///< row-major
    SymbolProvenance provenance = SymbolProvenance::custom;

    OperatorMatrix(Grid g, std::vector<cplx> e, SymbolProvenance p = SymbolProvenance::custom)
        : grid(g), entries(std::move(e)), provenance(p) {
        if (entries.size() != grid.size() * grid.size()) throw StructuralError("OperatorMatrix: wrong entry count");
    }

    static OperatorMatrix identity(const Grid& g) {
        std::vector<cplx> e(g.size() * g.size());
        for (std::size_t i = 0; i < g.size(); ++i) e[i * g.size() + i] = 1.0;
        return {g, std::move(e)};
    }

    [[nodiscard]] std::size_t size() const { return grid.size(); }
    [[nodiscard]] cplx at(std::size_t i, std::size_t j) const { return entries[i * size() + j]; }

    [[nodiscard]] std::vector<cplx> apply(std::span<const cplx> f) const {
        if (f.size() != size()) throw StructuralError("apply: length mismatch");
        std::vector<cplx> out(size());
        for (std::size_t i = 0; i < size(); ++i) {
            const cplx* row = entries.data() + i * size();
            cplx acc = 0.0;
            for (std::size_t j = 0; j < size(); ++j) acc += row[j] * f[j];
            out[i] = acc;
        }
        return out;
    }
};

namespace detail {

// exp(i x_i . xi_k) with the phase reduced exactly: x_i xi_k = pi k (2i - N) / N per axis.
inline cplx grid_phase(const Grid& g, std::size_t i, std::size_t k) {
    const int n = g.points_per_axis();
    const auto xi = g.unflatten(i);
    const auto ki = g.unflatten(k);
    long long r = 0;
    for (int a = 0; a < g.dim(); ++a) {
        r += static_cast<long long>(g.frequency_index(ki[static_cast<std::size_t>(a)])) *
             (2LL * xi[static_cast<std::size_t>(a)] - n);
    }
    const long long m = ((r % (2LL * n)) + 2LL * n) % (2LL * n);
    return std::polar(1.0, kPi * static_cast<double>(m) / n);
}

}  // namespace detail

/// Kohn-Nirenberg quantization on the grid:
/// A[i, j] = (2pi)^{-n} sum_k e^{i x_i xi_k} sigma(x_i, xi_k) e^{-i xi_k x_j} dx^n dxi^n.
inline OperatorMatrix quantize(const SymbolGrid& s, int parallel = 1) {
    const Grid& g = s.grid;
    const std::size_t M = g.size();
    const double w = g.cell_volume() * g.frequency_cell_volume() / std::pow(kTwoPi, g.dim());
    std::vector<cplx> e(M * M);
    parallel_for(M, parallel, [&](std::size_t i) {
        std::vector<cplx> c(M);
        for (std::size_t k = 0; k < M; ++k) c[k] = detail::grid_phase(g, i, k) * s.at(i, k);
        const auto row = spectrum_to_samples_conj_phase(g, c);
        for (std::size_t j = 0; j < M; ++j) e[i * M + j] = w * row[j];
    });
    return {g, std::move(e), s.provenance};
}

inline SampledSignal apply(const OperatorMatrix& A, const SampledSignal& f) {
    require_same_grid(A.grid, f.grid, "apply");
    if (f.domain != Domain::space) throw StructuralError("apply: space-domain input required");
    return {f.grid, A.apply(f.values)};
}

/// Inner-product adjoint; the quadrature weights are uniform, so this is the conjugate transpose.
inline OperatorMatrix adjoint(const OperatorMatrix& A) {
    const std::size_t M = A.size();
    std::vector<cplx> e(M * M);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < M; ++j) e[j * M + i] = std::conj(A.entries[i * M + j]);
    }
    return {A.grid, std::move(e), A.provenance};
}

/// Plain transpose: the operator with kernel K(y, x).
inline OperatorMatrix transpose(const OperatorMatrix& A) {
    const std::size_t M = A.size();
    std::vector<cplx> e(M * M);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < M; ++j) e[j * M + i] = A.entries[i * M + j];
    }
    return {A.grid, std::move(e), A.provenance};
}

inline OperatorMatrix compose(const OperatorMatrix& A, const OperatorMatrix& B) {
    require_same_grid(A.grid, B.grid, "compose");
    const std::size_t M = A.size();
    std::vector<cplx> e(M * M);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t l = 0; l < M; ++l) {
            const cplx a = A.entries[i * M + l];
            if (a == cplx{}) continue;
            const cplx* brow = B.entries.data() + l * M;
            cplx* out = e.data() + i * M;
            for (std::size_t j = 0; j < M; ++j) out[j] += a * brow[j];
        }
    }
    return {A.grid, std::move(e)};
}

/// a A + b B
inline OperatorMatrix combine(cplx a, const OperatorMatrix& A, cplx b, const OperatorMatrix& B) {
    require_same_grid(A.grid, B.grid, "combine");
    std::vector<cplx> e(A.entries.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = a * A.entries[i] + b * B.entries[i];
    return {A.grid, std::move(e)};
}

// ---------------------------------------------------------------------------
// Matrix-free operators

/// A linear map on grid samples given by its action and the action of its adjoint.
struct LinearOperator {
    Grid grid;
    std::function<std::vector<cplx>(const std::vector<cplx>&)> forward;
    std::function<std::vector<cplx>(const std::vector<cplx>&)> backward;  ///< adjoint action
    std::string label;

    [[nodiscard]] std::vector<cplx> operator()(const std::vector<cplx>& f) const { return forward(f); }
    [[nodiscard]] LinearOperator adjoint() const { return {grid, backward, forward, label + "*"}; }
};

inline LinearOperator as_operator(const OperatorMatrix& A, std::string label = "matrix") {
    auto M = std::make_shared<OperatorMatrix>(A);
    auto Mt = std::make_shared<OperatorMatrix>(modspace::adjoint(A));
    return {A.grid, [M](const std::vector<cplx>& f) { return M->apply(f); },
            [Mt](const std::vector<cplx>& f) { return Mt->apply(f); }, std::move(label)};
}

inline LinearOperator scaled_identity(const Grid& g, cplx c) {
    return {g,
            [c](const std::vector<cplx>& f) {
                auto out = f;
                for (auto& z : out) z *= c;
                return out;
            },
            [c](const std::vector<cplx>& f) {
                auto out = f;
                for (auto& z : out) z *= std::conj(c);
                return out;
            },
            "identity"};
}

/// sigma(X, D) for a separable symbol: f -> sum_t a_t . b_t(D) f, one forward
/// FFT plus one inverse FFT per term. Agrees with quantize(to_dense()).
inline LinearOperator separable_operator(const SeparableSymbol& s) {
    auto sym = std::make_shared<SeparableSymbol>(s);
    const Grid g = s.grid;
    const double inv = 1.0 / static_cast<double>(g.size());
    auto fwd = [sym, g, inv](const std::vector<cplx>& f) {
        if (f.size() != g.size()) throw StructuralError("separable_operator: length mismatch");
        const auto fh = samples_to_spectrum(g, f);
        std::vector<cplx> out(g.size()), tmp(g.size());
        for (const auto& t : sym->terms) {
            for (std::size_t k = 0; k < g.size(); ++k) tmp[k] = t.b[k] * fh[k];
            const auto back = spectrum_to_samples(g, tmp);
            for (std::size_t i = 0; i < g.size(); ++i) out[i] += t.a[i] * back[i] * inv;
        }
        return out;
    };
    auto bwd = [sym, g, inv](const std::vector<cplx>& f) {
        if (f.size() != g.size()) throw StructuralError("separable_operator: length mismatch");
        std::vector<cplx> out(g.size()), tmp(g.size());
        for (const auto& t : sym->terms) {
            for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = std::conj(t.a[i]) * f[i];
            auto fh = samples_to_spectrum(g, tmp);
            for (std::size_t k = 0; k < g.size(); ++k) fh[k] *= std::conj(t.b[k]);
            const auto back = spectrum_to_samples(g, fh);
            for (std::size_t i = 0; i < g.size(); ++i) out[i] += back[i] * inv;
        }
        return out;
    };
    return {g, fwd, bwd, provenance_name(s.provenance)};
}

/// Largest singular value by power iteration on A* A from a seeded start.
inline double l2_norm(const LinearOperator& A, std::uint64_t seed = 1, int max_iter = 500, double tol = 1e-12) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<cplx> v(A.grid.size());
    for (auto& z : v) z = cplx(normal(rng), normal(rng));
    auto nrm = [](const std::vector<cplx>& x) {
        CompensatedSum s;
        for (const auto& z : x) s.add(std::norm(z));
        return std::sqrt(s.value());
    };
    double est = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double nv = nrm(v);
        if (nv == 0.0) return 0.0;
        for (auto& z : v) z /= nv;
        const auto w = A.backward(A.forward(v));
        const double next = std::sqrt(nrm(w));
        v = w;
        if (std::abs(next - est) <= tol * next) return next;
        est = next;
    }
    return est;
}

inline double l2_norm(const OperatorMatrix& A, std::uint64_t seed = 1) { return l2_norm(as_operator(A), seed); }

// ---------------------------------------------------------------------------
// Kernels

/// K(x_i, y_j) = A[i, j] / dx^n, with the diagonal band |x - y| < mask_radius
/// (periodic distance) excluded from bound checks.
struct KernelField {
    Grid grid;
    std::vector<cplx> K;
    double mask_radius = 0.0;

    [[nodiscard]] std::size_t size() const { return grid.size(); }
    [[nodiscard]] cplx at(std::size_t i, std::size_t j) const { return K[i * size() + j]; }

    /// Periodic distance between x_i and y_j.
    [[nodiscard]] double distance(std::size_t i, std::size_t j) const {
        const auto a = grid.unflatten(i), b = grid.unflatten(j);
        const int n = grid.points_per_axis();
        double s = 0.0;
        for (int d = 0; d < grid.dim(); ++d) {
            int r = std::abs(a[static_cast<std::size_t>(d)] - b[static_cast<std::size_t>(d)]);
            r = std::min(r, n - r);
            s += (r * grid.dx()) * (r * grid.dx());
        }
        return std::sqrt(s);
    }
    [[nodiscard]] bool masked(std::size_t i, std::size_t j) const { return distance(i, j) < mask_radius; }
};

inline KernelField kernel(const OperatorMatrix& A, double mask_units = 4.0) {
    const double inv = 1.0 / A.grid.cell_volume();
    std::vector<cplx> K(A.entries.size());
    for (std::size_t i = 0; i < K.size(); ++i) K[i] = A.entries[i] * inv;
    return {A.grid, std::move(K), mask_units * A.grid.dx()};
}

struct CzoBound {
    std::string name;
    double constant = 0.0;                ///< smallest C covering every sample
    std::vector<double> octave_distance;  ///< lower edge of each octave
    std::vector<double> octave_constant;  ///< per-octave C (0 when negligible)
    double head_slope = 0.0;              ///< log2 C per octave, first three active octaves
    double tail_slope = 0.0;              ///< log2 C per octave, last three active octaves
    int active_octaves = 0;
    bool negligible = false;
    bool pass = false;
};

struct CzoCheckReport {
    int ell = 0;
    double epsilon = 0.5;
    std::uint64_t seed = 0;
    std::string status = "inconclusive";  ///< pass | fail | inconclusive
    std::vector<CzoBound> bounds;
    double worst_violation_ratio = 0.0;   ///< max octave constant / first active octave constant
    double size_exponent = 0.0;           ///< fitted log|K| vs log|x - y| slope
    std::size_t samples = 0;
    int octaves = 0;

    [[nodiscard]] bool pass() const { return status == "pass"; }

    [[nodiscard]] std::string to_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "ell=" << ell << "\nepsilon=" << epsilon << "\nseed=" << seed << "\nstatus=" << status
           << "\nsamples=" << samples << "\noctaves=" << octaves << "\nsize_exponent=" << size_exponent
           << "\nworst_violation_ratio=" << worst_violation_ratio << "\n";
        for (const auto& b : bounds) {
            os << b.name << ".constant=" << b.constant << "\n"
               << b.name << ".head_slope=" << b.head_slope << "\n"
               << b.name << ".tail_slope=" << b.tail_slope << "\n"
               << b.name << ".active_octaves=" << b.active_octaves << "\n"
               << b.name << ".negligible=" << (b.negligible ? 1 : 0) << "\n"
               << b.name << ".pass=" << (b.pass ? 1 : 0) << "\n";
        }
        return os.str();
    }
};

struct CzoOptions {
    std::uint64_t seed = 1;
    std::size_t pairs_per_octave = 256;
    double max_trend = 0.25;          ///< allowed |log2 drift| per octave
    double negligible = 1e-9;         ///< octave constants below this fraction of the largest are ignored
    double fit_min_distance = 0.0;    ///< size-exponent fit uses octaves starting in
    double fit_max_distance = kInf;   ///< [fit_min_distance, fit_max_distance)
};

/// Off-diagonal Calderon-Zygmund checks (n = 1): size bounds
/// |d_x^a K| <= C |x-y|^{-1-a} for a <= ell and the Hoelder bound on d_x^ell K
/// with exponent epsilon, sampled over dyadic octaves of |x - y|. A bound
/// passes when its per-octave constants neither grow toward large distances
/// nor toward the diagonal by more than max_trend per octave.
inline CzoCheckReport czo_check(const KernelField& K, int ell, double epsilon, const CzoOptions& opt = {}) {
    if (K.grid.dim() != 1) throw PreconditionError("czo_check: one-dimensional kernels only");
    if (ell < 0 || ell > 2) throw PreconditionError("czo_check: ell must be 0, 1 or 2");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw PreconditionError("czo_check: epsilon must lie in (0, 1)");
    const Grid& g = K.grid;
    const int N = g.points_per_axis();
    const double dx = g.dx();
    const int mask_units = std::max(1, static_cast<int>(std::ceil(K.mask_radius / dx - 1e-9)));
    const int max_units = N / 2;

    std::vector<int> lo_units;
    for (int r = mask_units; r < max_units; r *= 2) lo_units.push_back(r);
    const std::size_t n_oct = lo_units.size();

    CzoCheckReport rep;
    rep.ell = ell;
    rep.epsilon = epsilon;
    rep.seed = opt.seed;
    rep.octaves = static_cast<int>(n_oct);

    auto deriv = [&](int order, int i, int j) {
        const auto& s = detail::central_stencil(order);
        cplx d = 0.0;
        for (int u = -s.half; u <= s.half; ++u) {
            const double w = s.w[static_cast<std::size_t>(u + 3)];
            if (w == 0.0) continue;
            d += w * K.at(static_cast<std::size_t>(detail::wrap(static_cast<long long>(i) + u, N)), static_cast<std::size_t>(j));
        }
        return d / (s.denom * std::pow(dx, order));
    };

    // bounds: size_0..size_ell, holder
    const std::size_t n_bounds = static_cast<std::size_t>(ell) + 2;
    std::vector<std::vector<double>> oc(n_bounds, std::vector<double>(n_oct, 0.0));
    std::vector<double> size_max(n_oct, 0.0);
    const int margin = 3;
    for (std::size_t o = 0; o < n_oct; ++o) {
        std::mt19937_64 rng(derive_seed(opt.seed, o));
        const int r_lo = lo_units[o];
        const int r_hi = std::min(2 * lo_units[o], max_units) - 1;
        if (r_lo > r_hi) continue;
        std::uniform_int_distribution<int> pick_i(0, N - 1), pick_r(r_lo, r_hi), coin(0, 1);
        for (std::size_t s = 0; s < opt.pairs_per_octave; ++s) {
            const int i = pick_i(rng);
            const int r = pick_r(rng);
            const int j = detail::wrap(static_cast<long long>(i) + (coin(rng) ? r : -r), N);
            const double d = r * dx;
            for (int a = 0; a <= ell; ++a) {
                if (a > 0 && r < mask_units + margin) break;  // keep the stencil off the mask
                const double q = std::abs(deriv(a, i, j)) * std::pow(d, 1.0 + a);
                oc[static_cast<std::size_t>(a)][o] = std::max(oc[static_cast<std::size_t>(a)][o], q);
                if (a == 0) size_max[o] = std::max(size_max[o], std::abs(K.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j))));
            }
            // Hoelder: |x - x'| = t dx with r > 2t, x' kept off the mask
            std::uniform_int_distribution<int> pick_t(1, std::max(1, (r - 1) / 2));
            const int t = pick_t(rng);
            if (2 * t < r && r >= mask_units + (ell > 0 ? margin : 0)) {
                const int sign = (j - i + N) % N == r ? -1 : 1;  // move x' away from y
                const int i2 = detail::wrap(static_cast<long long>(i) + sign * t, N);
                const double diff = std::abs(deriv(ell, i, j) - deriv(ell, i2, j));
                const double h = t * dx;
                const double q = diff * std::pow(d, 1.0 + ell + epsilon) / std::pow(h, epsilon);
                oc[n_bounds - 1][o] = std::max(oc[n_bounds - 1][o], q);
            }
            ++rep.samples;
        }
    }

    double kmax = 0.0;
    for (const auto& z : K.K) kmax = std::max(kmax, std::abs(z));
    bool all_pass = true, conclusive = true;
    double worst = 0.0;
    for (std::size_t b = 0; b < n_bounds; ++b) {
        CzoBound B;
        B.name = b + 1 < n_bounds ? "size" + std::to_string(b) : "holder";
        for (std::size_t o = 0; o < n_oct; ++o) B.octave_distance.push_back(lo_units[o] * dx);
        const double top = *std::max_element(oc[b].begin(), oc[b].end());
        B.constant = top;
        std::vector<double> active;
        std::vector<std::size_t> idx;
        for (std::size_t o = 0; o < n_oct; ++o) {
            if (oc[b][o] > opt.negligible * top && oc[b][o] > 0.0) {
                active.push_back(oc[b][o]);
                idx.push_back(o);
                B.octave_constant.push_back(oc[b][o]);
            } else {
                B.octave_constant.push_back(0.0);
            }
        }
        B.active_octaves = static_cast<int>(active.size());
        // globally tiny kernels (e.g. the identity) pass trivially; the natural
        // scale of a bound is its value at the mask edge for a kernel of size max|K|
        const double order = b + 1 < n_bounds ? static_cast<double>(b) : ell + epsilon;
        const double natural = kmax * K.mask_radius * std::pow(K.mask_radius / dx, order);
        if (top <= 1e-8 * natural) {
            B.negligible = true;
            B.pass = true;
        } else if (active.size() < 3) {
            conclusive = false;
        } else {
            auto slope_over = [&](std::size_t from) {
                std::vector<double> x, y;
                for (std::size_t a = from; a < from + 3; ++a) {
                    x.push_back(static_cast<double>(idx[a]));
                    y.push_back(std::log2(active[a]));
                }
                return fit_line(x, y).slope;
            };
            B.head_slope = slope_over(0);
            B.tail_slope = slope_over(active.size() - 3);
            B.pass = B.head_slope >= -opt.max_trend && B.tail_slope <= opt.max_trend;
            worst = std::max(worst, *std::max_element(active.begin(), active.end()) / active.front());
        }
        all_pass = all_pass && B.pass;
        rep.bounds.push_back(std::move(B));
    }
    rep.worst_violation_ratio = worst;

    std::vector<double> fx, fy;
    for (std::size_t o = 0; o < n_oct; ++o) {
        if (size_max[o] > 0.0 && oc[0][o] > opt.negligible * rep.bounds[0].constant &&
            lo_units[o] * dx >= opt.fit_min_distance * (1 - 1e-12) && lo_units[o] * dx < opt.fit_max_distance) {
            fx.push_back(std::log(lo_units[o] * dx));
            fy.push_back(std::log(size_max[o]));
        }
    }
    if (fx.size() >= 2) rep.size_exponent = fit_line(fx, fy).slope;

    if (!all_pass) {
        rep.status = "fail";
    } else if (!conclusive) {
        rep.status = "inconclusive";
    } else {
        rep.status = "pass";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Moments

struct MomentValue {
    int beta = 0;
    double value = 0.0;  ///< sup over the x panel of |sigma(X,D)(x^beta)(x)|
};

/// sigma(X,D)(x^beta) = (-i)^beta d_xi^beta (e^{ix xi} sigma(x, xi)) at xi = 0
/// (n = 1). The exponential is differentiated exactly by the product rule;
/// only sigma goes through finite differences, with step h_units * dxi.
inline std::vector<MomentValue> vanishing_moments(const SymbolGrid& s, int beta_max, double panel_radius = 1.0,
                                                  int h_units = 1) {
    const Grid& g = s.grid;
    if (g.dim() != 1) throw PreconditionError("vanishing_moments: one-dimensional symbols only");
    if (beta_max < 0 || beta_max > 3) throw PreconditionError("vanishing_moments: beta_max must be in [0, 3]");
    const int N = g.points_per_axis();
    const double h = h_units * g.dxi();
    if (3 * h_units >= N / 2) throw PreconditionError("vanishing_moments: stencil leaves the grid");
    std::vector<MomentValue> out;
    for (int beta = 0; beta <= beta_max; ++beta) out.push_back({beta, 0.0});
    for (int i = 0; i < N; ++i) {
        const double x = g.position(i);
        if (std::abs(x) > panel_radius) continue;
        std::array<cplx, 4> dsig{};
        for (int a = 0; a <= beta_max; ++a) {
            const auto& st = detail::central_stencil(a);
            cplx d = 0.0;
            for (int u = -st.half; u <= st.half; ++u) {
                const double w = st.w[static_cast<std::size_t>(u + 3)];
                if (w != 0.0) d += w * s.at(static_cast<std::size_t>(i), static_cast<std::size_t>(N / 2 + u * h_units));
            }
            dsig[static_cast<std::size_t>(a)] = d / (st.denom * std::pow(h, a));
        }
        for (int beta = 0; beta <= beta_max; ++beta) {
            cplx v = 0.0;
            double binom = 1.0;
            for (int a = 0; a <= beta; ++a) {
                v += binom * std::pow(cplx(0.0, x), beta - a) * dsig[static_cast<std::size_t>(a)];
                binom = binom * (beta - a) / (a + 1);
            }
            v *= std::pow(cplx(0.0, -1.0), beta);
            auto& mv = out[static_cast<std::size_t>(beta)];
            mv.value = std::max(mv.value, std::abs(v));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Piece decay

struct PieceIndex {
    int j = 0;
    int k = 0;
    int l = 0;
};

struct PieceDecayRow {
    PieceIndex index;
    bool empty = false;
    double ratio_p2 = 0.0;  ///< sup over the panel of ||T f||_2 / ||f||_2
    double ratio_p4 = 0.0;
};

struct PieceDecayReport {
    std::vector<PieceDecayRow> rows;
    double k_exponent = 0.0;  ///< slope of log ratio vs log(1 + |k|), worst over p and j
    bool k_degenerate = false;  ///< every k != 0 piece vanished: decay faster than any power
    double j_exponent = 0.0;  ///< slope of log2 ratio vs j at k = 0, worst over p
    bool j_degenerate = false;
    std::vector<std::string> notes;
};

/// Operator norms of the pieces sigma_j^{k,l}(X,D) (n = 1) over a panel of
/// seeded band-limited signals plus Gaussian atoms centred on each piece's
/// frequency tile.
inline PieceDecayReport piece_kernel_decay(const SymbolGrid& s, const PartitionFamily& P,
                                           const std::vector<PieceIndex>& sample, double delta, std::uint64_t seed = 1,
                                           int panel = 6, int parallel = 1) {
    const Grid& g = s.grid;
    if (g.dim() != 1) throw PreconditionError("piece_kernel_decay: one-dimensional symbols only");
    std::vector<SampledSignal> base;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < panel; ++t) base.push_back(random_bandlimited(g, g.nyquist(), rng));
    const auto gw = gaussian_window(g, 1.0);

    PieceDecayReport rep;
    rep.rows.resize(sample.size());
    parallel_for(sample.size(), parallel, [&](std::size_t n) {
        const auto& pi = sample[n];
        PieceDecayRow row;
        row.index = pi;
        const auto piece = symbol_piece(s, P, pi.j, {pi.k, 0}, {pi.l, 0}, delta);
        row.empty = piece.empty;
        bool zero = true;
        for (const auto& v : piece.values) zero = zero && std::abs(v) == 0.0;
        if (!piece.empty && !zero) {
            const auto A = quantize(piece);
            std::vector<SampledSignal> fam = base;
            const double centre = std::exp2(pi.j * delta) * pi.l;
            const double snapped = std::round(centre / g.dxi()) * g.dxi();
            for (double off : {-1.0, 0.0, 1.0}) {
                const double xi0 = snapped + std::round(off * std::exp2(pi.j * delta) / 2.0 / g.dxi()) * g.dxi();
                if (std::abs(xi0) < g.nyquist()) fam.push_back(gabor_atom(gw, {0.0, 0.0}, {xi0, 0.0}));
            }
            for (const auto& f : fam) {
                const auto Tf = apply(A, f);
                const double n2 = lp_norm(f, 2.0), n4 = lp_norm(f, 4.0);
                if (n2 > 0.0) row.ratio_p2 = std::max(row.ratio_p2, lp_norm(Tf, 2.0) / n2);
                if (n4 > 0.0) row.ratio_p4 = std::max(row.ratio_p4, lp_norm(Tf, 4.0) / n4);
            }
        }
        rep.rows[n] = row;
    });

    // k-decay per (j, l) group with k != 0
    std::map<std::pair<int, int>, std::array<std::vector<double>, 4>> groups;  // x2, y2, x4, y4
    bool any_k = false;
    for (const auto& r : rep.rows) {
        if (r.index.k == 0) continue;
        any_k = true;
        auto& grp = groups[{r.index.j, r.index.l}];
        const double x = 1.0 + std::abs(r.index.k);
        if (r.ratio_p2 > 0.0) {
            grp[0].push_back(x);
            grp[1].push_back(r.ratio_p2);
        }
        if (r.ratio_p4 > 0.0) {
            grp[2].push_back(x);
            grp[3].push_back(r.ratio_p4);
        }
    }
    double kexp = -kInf;
    bool any_k_nonzero = false;
    auto distinct = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return std::unique(v.begin(), v.end()) - v.begin();
    };
    for (const auto& [key, grp] : groups) {
        if (!grp[0].empty()) any_k_nonzero = true;
        if (distinct(grp[0]) >= 2) kexp = std::max(kexp, fit_loglog(grp[0], grp[1]).slope);
        if (distinct(grp[2]) >= 2) kexp = std::max(kexp, fit_loglog(grp[2], grp[3]).slope);
    }
    if (any_k && !any_k_nonzero) {
        rep.k_degenerate = true;
        rep.notes.push_back("all k != 0 pieces vanish; k-decay is faster than any power");
    }
    rep.k_exponent = kexp;

    std::vector<double> jx, j2, j4;
    for (const auto& r : rep.rows) {
        if (r.index.k != 0 || r.ratio_p2 <= 0.0 || r.ratio_p4 <= 0.0) continue;
        jx.push_back(r.index.j);
        j2.push_back(std::log2(r.ratio_p2));
        j4.push_back(std::log2(r.ratio_p4));
    }
    if (distinct(jx) >= 2) {
        rep.j_exponent = std::max(fit_line(jx, j2).slope, fit_line(jx, j4).slope);
    } else {
        rep.j_degenerate = true;
        rep.j_exponent = -kInf;
        rep.notes.push_back("fewer than two levels with nonzero k = 0 pieces");
    }
    for (const auto& r : rep.rows) {
        if (r.empty) {
            rep.notes.push_back("piece (" + std::to_string(r.index.j) + "," + std::to_string(r.index.k) + "," +
                                std::to_string(r.index.l) + ") empty, skipped");
        }
    }
    return rep;
}

}  // namespace modspace
