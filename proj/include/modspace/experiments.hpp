#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "modspace/counterexample.hpp"
#include "modspace/exponents.hpp"
#include "modspace/fit.hpp"
#include "modspace/grid.hpp"
#include "modspace/indices.hpp"
#include "modspace/opnorm.hpp"
#include "modspace/parallel.hpp"
#include "modspace/profiles.hpp"
#include "modspace/quantize.hpp"
#include "modspace/tfa.hpp"

namespace modspace {

// ---------------------------------------------------------------- dilation

enum class DilationBranch { expanding, contracting };

struct DilationScaling {
    DilationBranch branch = DilationBranch::expanding;
    std::vector<double> a_values;
    std::vector<double> ratios;  ///< ||f(a.)|| / ||f|| in M^{p,q}
    FitResult fit;               ///< log ratio against log a
    double bound = 0.0;          ///< n mu1 (expanding) or n mu2 (contracting)
    bool consistent = false;
};

inline constexpr double kDilationSlack = 0.1;

/// Fits ||f(a.)||_{M^{p,q}} / ||f||_{M^{p,q}} against a on a log-log scale and
/// compares the slope with the dilation index of the branch.
inline DilationScaling dilation_scaling(const SampledSignal& f, const Window& w, const ExponentPair& e,
                                        const std::vector<double>& a_values, int parallel = 1) {
    if (a_values.empty()) throw PreconditionError("dilation_scaling: no dilation factors");
    bool up = true, down = true;
    for (double a : a_values) {
        up = up && a >= 1.0 && a <= 16.0;
        down = down && a >= 1.0 / 16.0 && a <= 1.0;
    }
    if (!up && !down) {
        throw PreconditionError("dilation_scaling: factors must lie in [1,16] or in [1/16,1]");
    }
    DilationScaling out;
    out.branch = up ? DilationBranch::expanding : DilationBranch::contracting;
    out.a_values = a_values;
    const int n = f.grid.dim();
    out.bound = n * (up ? mu1(e) : mu2(e));

    const double base = modulation_norm(f, w, e, parallel);
    if (!(base > 0.0)) throw PreconditionError("dilation_scaling: input has zero norm");
    for (double a : a_values) {
        const auto d = dilate(f, a);
        if (!d.ok()) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "dilation_scaling: wraparound at a=%.17g (edge mass %.3g, spectral tail %.3g)", a,
                          d.boundary_mass_fraction, d.spectral_tail_fraction);
            throw PreconditionError(buf);
        }
        out.ratios.push_back(modulation_norm(d.signal, w, e, parallel) / base);
    }
    out.fit = fit_loglog(out.a_values, out.ratios);
    out.consistent = up ? out.fit.slope <= out.bound + kDilationSlack : out.fit.slope >= out.bound - kDilationSlack;
    return out;
}

// ---------------------------------------------------------------- Bessel growth

struct BesselGrowth {
    double m = 0.0;
    std::vector<double> k_values;
    std::vector<double> ratios;  ///< ||sigma(D) M_k f||_2 / ||M_k f||_2
    FitResult fit;               ///< log ratio against log |k|
};

inline constexpr double kBesselBandTolerance = 1e-12;

/// Growth of the Bessel multiplier (1 + |xi|^2)^{m/2} on modulated copies of f,
/// with hat f supported in |xi| <= 1/2.
inline BesselGrowth bessel_growth(double m, const std::vector<double>& k_values, const SampledSignal& f) {
    const Grid& g = f.grid;
    if (g.dim() != 1) throw StructuralError("bessel_growth: one-dimensional grids only");
    const auto fhat = dft(f).values;
    CompensatedSum total, outside;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double w = std::norm(fhat[j]);
        total += w;
        if (std::abs(g.frequency(static_cast<int>(j))) > 0.5) outside += w;
    }
    if (!(total.value() > 0.0)) throw PreconditionError("bessel_growth: input is zero");
    const double frac = outside.value() / total.value();
    if (frac > kBesselBandTolerance) {
        throw PreconditionError("bessel_growth: spectral energy fraction " + std::to_string(frac) +
                                " lies outside |xi| <= 1/2");
    }
    BesselGrowth out;
    out.m = m;
    out.k_values = k_values;
    for (double k : k_values) {
        if (!(std::abs(k) + 0.5 < g.nyquist())) {
            throw PreconditionError("bessel_growth: |k| + 1/2 must stay below the Nyquist frequency");
        }
        const auto mk = modulate(f, {k, 0.0});
        auto spec = dft(mk);
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double xi = g.frequency(static_cast<int>(j));
            spec.values[j] *= std::pow(1.0 + xi * xi, 0.5 * m);
        }
        out.ratios.push_back(lp_norm(idft(spec), 2.0) / lp_norm(mk, 2.0));
    }
    std::vector<double> ak;
    for (double k : k_values) ak.push_back(std::abs(k));
    out.fit = fit_loglog(ak, out.ratios);
    return out;
}

// ---------------------------------------------------------------- unboundedness probe

struct SweepOptions {
    Grid grid{1, 1 << 18, 8.0};
    double window_width = 1.0;
    int family_size = 64;
    int refine_steps = 50;
    std::uint64_t seed = 1;
    int positions = 128;
    double spectrum_floor = 1e-14;
    int parallel = 1;
    bool control = false;  ///< allow m at or below the critical order (boundedness side)
    int j0 = 0;            ///< 0 picks the minimal admissible level
};

struct SweepRow {
    int j_max = 0;
    double lower_bound = 0.0;
    std::size_t evaluations = 0;
    std::string note;
};

struct SweepResult {
    ExponentPair e{2.0, 2.0};
    double delta = 0.0;
    double m = 0.0;
    double critical = 0.0;
    int j0 = 0;
    bool adjoint_probe = false;  ///< q < 2: probes A* on the dual exponents
    std::vector<SweepRow> rows;
    double growth = 0.0;  ///< last / first
    bool monotone = false;
};

inline constexpr double kMonotoneSlack = 1e-9;

/// Operator-norm lower bounds of the truncated counterexample quantization for
/// increasing truncation levels. Each level warm-starts from the previous
/// level's refined test functions.
inline SweepResult unboundedness_sweep(const ExponentPair& e, double delta, double m,
                                       const std::vector<int>& j_max_values, const SweepOptions& opt = {}) {
    if (e.q() == 2.0) {
        throw PreconditionError("unboundedness_sweep: q = 2 excluded; M^{2,2} = L^2 and the operator is bounded there");
    }
    const int n = opt.grid.dim();
    SweepResult res;
    res.e = e;
    res.delta = delta;
    res.m = m;
    res.critical = critical_order(e, delta, n).value;
    if (m <= res.critical && !opt.control) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "unboundedness_sweep: m=%.17g is at or below the critical order %.17g; operators of "
                      "S^m_{1,delta} are bounded on M^{p,q} iff m <= critical order",
                      m, res.critical);
        throw PreconditionError(buf);
    }
    if (j_max_values.empty()) throw PreconditionError("unboundedness_sweep: no truncation levels");
    for (std::size_t i = 1; i < j_max_values.size(); ++i) {
        if (j_max_values[i] <= j_max_values[i - 1]) {
            throw PreconditionError("unboundedness_sweep: j_max values must increase");
        }
    }
    res.j0 = opt.j0 > 0 ? opt.j0 : minimal_j0(delta, n);
    res.adjoint_probe = e.q() < 2.0;
    const ExponentPair probe_e = res.adjoint_probe ? e.conjugate() : e;

    const auto Phi = std::make_shared<BumpTransform>(n);
    const auto w = gaussian_window(opt.grid, opt.window_width);
    ProbeFamily fam;
    fam.xi_lo = std::exp2(res.j0 - 0.25);
    fam.xi_hi = std::exp2(j_max_values.back() + 0.25);
    fam.x_radius = 1.0;
    fam.width_lo = std::exp2(-j_max_values.back() * delta / 2.0);
    fam.width_hi = 1.0;
    fam.positions = opt.positions;
    fam.spectrum_floor = opt.spectrum_floor;
    fam.parallel = opt.parallel;

    std::vector<TestFunction> warm;
    for (int jm : j_max_values) {
        const CounterexampleSymbol sym({m, delta, n, res.j0, jm}, Phi);
        const auto sep = sym.on_grid(opt.grid, opt.parallel);
        auto A = separable_operator(sep);
        if (res.adjoint_probe) A = A.adjoint();
        auto lb = opnorm_lower_bound(A, probe_e, w, opt.family_size, opt.refine_steps, opt.seed, fam, warm);
        warm = lb.incumbents;
        warm.push_back(lb.best);
        res.rows.push_back({jm, lb.value, lb.evaluations, sep.note});
    }
    res.monotone = true;
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        res.monotone = res.monotone && res.rows[i].lower_bound >= res.rows[i - 1].lower_bound - kMonotoneSlack;
    }
    res.growth = res.rows.back().lower_bound / res.rows.front().lower_bound;
    return res;
}

// ---------------------------------------------------------------- norm equivalence

struct NormEquivalenceRow {
    ExponentPair e{2.0, 2.0};
    std::size_t sample = 0;
    double band = 0.0;
    double modulation = 0.0;
};

struct NormEquivalence {
    std::vector<NormEquivalenceRow> rows;
    std::vector<ExponentPair> pairs;
    std::vector<double> spread;  ///< per pair: max ratio / min ratio over samples
    double worst_spread = 0.0;
};

/// Compares the uniform-partition band norm with the STFT norm on random
/// band-limited signals. Equivalent norms keep the ratio within fixed bounds.
inline NormEquivalence norm_equivalence(const Grid& g, const std::vector<ExponentPair>& pairs, std::size_t samples,
                                        std::uint64_t seed, double bandwidth = 8.0, int parallel = 1) {
    if (samples < 2) throw PreconditionError("norm_equivalence: need at least two samples");
    const auto w = gaussian_window(g, 1.0);
    const auto eta = tile_profile(g.dim());
    std::vector<SampledSignal> fs;
    for (std::size_t s = 0; s < samples; ++s) {
        std::mt19937_64 rng(derive_seed(seed, s));
        fs.push_back(random_bandlimited(g, bandwidth, rng));
    }
    NormEquivalence out;
    out.pairs = pairs;
    out.rows.resize(pairs.size() * samples);
    parallel_for(out.rows.size(), parallel, [&](std::size_t c) {
        const auto& e = pairs[c / samples];
        const auto& f = fs[c % samples];
        out.rows[c] = {e, c % samples, band_norm(f, eta, e).value, modulation_norm(f, w, e)};
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        double lo = kInf, hi = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            const auto& r = out.rows[i * samples + s];
            const double v = r.band / r.modulation;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.spread.push_back(hi / lo);
        out.worst_spread = std::max(out.worst_spread, hi / lo);
    }
    return out;
}

}  // namespace modspace
