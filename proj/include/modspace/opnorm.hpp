#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "modspace/exponents.hpp"
#include "modspace/grid.hpp"
#include "modspace/numeric.hpp"
#include "modspace/quantize.hpp"
#include "modspace/tfa.hpp"

namespace modspace {

/// Gaussian atom c * exp(i xi0 x) * exp(-(x - x0)^2 / (2 width^2)).
struct AtomSpec {
    double x0 = 0.0;
    double xi0 = 0.0;
    double width = 1.0;
    cplx coef{1.0, 0.0};
};

/// Parametric test function: a superposition of atoms plus optional seeded noise
/// (band-limited to `noise_band` and shifted to `noise_center`).
struct TestFunction {
    std::vector<AtomSpec> atoms;
    std::uint64_t noise_seed = 0;
    double noise_band = 0.0;
    double noise_center = 0.0;
    cplx noise_coef{};

    [[nodiscard]] SampledSignal build(const Grid& g) const {
        if (g.dim() != 1) throw StructuralError("TestFunction: one-dimensional grids only");
        std::vector<cplx> v(g.size());
        const double period = 2.0 * g.half_length();
        for (const auto& a : atoms) {
            const double reach = 9.0 * a.width;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double x = g.position(static_cast<int>(i));
                double d = x - a.x0;
                d -= period * std::round(d / period);
                if (std::abs(d) > reach) continue;
                v[i] += a.coef * std::polar(std::exp(-d * d / (2.0 * a.width * a.width)), a.xi0 * d);
            }
        }
        if (noise_coef != cplx{} && noise_band > 0.0) {
            std::mt19937_64 rng(noise_seed);
            auto n = random_bandlimited(g, noise_band, rng);
            for (std::size_t i = 0; i < g.size(); ++i) {
                v[i] += noise_coef * n.values[i] * std::polar(1.0, noise_center * g.position(static_cast<int>(i)));
            }
        }
        return {g, std::move(v)};
    }
};

/// Where the seeded family looks: atom frequencies with |xi| in [xi_lo, xi_hi],
/// centres in [-x_radius, x_radius], widths log-uniform in [width_lo, width_hi].
struct ProbeFamily {
    double xi_lo = 0.0;
    double xi_hi = 0.0;  ///< 0 means half the Nyquist frequency
    double x_radius = 1.0;
    double width_lo = 0.25;
    double width_hi = 1.0;
    int positions = 0;           ///< decimated STFT positions; 0 evaluates the full STFT
    double spectrum_floor = 0.0;  ///< see DecimatedStft
    int refine_members = 8;
    int parallel = 1;
};

/// Member `index` of the prefix-stable family for `seed`.
inline TestFunction family_member(const Grid& g, const ProbeFamily& fam, std::uint64_t seed, std::size_t index) {
    std::mt19937_64 rng(derive_seed(seed, index));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double hi = fam.xi_hi > 0.0 ? fam.xi_hi : 0.5 * g.nyquist();
    const double lo = std::min(fam.xi_lo, hi);
    auto freq = [&] { return (u(rng) < 0.5 ? -1.0 : 1.0) * (lo + (hi - lo) * u(rng)); };
    auto width = [&] { return fam.width_lo * std::pow(fam.width_hi / fam.width_lo, u(rng)); };
    auto centre = [&] { return fam.x_radius * (2.0 * u(rng) - 1.0); };

    TestFunction t;
    switch (index % 4) {
        case 0:
            t.atoms.push_back({centre(), freq(), width(), {1.0, 0.0}});
            break;
        case 1:
        case 3: {
            static constexpr int kCounts[] = {2, 4, 8, 16};
            const int count = kCounts[static_cast<std::size_t>(u(rng) * 4.0) % 4];
            const double w = width();
            const double h = w * (0.5 + 1.5 * u(rng));
            // frequency step: none, or one atom-bandwidth per position step in either direction
            const double mode = u(rng);
            const double step = mode < 1.0 / 3.0 ? 0.0 : (mode < 2.0 / 3.0 ? 1.0 : -1.0) * (0.5 + u(rng)) / w;
            double xi = freq();
            const double span = step * (count - 1);
            if (std::abs(xi + span) > hi || std::abs(xi + span) < lo) xi -= span;
            const double x0 = centre() - 0.5 * h * (count - 1);
            for (int c = 0; c < count; ++c) {
                const cplx coef = index % 4 == 1 ? cplx(u(rng) < 0.5 ? -1.0 : 1.0, 0.0)
                                                 : std::polar(1.0, kTwoPi * u(rng));
                t.atoms.push_back({x0 + c * h, xi + c * step, w, coef});
            }
            break;
        }
        default: {
            t.noise_seed = rng();
            t.noise_band = std::max(g.dxi(), (hi - lo) * 0.5 * u(rng));
            const double c_lo = lo + t.noise_band, c_hi = std::max(c_lo, hi - t.noise_band);
            t.noise_center = (u(rng) < 0.5 ? -1.0 : 1.0) * (c_lo + (c_hi - c_lo) * u(rng));
            t.noise_coef = {1.0, 0.0};
            break;
        }
    }
    return t;
}

struct LowerBoundResult {
    double value = 0.0;
    TestFunction best;
    std::vector<TestFunction> incumbents;  ///< refined members, usable as a warm start
    std::vector<double> member_ratios;     ///< family ratios, in family order
    std::size_t evaluations = 0;
};

/// Ratio ||A f||_{M^{p,q}} / ||f||_{M^{p,q}} with the configured norm evaluator.
class RatioEvaluator {
public:
    RatioEvaluator(const LinearOperator& A, const ExponentPair& e, const Window& w, const ProbeFamily& fam)
        : A_(A), e_(e), w_(w), fam_(fam) {
        require_same_grid(A.grid, w.signal.grid, "opnorm_lower_bound");
        if (fam.positions > 0) dec_.emplace(w, fam.positions, 1e-15, fam.spectrum_floor);
    }

    double operator()(const TestFunction& t) {
        ++evaluations;
        const auto f = t.build(A_.grid);
        const double den = norm(f);
        if (!(den > 0.0)) return 0.0;
        const SampledSignal Af(A_.grid, A_(f.values));
        return norm(Af) / den;
    }

    std::size_t evaluations = 0;

private:
    double norm(const SampledSignal& f) const {
        return dec_ ? dec_->norm(f, e_) : modulation_norm(f, w_, e_, fam_.parallel);
    }

    const LinearOperator& A_;
    ExponentPair e_;
    const Window& w_;
    ProbeFamily fam_;
    std::optional<DecimatedStft> dec_;
};

/// Lower bound for the M^{p,q} operator norm of A.
///
/// Evaluates `warm_start` and then family members 0..family_size-1, and runs
/// coordinate ascent over the coefficients of the first `refine_members`
/// members (warm-start entries come first). Step t refines member t mod R with a
/// proposal drawn from derive_seed(seed, (member, t)); proposals are kept only on
/// improvement. Extending family_size or refine_steps never lowers the result.
inline LowerBoundResult opnorm_lower_bound(const LinearOperator& A, const ExponentPair& e, const Window& w,
                                           int family_size, int refine_steps, std::uint64_t seed,
                                           const ProbeFamily& fam = {},
                                           const std::vector<TestFunction>& warm_start = {}) {
    if (family_size < 8) throw PreconditionError("opnorm_lower_bound: family_size must be at least 8");
    if (refine_steps < 0) throw PreconditionError("opnorm_lower_bound: refine_steps must be nonnegative");
    RatioEvaluator ratio(A, e, w, fam);
    LowerBoundResult res;

    std::vector<TestFunction> members(warm_start);
    for (int i = 0; i < family_size; ++i) members.push_back(family_member(A.grid, fam, seed, static_cast<std::size_t>(i)));
    std::vector<double> value(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        value[i] = ratio(members[i]);
        if (i >= warm_start.size()) res.member_ratios.push_back(value[i]);
    }

    const std::size_t R = std::min(members.size(), static_cast<std::size_t>(std::max(1, fam.refine_members)));
    for (int t = 0; t < refine_steps; ++t) {
        const std::size_t r = static_cast<std::size_t>(t) % R;
        TestFunction& cur = members[r];
        if (cur.atoms.size() < 2) continue;
        std::mt19937_64 rng(derive_seed(derive_seed(seed ^ 0x5eedULL, r), static_cast<std::uint64_t>(t)));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        TestFunction prop = cur;
        auto& c = prop.atoms[static_cast<std::size_t>(u(rng) * prop.atoms.size()) % prop.atoms.size()].coef;
        const double kind = u(rng);
        if (kind < 0.5) {
            c *= std::polar(1.0, std::normal_distribution<double>(0.0, 1.0)(rng));
        } else {
            c *= kind < 0.75 ? 0.5 : 2.0;
        }
        const double v = ratio(prop);
        if (v > value[r]) {
            value[r] = v;
            cur = std::move(prop);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < members.size(); ++i) {
        if (value[i] > value[best]) best = i;
    }
    res.value = value[best];
    res.best = members[best];
    res.incumbents.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(R));
    res.evaluations = ratio.evaluations;
    return res;
}

inline LowerBoundResult opnorm_lower_bound(const OperatorMatrix& A, const ExponentPair& e, const Window& w,
                                           int family_size, int refine_steps, std::uint64_t seed,
                                           const ProbeFamily& fam = {}) {
    return opnorm_lower_bound(as_operator(A), e, w, family_size, refine_steps, seed, fam);
}

}  // namespace modspace
