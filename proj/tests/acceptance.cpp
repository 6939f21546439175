// Acceptance harness: one PASS/FAIL line per criterion.
// Usage: acceptance [N ...]   (no arguments runs every criterion)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "modspace/cli.hpp"
#include "modspace/counterexample.hpp"
#include "modspace/experiments.hpp"
#include "modspace/indices.hpp"
#include "modspace/partitions.hpp"
#include "modspace/quantize.hpp"
#include "modspace/symbols.hpp"
#include "modspace/tfa.hpp"

using namespace modspace;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome index_algebra() {
    const std::int64_t d = 98;
    std::size_t cells = 0, bad = 0;
    for (std::int64_t i = 0; i <= d; ++i) {
        for (std::int64_t k = 0; k <= d; ++k) {
            const Rational a(i, d), b(k, d);
            const Rational m1 = mu1(a, b), m2 = mu2(a, b);
            for (const auto& [r, v] : mu1_piecewise(a, b)) bad += v != m1;
            for (const auto& [r, v] : mu2_piecewise(a, b)) bad += v != m2;
            if (mu1_piecewise(a, b).empty() || mu2_piecewise(a, b).empty()) ++bad;
            if (a == Rational(1, 2) && m1 - m2 != abs(b - Rational(1, 2))) ++bad;
            ++cells;
        }
    }
    return {bad == 0, std::to_string(cells) + " lattice points, " + std::to_string(bad) + " mismatches"};
}

Outcome partition_identities() {
    const auto P = build_partitions(0.5);
    const Grid g = Grid::standard(1);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point xi = g.frequency_at(i);
        double s = 0.0, tile = 0.0;
        for (int j = 0; j <= 12; ++j) s += P.psi_j(j, xi);
        for (int k = -60; k <= 60; ++k) tile += P.phi({xi[0] - k, 0.0});
        worst = std::max({worst, std::abs(s - 1.0), std::abs(tile - 1.0)});
    }
    // joint identity over every (y, xi) pair of grid frequencies
    const int N = g.points_per_axis();
    for (double delta : {0.0, 0.25, 0.5}) {
        for (int t = 0; t < N * N; ++t) {
            const double y = g.frequency(t / N);
            const double xi = g.frequency(t % N);
            double total = 0.0;
            for (int j = 0; j <= 8; ++j) {
                const double pj = P.psi_j(j, {xi, 0});
                if (pj == 0.0) continue;
                const double s = std::pow(2.0, -j * delta);
                double ky = 0.0, kl = 0.0;
                for (int k = -60; k <= 60; ++k) {
                    ky += P.phi({s * y - k, 0});
                    kl += P.phi({s * xi - k, 0});
                }
                total += ky * kl * pj;
            }
            worst = std::max(worst, std::abs(total - 1.0));
        }
    }
    return {worst <= 1e-8, "max deviation " + fmt("%.3g", worst)};
}

Outcome l2_identity() {
    const Grid g(1, 512, 16.0);
    const auto w = gaussian_window(g);
    std::mt19937_64 rng(5);
    double lo = kInf, hi = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto f = random_bandlimited(g, 8.0, rng);
        const double r = modulation_norm(f, w, {2, 2}) / (std::sqrt(kTwoPi) * lp_norm(w.signal, 2) * lp_norm(f, 2));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {lo >= 0.999 && hi <= 1.001, "ratio in [" + fmt("%.15f", lo) + ", " + fmt("%.15f", hi) + "]"};
}

Outcome dilation() {
    const Grid g = Grid::standard(1);
    const auto w = gaussian_window(g, 1.0);
    const auto f_up = gaussian_window(g, 1.0, false).signal;
    const auto f_down = gaussian_window(g, 0.25, false).signal;
    bool ok = true;
    double l2 = 0.0, margin = kInf;
    for (double p : {2.0, 3.0, 4.0}) {
        for (double q : {2.0, 3.0, 4.0}) {
            const ExponentPair e(p, q);
            const auto u = dilation_scaling(f_up, w, e, {1, 2, 4, 8});
            const auto d = dilation_scaling(f_down, w, e, {0.125, 0.25, 0.5, 1});
            ok = ok && u.consistent && d.consistent;
            margin = std::min({margin, u.bound + 0.1 - u.fit.slope, d.fit.slope - (d.bound - 0.1)});
            if (p == 2.0 && q == 2.0) l2 = u.fit.slope;
        }
    }
    ok = ok && std::abs(l2 + 0.5) < 0.05;
    return {ok, "p=q=2 slope " + fmt("%.6f", l2) + ", smallest verdict margin " + fmt("%.4f", margin)};
}

Outcome bessel() {
    const Grid g(1, 1024, 8.0 * kPi);
    std::mt19937_64 rng(1);
    const auto f = random_bandlimited(g, 0.5, rng);
    bool ok = true;
    std::string detail;
    for (double m : {0.25, 0.5, 1.0}) {
        const auto r = bessel_growth(m, {4, 8, 16, 32}, f);
        ok = ok && std::abs(r.fit.slope - m) <= 0.05 * m;
        detail += (detail.empty() ? "" : ", ") + fmt("m=%.2f", m) + fmt(" slope %.5f", r.fit.slope);
    }
    return {ok, detail};
}

Outcome quantization() {
    const Grid g(1, 128, 8.0);
    const auto one = SymbolGrid::sample(g, {0, 1, 0}, SymbolProvenance::custom,
                                        [](const Point&, const Point&) { return cplx(1.0); });
    const auto I = quantize(one);
    double id_err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) id_err = std::max(id_err, std::abs(I.at(i, j) - cplx(i == j ? 1.0 : 0.0)));
    }

    // lattice exponentials are eigenvectors of Fourier multipliers
    const auto B = quantize(bessel_symbol(1.0, g));
    double diag_err = 0.0;
    for (int k = 1; k < g.points_per_axis(); ++k) {
        const double xi = g.frequency(k);
        const auto e = SampledSignal::sample(g, [&](const Point& x) { return std::polar(1.0, xi * x[0]); });
        const auto Be = apply(B, e);
        const double lambda = std::sqrt(1.0 + xi * xi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            diag_err = std::max(diag_err, std::abs(Be.values[i] - lambda * e.values[i]) / lambda);
        }
    }

    const auto s = SymbolGrid::sample(g, {0.5, 1, 0}, SymbolProvenance::custom, [](const Point& x, const Point& xi) {
        return std::pow(1.0 + xi[0] * xi[0], 0.25) * std::polar(2.0 + std::cos(x[0]), std::sin(x[0]) * xi[0] / 8.0);
    });
    const auto A = quantize(s);
    const auto As = adjoint(A);
    std::mt19937_64 rng(9);
    double pair_err = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto f = random_bandlimited(g, 6.0, rng);
        const auto h = random_bandlimited(g, 6.0, rng);
        const auto Af = apply(A, f);
        const cplx lhs = inner_product(Af, h), rhs = inner_product(f, apply(As, h));
        pair_err = std::max(pair_err, std::abs(lhs - rhs) / (lp_norm(Af, 2) * lp_norm(h, 2)));
    }
    const bool ok = id_err <= 1e-12 && diag_err <= 1e-10 && pair_err <= 1e-12;
    return {ok, "identity " + fmt("%.2g", id_err) + ", multiplier " + fmt("%.2g", diag_err) + ", pairing " +
                    fmt("%.2g", pair_err)};
}

Outcome pieces() {
    const Grid g = Grid::standard(1);
    const auto P = build_partitions(0.5, g);
    const double m = 1.0;
    std::vector<PieceIndex> sample;
    for (int j = 1; j <= 4; ++j) {
        const int l = static_cast<int>(std::lround(1.5 * std::exp2(j)));
        for (int k : {0, 1, 2, 4, 8}) sample.push_back({j, k, l});
    }
    const auto rep = piece_kernel_decay(bessel_symbol(m, g), P, sample, 0.0);
    const bool ok = rep.k_exponent <= -2.0 + 0.3 && rep.j_exponent <= m + 0.2;
    return {ok, std::string("k-exponent ") + (rep.k_degenerate ? "-inf (pieces off the diagonal vanish)" : fmt("%.4f", rep.k_exponent)) +
                    ", j-exponent " + fmt("%.4f", rep.j_exponent)};
}

Outcome counterexample() {
    const int j0 = minimal_j0(0.5, 1);
    const bool validator = !j0_violation(j0, 0.5, 1) && j0_violation(j0 - 1, 0.5, 1).has_value();

    const Grid g(1, 2048, std::ldexp(1.0, -8));
    const int top = 19;
    const CounterexampleSymbol sym({0.0, 0.5, 1, 0, top});
    const auto s = sym.on_grid(g).to_dense();
    const double edge = std::exp2(j0 - 0.5);
    bool vanish = true;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (std::abs(g.frequency(static_cast<int>(k))) >= edge) continue;
        for (std::size_t i = 0; i < g.size(); ++i) vanish = vanish && s.at(i, k) == cplx{};
    }
    double moment = 0.0;
    for (const auto& mv : vanishing_moments(s, 3, g.half_length())) moment = std::max(moment, mv.value);

    const auto A = quantize(s);
    CzoOptions opt;
    opt.fit_min_distance = 16.0 * std::exp2(-top);
    opt.fit_max_distance = std::exp2(-j0);
    bool czo = true;
    std::string statuses;
    for (const auto& M : {A, transpose(A)}) {
        const auto K = kernel(M);
        for (int ell : {0, 1}) {
            const auto r = czo_check(K, ell, 0.5, opt);
            czo = czo && r.pass();
            statuses += (statuses.empty() ? "" : "/") + r.status;
        }
    }
    const bool ok = validator && vanish && moment < 1e-12 && czo;
    return {ok, "j0=" + std::to_string(j0) + (validator ? " validated" : " NOT validated") +
                    (vanish ? ", low band zero" : ", low band NONZERO") + ", max moment " + fmt("%.2g", moment) +
                    ", czo " + statuses};
}

Outcome unboundedness() {
    const int j0 = minimal_j0(0.5, 1);
    const std::vector<int> levels{j0 + 1, j0 + 2, j0 + 3};
    SweepOptions o;
    const auto above = unboundedness_sweep({2, 6}, 0.5, -0.1, levels, o);
    o.control = true;
    const auto below = unboundedness_sweep({2, 6}, 0.5, -0.3, levels, o);
    std::string detail = "m=-0.1:";
    for (const auto& r : above.rows) detail += fmt(" %.6g", r.lower_bound);
    detail += fmt(" (last/first %.4f", above.growth) + (above.monotone ? ", non-decreasing)" : ", NOT monotone)");
    detail += "; m=-0.3:";
    for (const auto& r : below.rows) detail += fmt(" %.6g", r.lower_bound);
    detail += fmt(" (last/first %.4f)", below.growth);
    const bool ok = above.monotone && above.growth >= 1.2 && below.growth < 1.5;
    return {ok, detail + "; growth evidence only"};
}

Outcome disjointness() {
    const double delta = 0.5;
    const int n = 1;
    const int j0 = disjointness_j0(delta, n);
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> pick_jl(j0 + 1, 24), pick_j(j0 + 1, 40);
    std::uniform_real_distribution<double> spread(0.6, 1.6);
    int mismatches = 0, far = 0, far_bad = 0;
    for (int t = 0; t < 100; ++t) {
        const int jl = pick_jl(rng);
        const int l = static_cast<int>(std::lround(spread(rng) * std::exp2(jl * (1.0 - delta)))) * (t % 2 ? -1 : 1);
        const int j = pick_j(rng);
        // dense oracle over the cube 2^{j delta}(l + [-1, 1])
        const double s = std::pow(2.0, j * delta);
        const double a = std::ldexp(1.0, j - 1), b = std::ldexp(1.0, j + 1);
        bool hit = false;
        const int samples = 20000;
        for (int i = 0; i <= samples && !hit; ++i) {
            const double r = std::abs(s * (l - 1 + 2.0 * i / samples));
            hit = r >= a && r <= b;
        }
        for (double e : {a, b, -a, -b}) hit = hit || (e >= s * (l - 1) && e <= s * (l + 1));
        const bool disjoint = support_disjoint({l, 0}, j, delta, j0, n);
        mismatches += disjoint == hit;
        if (const auto level = level_of({l, 0}, delta, j0, n); level && std::abs(j - *level) >= j0) {
            ++far;
            far_bad += !disjoint;
        }
    }
    return {mismatches == 0 && far_bad == 0, "100 pairs, " + std::to_string(mismatches) + " oracle mismatches, " +
                                                 std::to_string(far) + " far pairs, " + std::to_string(far_bad) +
                                                 " not disjoint"};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const std::vector<std::vector<std::string>> runs{
        {"indices"},
        {"dilation"},
        {"bessel"},
        {"pieces"},
        {"czo"},
        {"moments"},
        {"norm-equiv"},
        {"unbounded", "--grid", "65536", "--j-max", "12,13", "--family-size", "8", "--refine-steps", "8"}};
    const auto base = std::filesystem::temp_directory_path() / "modspace_acceptance";
    std::filesystem::remove_all(base);
    int identical = 0;
    std::string differing;
    for (const auto& args : runs) {
        std::string bodies[2];
        for (int rep = 0; rep < 2; ++rep) {
            const auto dir = base / (args.front() + std::to_string(rep));
            std::vector<std::string> a{"modspace"};
            a.insert(a.end(), args.begin(), args.end());
            a.insert(a.end(), {"--seed", "20240611", "--out", dir.string()});
            std::vector<const char*> argv;
            for (const auto& s : a) argv.push_back(s.c_str());
            std::ostringstream out, err;
            const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            if (code == 1) return {false, args.front() + " failed: " + err.str()};
            bodies[rep] = slurp(dir / (args.front() + ".csv"));
        }
        if (!bodies[0].empty() && bodies[0] == bodies[1]) {
            ++identical;
        } else {
            differing += " " + args.front();
        }
    }
    std::filesystem::remove_all(base);
    return {identical == static_cast<int>(runs.size()),
            std::to_string(identical) + "/" + std::to_string(runs.size()) + " subcommands byte-identical" + differing};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"index algebra", index_algebra},
        {"partition identities", partition_identities},
        {"discrete M^{2,2} = L^2", l2_identity},
        {"dilation scaling", dilation},
        {"Bessel growth", bessel},
        {"quantization sanity", quantization},
        {"piece decay", pieces},
        {"counterexample structure", counterexample},
        {"unboundedness probe", unboundedness},
        {"support disjointness", disjointness},
        {"determinism", determinism}};

    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "acceptance: unknown criterion '%s'\n", argv[i]);
            return 1;
        }
        selected.push_back(static_cast<std::size_t>(k - 1));
    }
    if (selected.empty()) {
        for (std::size_t i = 0; i < criteria.size(); ++i) selected.push_back(i);
    }

    int failed = 0;
    for (std::size_t i : selected) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
