#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "modspace/cli.hpp"
#include "modspace/config.hpp"
#include "modspace/experiments.hpp"
#include "modspace/fit.hpp"
#include "modspace/opnorm.hpp"

using namespace modspace;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("modspace_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

int run(std::vector<std::string> args) {
    std::vector<const char*> argv{"modspace"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace

TEST_CASE("line fits", "[experiments]") {
    const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == 2.0);
    CHECK(f.intercept == 1.0);
    CHECK(f.residual == 0.0);
    const auto g = fit_loglog({1, 2, 4, 8}, {1, 0.5, 0.25, 0.125});
    CHECK_THAT(g.slope, WithinAbs(-1.0, 1e-15));
    CHECK(g.xs.size() == 4);
    CHECK_THROWS_AS(fit_line({1}, {2}), PreconditionError);
    CHECK_THROWS_AS(fit_line({1, 1}, {2, 3}), PreconditionError);
    CHECK_THROWS_AS(fit_line({1, 2}, {2, NAN}), PreconditionError);
    CHECK_THROWS_AS(fit_loglog({1, 2}, {0, 1}), PreconditionError);
}

TEST_CASE("dilation scaling", "[experiments]") {
    const Grid g = Grid::standard(1);
    const auto w = gaussian_window(g, 1.0);
    const auto f = gaussian_window(g, 1.0, false).signal;
    const auto r = dilation_scaling(f, w, {2, 2}, {1, 2, 4, 8});
    CHECK(r.branch == DilationBranch::expanding);
    CHECK(std::abs(r.fit.slope + 0.5) < 0.05);
    CHECK(r.bound == -0.5);
    CHECK(r.consistent);

    const auto r24 = dilation_scaling(f, w, {2, 4}, {1, 2, 4, 8});
    CHECK(r24.bound == -0.5);
    CHECK(r24.fit.slope <= -0.4);

    const auto narrow = gaussian_window(g, 0.25, false).signal;
    const auto d = dilation_scaling(narrow, w, {3, 2}, {0.125, 0.25, 0.5, 1});
    CHECK(d.branch == DilationBranch::contracting);
    CHECK(d.consistent);

    CHECK_THROWS_AS(dilation_scaling(f, w, {2, 2}, {1}), PreconditionError);
    CHECK_THROWS_AS(dilation_scaling(f, w, {2, 2}, {0.5, 2}), PreconditionError);
    try {
        (void)dilation_scaling(f, w, {2, 2}, {0.0625, 1});
        FAIL("expected wraparound");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("a=0.0625") != std::string::npos);
    }
}

TEST_CASE("Bessel growth", "[experiments]") {
    const Grid g(1, 1024, 8.0 * kPi);
    std::mt19937_64 rng(3);
    const auto f = random_bandlimited(g, 0.5, rng);
    const std::vector<double> ks{4, 8, 16, 32};
    const auto r0 = bessel_growth(0.0, ks, f);
    for (double v : r0.ratios) CHECK_THAT(v, WithinAbs(1.0, 1e-12));
    CHECK(std::abs(r0.fit.slope) < 0.02);
    for (double m : {0.25, 0.5, 1.0}) {
        const auto r = bessel_growth(m, ks, f);
        CHECK(std::abs(r.fit.slope - m) <= 0.05 * m);
        // oracle: each ratio lies between the multiplier's extremes over the shifted band
        for (std::size_t i = 0; i < ks.size(); ++i) {
            CHECK(r.ratios[i] >= std::pow(1.0 + (ks[i] - 0.5) * (ks[i] - 0.5), m / 2) * (1 - 1e-12));
            CHECK(r.ratios[i] <= std::pow(1.0 + (ks[i] + 0.5) * (ks[i] + 0.5), m / 2) * (1 + 1e-12));
        }
    }
    const auto wide = random_bandlimited(g, 2.0, rng);
    try {
        (void)bessel_growth(1.0, ks, wide);
        FAIL("expected band rejection");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("outside") != std::string::npos);
    }
    CHECK_THROWS_AS(bessel_growth(1.0, {400.0}, f), PreconditionError);
}

TEST_CASE("operator norm lower bounds", "[experiments]") {
    const Grid g(1, 256, 8.0);
    const auto w = gaussian_window(g, 1.0);
    const ExponentPair e26(2, 6);
    CHECK(opnorm_lower_bound(scaled_identity(g, 1.0), e26, w, 8, 10, 1).value == 1.0);
    CHECK_THAT(opnorm_lower_bound(scaled_identity(g, 2.0), {2, 2}, w, 8, 10, 1).value, WithinRel(2.0, 1e-14));
    CHECK_THROWS_AS(opnorm_lower_bound(scaled_identity(g, 1.0), e26, w, 7, 0, 1), PreconditionError);

    // a multiplier acts on a narrow-band atom as its symbol value there
    const auto B = as_operator(quantize(bessel_symbol(1.0, g)));
    ProbeFamily fam;
    const double top = g.nyquist() - 8.0;
    fam.xi_lo = top;
    fam.xi_hi = top;
    fam.width_lo = fam.width_hi = 1.0;
    const auto rb = opnorm_lower_bound(B, {2, 2}, w, 8, 0, 1, fam);
    CHECK(rb.value >= 0.95 * std::sqrt(1.0 + top * top));

    // prefix stability and monotonicity in both budgets
    CHECK(family_member(g, {}, 9, 5).atoms.size() == family_member(g, {}, 9, 5).atoms.size());
    const auto S = as_operator(quantize(SymbolGrid::sample(g, {0.0, 1, 0}, SymbolProvenance::custom,
                                                           [](const Point& x, const Point& xi) {
                                                               return std::polar(1.0, std::sin(x[0]) * xi[0] / 4.0);
                                                           })));
    double prev = 0.0;
    for (int F : {8, 12, 16}) {
        double prev_t = 0.0;
        for (int T : {0, 8, 24}) {
            const double v = opnorm_lower_bound(S, e26, w, F, T, 4).value;
            CHECK(v >= prev_t);
            prev_t = v;
        }
        CHECK(prev_t >= prev);
        prev = prev_t;
    }
}

TEST_CASE("unboundedness sweep", "[experiments]") {
    SweepOptions o;
    o.grid = Grid(1, 1 << 16, 8.0);
    o.family_size = 8;
    o.refine_steps = 8;
    try {
        (void)unboundedness_sweep({2, 2}, 0.5, 0.0, {13}, o);
        FAIL("expected refusal");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("L^2") != std::string::npos);
    }
    try {
        (void)unboundedness_sweep({2, 6}, 0.5, -0.3, {13}, o);
        FAIL("expected refusal");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("critical order") != std::string::npos);
    }
    CHECK_THROWS_AS(unboundedness_sweep({2, 6}, 0.5, -0.1, {13, 13}, o), PreconditionError);

    const auto r = unboundedness_sweep({2, 6}, 0.5, -0.1, {12, 13}, o);
    CHECK(r.j0 == 12);
    CHECK_THAT(r.critical, WithinAbs(-1.0 / 6.0, 1e-15));
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].lower_bound > 0.0);
    CHECK(r.monotone);
    CHECK(!r.adjoint_probe);

    // q < 2 probes the adjoint on the dual exponents
    const auto ra = unboundedness_sweep({2, 1.5}, 0.5, 0.0, {12}, o);
    CHECK(ra.adjoint_probe);
}

TEST_CASE("band and STFT norms are equivalent", "[experiments]") {
    const auto r = norm_equivalence(Grid::standard(1), {{2, 2}, {1, 4}, {4, 1}}, 6, 2);
    REQUIRE(r.spread.size() == 3);
    CHECK(r.worst_spread < 10.0);
    CHECK(r.rows.size() == 18);
}

TEST_CASE("config round trip", "[experiments]") {
    ExperimentConfig c = default_config("unbounded");
    c.m = {0.1, 1.0 / 3.0, -1e-300};
    c.delta = std::nextafter(0.5, 1.0);
    c.j_max = {13, 14};
    c.seed = 18446744073709551615ULL;
    c.out = "some/dir";
    const auto back = parse_config(to_text(c));
    CHECK(back == c);
    CHECK(to_text(back) == to_text(c));

    const auto d = parse_config("# comment\n\nexperiment = bessel\nm=0.25, 0.5\n");
    CHECK(d.experiment == "bessel");
    CHECK(d.m == std::vector<double>{0.25, 0.5});
    CHECK_THROWS_AS(parse_config("nonsense=1"), ConfigError);
    CHECK_THROWS_AS(parse_config("delta=abc"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed=-1"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/modspace.cfg"), ConfigError);
}

TEST_CASE("command line", "[experiments]") {
    const auto dir = scratch("cli");
    REQUIRE(run({"indices", "--grid", "9", "--out", dir.string()}) == 0);
    const auto csv = slurp(dir / "indices.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 82);
    CHECK(csv.find("\n0.5,0.5,2,2,-0.5,-0.5,0,") != std::string::npos);
    const auto summary = nlohmann::json::parse(slurp(dir / "indices.summary.json"));
    CHECK(summary["version"] == kSummaryVersion);
    CHECK(summary["pass"] == true);

    CHECK(run({"dilation", "--config", "missing.cfg"}) == 1);
    CHECK(run({"nonsense"}) == 1);
    CHECK(run({"bessel", "--no-such-flag", "1"}) == 1);
    CHECK(run({"bessel", "--m", "abc", "--out", dir.string()}) == 1);
    CHECK(run({"unbounded", "--q", "2", "--out", dir.string()}) == 1);
    CHECK(run({"unbounded", "--control", "0", "--m", "-0.3", "--out", dir.string()}) == 1);

    REQUIRE(run({"bessel", "--m", "1.0", "--out", dir.string()}) == 0);
    const auto bj = nlohmann::json::parse(slurp(dir / "bessel.summary.json"));
    CHECK(bj["slope"].get<double>() >= 0.95);
    CHECK(bj["slope"].get<double>() <= 1.05);
    CHECK(std::filesystem::exists(dir / "bessel.points.csv"));

    // near the origin the multiplier is flat, so the fitted slope misses m and the verdict fails
    CHECK(run({"bessel", "--m", "1.0", "--k-values", "0.125,0.25", "--out", dir.string()}) == 2);
    CHECK(nlohmann::json::parse(slurp(dir / "bessel.summary.json"))["pass"] == false);

    // config file plus override
    const auto cfg = dir / "b.cfg";
    {
        auto c = default_config("bessel");
        c.m = {0.5};
        std::ofstream(cfg) << to_text(c);
    }
    REQUIRE(run({"bessel", "--config", cfg.string(), "--seed", "7", "--out", dir.string()}) == 0);
    const auto bc = nlohmann::json::parse(slurp(dir / "bessel.summary.json"));
    CHECK(bc["seed"] == 7);
    CHECK(std::abs(bc["slope"].get<double>() - 0.5) < 0.025);
    CHECK(run({"dilation", "--config", cfg.string()}) == 1);

    // MODSPACE_OUT is the default output directory
    const auto envdir = scratch("env");
    ::setenv("MODSPACE_OUT", envdir.string().c_str(), 1);
    CHECK(run({"indices", "--grid", "3"}) == 0);
    ::unsetenv("MODSPACE_OUT");
    CHECK(std::filesystem::exists(envdir / "indices.csv"));
}

TEST_CASE("command line output is deterministic", "[experiments]") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& d : {a, b}) REQUIRE(run({"norm-equiv", "--samples", "4", "--seed", "11", "--out", d.string()}) == 0);
    CHECK(slurp(a / "norm-equiv.csv") == slurp(b / "norm-equiv.csv"));
    REQUIRE(run({"norm-equiv", "--samples", "4", "--seed", "12", "--out", b.string()}) == 0);
    CHECK(slurp(a / "norm-equiv.csv") != slurp(b / "norm-equiv.csv"));
}
