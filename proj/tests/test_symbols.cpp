#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "modspace/symbols.hpp"

using namespace modspace;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("partition family identities", "[symbols]") {
    const auto P = build_partitions(0.5);
    CHECK(P.psi({0.4, 0}) == 0.0);
    CHECK(P.psi({2.2, 0}) == 0.0);
    CHECK(P.psi({-0.4, 0}) == 0.0);
    CHECK(P.psi0({2.2, 0}) == 0.0);
    CHECK(P.phi({1.01, 0}) == 0.0);
    CHECK(P.eta({1.1, 0}) == 1.0);
    CHECK(P.eta({0.7, 0}) == 0.0);
    CHECK(P.eta({1.42, 0}) == 0.0);

    std::mt19937_64 rng(1);
    const Grid g = Grid::standard(1);
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    for (int t = 0; t < 10000; ++t) {
        const Point xi = g.frequency_at(pick(rng));
        double s = 0.0, tile = 0.0;
        for (int j = 0; j <= 12; ++j) s += P.psi_j(j, xi);
        for (int k = -60; k <= 60; ++k) tile += P.phi({xi[0] - k, 0.0});
        REQUIRE_THAT(s, WithinAbs(1.0, 1e-10));
        REQUIRE_THAT(tile, WithinAbs(1.0, 1e-10));
    }
    CHECK_THROWS_AS(build_partitions(0.0), PreconditionError);
    CHECK_THROWS_AS(build_partitions(0.5, g, -1.0), ConstructionError);
    const auto P2 = build_partitions(1.0, Grid(2, 32, 4.0));
    CHECK(P2.dim == 2);
    CHECK(P2.psi({0.3, 0.3}) == 0.0);
}

TEST_CASE("three-index partition identity", "[symbols]") {
    const auto P = build_partitions(0.5);
    const Grid g = Grid::standard(1);
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    for (double delta : {0.0, 0.25, 0.5}) {
        for (int t = 0; t < 10000; ++t) {
            const double y = g.frequency(static_cast<int>(pick(rng)));
            const double xi = g.frequency(static_cast<int>(pick(rng)));
            double total = 0.0;
            for (int j = 0; j <= 8; ++j) {
                const double s = std::pow(2.0, -j * delta);
                const double pj = P.psi_j(j, {xi, 0});
                if (pj == 0.0) continue;
                double ky = 0.0, kl = 0.0;
                for (int k = -60; k <= 60; ++k) {
                    ky += P.phi({s * y - k, 0});
                    kl += P.phi({s * xi - k, 0});
                }
                total += ky * kl * pj;
            }
            REQUIRE_THAT(total, WithinAbs(1.0, 1e-10));
        }
    }
}

TEST_CASE("bessel symbol", "[symbols]") {
    const Grid g(1, 512, 16.0);
    const auto s = bessel_symbol(1.0, g);
    CHECK(s.provenance == SymbolProvenance::bessel);
    CHECK(s.params.rho == 1.0);
    CHECK(s.params.delta == 0.0);
    CHECK(s.at(3, 256) == 1.0);  // xi = 0
    CHECK(bessel_value({32.0, 0}, 1, 1.0) == std::sqrt(1025.0));
    CHECK_THAT(bessel_value({32.0, 0}, 1, 1.0), WithinRel(32.0156211871642, 1e-13));
    const auto z = bessel_symbol(0.0, g);
    for (const auto& v : z.values) REQUIRE(v == 1.0);
    CHECK(s.x_independent());
    CHECK_THROWS_AS((SymbolClassParams{0.0, 0.3, 0.5}.validate()), PreconditionError);
}

TEST_CASE("finite difference stencils are fourth-order exact on quartics", "[symbols]") {
    // Derivatives of t^4 at t = 0.7 with h = 0.1.
    const double t = 0.7, h = 0.1;
    const std::array<double, 5> exact{std::pow(t, 4), 4 * std::pow(t, 3), 12 * t * t, 24 * t, 24};
    for (int order = 0; order <= 4; ++order) {
        const auto& s = detail::central_stencil(order);
        double d = 0.0;
        for (int u = -3; u <= 3; ++u) d += s.w[static_cast<std::size_t>(u + 3)] * std::pow(t + u * h, 4);
        d /= s.denom * std::pow(h, order);
        CHECK_THAT(d, WithinAbs(exact[static_cast<std::size_t>(order)], 1e-9));
    }
    CHECK_THROWS_AS(detail::central_stencil(5), PreconditionError);
}

TEST_CASE("seminorm estimates", "[symbols]") {
    const Grid g(1, 512, 16.0);
    const auto one = SymbolGrid::sample(g, {0, 1, 0}, SymbolProvenance::custom, [](const Point&, const Point&) { return cplx(1.0); });
    const SeminormBox box{-4, 4, -8, 8};
    CHECK(seminorm_estimate(one, 0, box).value == 1.0);
    CHECK_THAT(seminorm_estimate(one, 2, box).value, WithinAbs(1.0, 1e-6));

    const auto b = bessel_symbol(1.0, g);
    double prev = 0.0;
    std::vector<double> growth;
    for (double r : {8.0, 16.0, 32.0}) {
        const double v = seminorm_estimate(b, 2, {-2, 2, -r, r}).value;
        CHECK(v >= prev);
        CHECK(std::isfinite(v));
        growth.push_back(v);
        prev = v;
    }
    CHECK(growth.back() < 2.0 * growth.front());
    // monotone in the order
    for (int N = 0; N < 4; ++N) {
        CHECK(seminorm_estimate(b, N, box).value <= seminorm_estimate(b, N + 1, box).value);
    }
    CHECK_THROWS_AS(seminorm_estimate(b, 2, {-4, 4, -50, 50}), PreconditionError);
    CHECK_THROWS_AS(seminorm_estimate(b, 5, box), PreconditionError);
}

TEST_CASE("symbol pieces reassemble the symbol", "[symbols]") {
    const Grid g(1, 32, 4.0);
    const auto P = build_partitions(0.5, g);
    const auto s = SymbolGrid::sample(g, {0, 1, 0}, SymbolProvenance::custom, [](const Point& x, const Point& xi) {
        return std::exp(-x[0] * x[0]) * std::pow(1 + xi[0] * xi[0], 0.25) +
               cplx(0, 1) * std::sin(kPi * x[0] / 4) * xi[0] / (1 + std::abs(xi[0]));
    });
    for (double delta : {0.0, 0.5}) {
        std::vector<cplx> acc(s.values.size());
        const int jmax = PartitionFamily::max_level(g.nyquist());
        for (int j = 0; j <= jmax; ++j) {
            const double scale = std::pow(2.0, -j * delta);
            const int reach = static_cast<int>(std::ceil(scale * g.nyquist())) + 2;
            for (int l = -reach; l <= reach; ++l) {
                for (int k = -reach; k <= reach; ++k) {
                    const auto piece = symbol_piece(s, P, j, {k, 0}, {l, 0}, delta);
                    if (piece.empty) continue;
                    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += piece.values[i];
                }
            }
        }
        double err = 0.0;
        for (std::size_t i = 0; i < acc.size(); ++i) err = std::max(err, std::abs(acc[i] - s.values[i]));
        CHECK(err < 1e-8);
    }
}

TEST_CASE("symbol piece structure", "[symbols]") {
    const Grid g(1, 64, 8.0);
    const auto P = build_partitions(0.5, g);
    const auto c = SymbolGrid::sample(g, {0, 1, 0}, SymbolProvenance::custom, [](const Point&, const Point&) { return cplx(2.5, -1.0); });
    const auto p1 = symbol_piece(c, P, 2, {1, 0}, {4, 0}, 0.5);
    for (const auto& v : p1.values) REQUIRE(std::abs(v) < 1e-10);
    const auto p0 = symbol_piece(c, P, 2, {0, 0}, {2, 0}, 0.5);
    CHECK(!p0.empty);
    REQUIRE(p0.piece.has_value());
    CHECK(p0.piece->j == 2);
    CHECK(p0.piece->l[0] == 2);

    // x-spectrum of a piece lies in 2^{j delta} k + [-2^{j delta}, 2^{j delta}]
    const auto s = SymbolGrid::sample(g, {0, 1, 0.5}, SymbolProvenance::custom, [](const Point& x, const Point& xi) {
        return std::exp(-x[0] * x[0] / 2) * std::polar(1.0, 3 * x[0]) * (1.0 + 0.1 * xi[0]);
    });
    const int j = 2, k = 2;
    const double scale = std::pow(2.0, j * 0.5);
    const auto piece = symbol_piece(s, P, j, {k, 0}, {2, 0}, 0.5);
    for (std::size_t col = 0; col < g.size(); ++col) {
        std::vector<cplx> column(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) column[i] = piece.at(i, col);
        const auto spec = samples_to_spectrum(g, column);
        for (std::size_t m = 0; m < g.size(); ++m) {
            const double eta = g.frequency(static_cast<int>(m));
            if (std::abs(eta - scale * k) > scale) REQUIRE(std::abs(spec[m]) < 1e-10);
        }
    }
    const auto far = symbol_piece(s, P, 2, {0, 0}, {500, 0}, 0.5);
    CHECK(far.empty);
    CHECK_THROWS_AS(symbol_piece(s, P, -1, {0, 0}, {0, 0}, 0.5), PreconditionError);
}

TEST_CASE("support disjointness", "[symbols]") {
    const double delta = 0.5;
    const int j0 = disjointness_j0(delta, 1);
    CHECK(j0 == 6);
    CHECK(disjointness_j0(0.0, 1) == 3);
    CHECK(disjointness_j0(0.5, 2) == 7);
    CHECK_THROWS_AS(support_disjoint({0, 0}, 8, delta, 5), PreconditionError);

    // l with j(l) = j0 + 1: centre 2^{j(l)} lands in the annulus at level j0+1
    const int jl = j0 + 1;
    const int l = static_cast<int>(std::lround(std::ldexp(1.0, jl) / std::pow(2.0, jl * delta)));
    REQUIRE(level_of({l, 0}, delta, j0, 1) == jl);
    CHECK(!support_disjoint({l, 0}, jl, delta, j0));
    for (int j = j0 + 1; j <= jl + 2 * j0; ++j) {
        if (std::abs(j - jl) >= j0) CHECK(support_disjoint({l, 0}, j, delta, j0));
    }
    for (int j = j0 + 1; j <= 40; ++j) {
        if (std::pow(2.0, j * delta) < std::ldexp(1.0, j - 1)) CHECK(support_disjoint({0, 0}, j, delta, j0));
    }
}

TEST_CASE("support disjointness matches dense sampling", "[symbols]") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> lj(1, 14);
    std::uniform_int_distribution<int> ll(-40, 40);
    for (int t = 0; t < 100; ++t) {
        const int j = lj(rng);
        const int l = ll(rng);
        const double delta = 0.5;
        const double s = std::pow(2.0, j * delta);
        bool hit = false;
        const int samples = 20000;
        for (int i = 0; i <= samples && !hit; ++i) {
            const double xi = s * (l - 1 + 2.0 * i / samples);
            const double r = std::abs(xi);
            hit = r >= std::ldexp(1.0, j - 1) && r <= std::ldexp(1.0, j + 1);
        }
        for (double e : {std::ldexp(1.0, j - 1), std::ldexp(1.0, j + 1), -std::ldexp(1.0, j - 1), -std::ldexp(1.0, j + 1)}) {
            if (e >= s * (l - 1) && e <= s * (l + 1)) hit = true;
        }
        REQUIRE(supports_disjoint({l, 0}, j, delta, 1) == !hit);
    }
}
