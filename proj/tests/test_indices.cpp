#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "modspace/indices.hpp"

using namespace modspace;

namespace {

Rational R(std::int64_t n, std::int64_t d = 1) { return {n, d}; }

}  // namespace

TEST_CASE("Rational arithmetic", "[indices]") {
    CHECK(R(1, 2) + R(1, 3) == R(5, 6));
    CHECK(R(2, 4) == R(1, 2));
    CHECK(R(1, -2) == R(-1, 2));
    CHECK(R(1, 3) < R(1, 2));
    CHECK(abs(R(-3, 7)) == R(3, 7));
    CHECK(Rational::approximate(0.25) == R(1, 4));
    CHECK(Rational::approximate(1.0 / 6.0) == R(1, 6));
    CHECK_THROWS_AS(Rational::approximate(std::sqrt(2.0), 1000, 1e-13), PreconditionError);
    CHECK_THROWS_AS(R(1, 0), PreconditionError);
}

TEST_CASE("ExponentPair conjugates", "[indices]") {
    ExponentPair e(3.0, 6.0);
    REQUIRE(e.is_exact());
    CHECK(*e.exact_inv_p() + *e.conjugate().exact_inv_p() == R(1));
    CHECK(*e.exact_inv_q() + *e.conjugate().exact_inv_q() == R(1));
    CHECK(e.p_conj() == 1.5);
    ExponentPair inf(2.0, kInf);
    CHECK(*inf.exact_inv_q() == R(0));
    CHECK(inf.q_conj() == 1.0);
    CHECK_THROWS_AS(ExponentPair(0.5, 2.0), PreconditionError);
    CHECK_THROWS_AS(ExponentPair::from_inverses(R(3, 2), R(1, 2)), PreconditionError);
    CHECK_THROWS_AS(ExponentPair(1.0, 2.0).require_open_range("x"), PreconditionError);
}

TEST_CASE("mu1 and mu2 spot values", "[indices]") {
    CHECK(mu1(ExponentPair(2, 2)) == -0.5);
    CHECK(mu2(ExponentPair(2, 2)) == -0.5);
    for (double p : {2.0, 3.0, 4.0}) CHECK(mu1(ExponentPair(p, kInf)) == -1.0 / p);
    // I1 branch -2/p + 1/q and the max-form agree at (1/2, 1)
    CHECK(mu1(R(1, 2), R(1)) == R(0));
    CHECK(-R(2) * R(1, 2) + R(1) == R(0));
    CHECK(mu2(ExponentPair(2, kInf)) == -1.0);
    CHECK(mu1(ExponentPair(2, 4)) == -0.5);
}

TEST_CASE("mu2 <= mu1 on a rational grid", "[indices]") {
    for (int i = 1; i < 50; ++i) {
        for (int j = 1; j < 50; ++j) {
            const Rational a(i, 50), b(j, 50);
            REQUIRE(mu2(a, b) <= mu1(a, b));
        }
    }
}

TEST_CASE("closed forms agree with the region tables", "[indices]") {
    // 99 x 99 grid including the boundary points 0 and 1.
    for (int i = 0; i <= 98; ++i) {
        for (int j = 0; j <= 98; ++j) {
            const Rational a(i, 98), b(j, 98);
            const auto m1 = mu1(a, b);
            const auto m2 = mu2(a, b);
            const auto b1 = mu1_piecewise(a, b);
            const auto b2 = mu2_piecewise(a, b);
            const auto gp = gap_piecewise(a, b);
            REQUIRE(!b1.empty());
            REQUIRE(!b2.empty());
            REQUIRE(!gp.empty());
            for (const auto& [r, v] : b1) REQUIRE(v == m1);
            for (const auto& [r, v] : b2) REQUIRE(v == m2);
            for (const auto& [r, v] : gp) REQUIRE(v == m1 - m2);
            REQUIRE(m1 - m2 >= R(0));
            // duality
            REQUIRE(mu1(R(1) - a, R(1) - b) - mu2(R(1) - a, R(1) - b) == m1 - m2);
        }
    }
}

TEST_CASE("gap vanishes only at the center", "[indices]") {
    for (int i = 1; i < 40; ++i) {
        for (int j = 1; j < 40; ++j) {
            const Rational a(i, 40), b(j, 40);
            const bool center = (i == 20 && j == 20);
            REQUIRE(((mu1(a, b) - mu2(a, b)) == R(0)) == center);
        }
    }
}

TEST_CASE("p = 2 gap is |1/q - 1/2|", "[indices]") {
    for (int j = 0; j <= 100; ++j) {
        const Rational b(j, 100);
        REQUIRE(mu1(R(1, 2), b) - mu2(R(1, 2), b) == abs(b - R(1, 2)));
    }
}

TEST_CASE("region labels", "[indices]") {
    const auto r1 = region(R(1, 2), R(1));
    CHECK(r1.in(Region::I3));
    CHECK(r1.in(Region::I2s));
    CHECK(r1.in(Region::J3));
    const auto g1 = gap_piecewise(R(1, 2), R(1));
    for (const auto& [r, v] : g1) CHECK(v == R(1, 2));

    const auto c = region(R(1, 2), R(1, 2));
    CHECK(c.in(Region::J1));
    CHECK(c.in(Region::J2));
    CHECK(c.in(Region::J3));
    for (const auto& [r, v] : gap_piecewise(R(1, 2), R(1, 2))) CHECK(v == R(0));

    const auto r3 = region(R(1, 4), R(1, 2));
    CHECK(r3.in(Region::J2));
    CHECK(r3.in(Region::I1));
    CHECK(r3.in(Region::I3s));
    for (const auto& [r, v] : gap_piecewise(R(1, 4), R(1, 2))) CHECK(v == R(1, 2));
    CHECK(region(ExponentPair(4, 2)).to_string().find("J2") != std::string::npos);
}

TEST_CASE("critical order", "[indices]") {
    const auto c = critical_order(ExponentPair(2, 6), 0.5, 1);
    CHECK(c.value == (R(-1, 6)).to_double());
    CHECK(critical_order_value(R(1, 2), R(1, 6), R(1, 2), 1) == R(-1, 6));
    for (double p : {1.5, 2.0, 3.0}) {
        for (double q : {1.5, 4.0, kInf}) CHECK(critical_order(ExponentPair(p, q), 0.0, 1).value == 0.0);
    }
    CHECK(critical_order(ExponentPair(2, 2), 0.7, 2).value == 0.0);
    for (int j = 0; j <= 20; ++j) {
        const Rational b(j, 20);
        REQUIRE(critical_order_value(R(1, 2), b, R(1, 3), 2) == -abs(b - R(1, 2)) * R(1, 3) * R(2));
    }
    CHECK_THROWS_AS(critical_order(ExponentPair(2, 6), 1.0, 1), PreconditionError);
    CHECK_THROWS_AS(critical_order(ExponentPair(2, 6), -0.1, 1), PreconditionError);
    // irrational delta falls back to floating point
    CHECK(critical_order(ExponentPair(2, 6), 1.0 / std::sqrt(2.0), 1).value < 0.0);
}
