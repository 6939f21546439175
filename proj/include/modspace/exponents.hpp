#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

#include "modspace/numeric.hpp"

namespace modspace {

/// Lebesgue exponent pair (p, q) in [1, inf]^2 with conjugates.
///
/// When the reciprocals 1/p, 1/q are rational (built from rationals, or
/// recognisable as small-denominator fractions) they are kept exactly so that
/// index identities can be checked without rounding.
class ExponentPair {
public:
    ExponentPair(double p, double q) : p_(p), q_(q) {
        check(p_, "p");
        check(q_, "q");
        inv_p_ = try_rational(1.0 / p_);
        inv_q_ = try_rational(1.0 / q_);
    }

    /// From exact reciprocals a = 1/p, b = 1/q in [0, 1].
    static ExponentPair from_inverses(Rational a, Rational b) {
        if (a < Rational(0) || a > Rational(1) || b < Rational(0) || b > Rational(1)) {
            throw PreconditionError("ExponentPair: reciprocals must lie in [0,1]");
        }
        return ExponentPair(a, b);
    }

    [[nodiscard]] double p() const { return p_; }
    [[nodiscard]] double q() const { return q_; }
    [[nodiscard]] double inv_p() const { return 1.0 / p_; }
    [[nodiscard]] double inv_q() const { return 1.0 / q_; }
    [[nodiscard]] double p_conj() const { return conj(p_); }
    [[nodiscard]] double q_conj() const { return conj(q_); }
    [[nodiscard]] ExponentPair conjugate() const {
        if (is_exact()) return from_inverses(Rational(1) - *inv_p_, Rational(1) - *inv_q_);
        return {p_conj(), q_conj()};
    }

    [[nodiscard]] bool is_exact() const { return inv_p_.has_value() && inv_q_.has_value(); }
    [[nodiscard]] const std::optional<Rational>& exact_inv_p() const { return inv_p_; }
    [[nodiscard]] const std::optional<Rational>& exact_inv_q() const { return inv_q_; }

    [[nodiscard]] bool p_finite() const { return std::isfinite(p_); }
    [[nodiscard]] bool q_finite() const { return std::isfinite(q_); }

    /// Throws unless 1 < p, q < inf.
    void require_open_range(const char* what) const {
        if (!(p_ > 1.0 && q_ > 1.0 && p_finite() && q_finite())) {
            throw PreconditionError(std::string(what) + ": exponents must satisfy 1 < p, q < inf");
        }
    }

    [[nodiscard]] std::string to_string() const {
        auto s = [](double v) {
            if (std::isinf(v)) return std::string("inf");
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        return "(" + s(p_) + "," + s(q_) + ")";
    }

private:
    ExponentPair(Rational a, Rational b)
        : p_(reciprocal(a)), q_(reciprocal(b)), inv_p_(a), inv_q_(b) {}

    static double reciprocal(Rational r) {
        return r == Rational(0) ? std::numeric_limits<double>::infinity() : 1.0 / r.to_double();
    }
    static double conj(double v) {
        if (std::isinf(v)) return 1.0;
        if (v == 1.0) return std::numeric_limits<double>::infinity();
        return v / (v - 1.0);
    }
    static void check(double v, const char* name) {
        if (std::isnan(v) || v < 1.0) {
            throw PreconditionError(std::string("ExponentPair: ") + name + " must lie in [1, inf]");
        }
    }
    static std::optional<Rational> try_rational(double x) {
        try {
            return Rational::approximate(x, 100000, 1e-14);
        } catch (const PreconditionError&) {
            return std::nullopt;
        }
    }

    double p_;
    double q_;
    std::optional<Rational> inv_p_;
    std::optional<Rational> inv_q_;
};

}  // namespace modspace
