#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "modspace/exponents.hpp"
#include "modspace/numeric.hpp"

namespace modspace {

// All formulas are written in the reciprocals a = 1/p, b = 1/q and templated on
// the scalar so they run both in exact Rational arithmetic and in double.

namespace detail {
template <class T>
T min2(T x, T y) { return y < x ? y : x; }
template <class T>
T max2(T x, T y) { return x < y ? y : x; }
template <class T>
T absval(T x) { return x < T(0) ? -x : x; }
}  // namespace detail

/// mu1 = max{0, 1/q - min(1/p, 1/p')} - 1/p
template <class T>
T mu1(T a, T b) {
    using detail::max2;
    using detail::min2;
    return max2(T(0), b - min2(a, T(1) - a)) - a;
}

/// mu2 = min{0, 1/q - max(1/p, 1/p')} - 1/p
template <class T>
T mu2(T a, T b) {
    using detail::max2;
    using detail::min2;
    return min2(T(0), b - max2(a, T(1) - a)) - a;
}

inline double mu1(const ExponentPair& e) {
    if (e.is_exact()) return mu1(*e.exact_inv_p(), *e.exact_inv_q()).to_double();
    return mu1(e.inv_p(), e.inv_q());
}
inline double mu2(const ExponentPair& e) {
    if (e.is_exact()) return mu2(*e.exact_inv_p(), *e.exact_inv_q()).to_double();
    return mu2(e.inv_p(), e.inv_q());
}

enum class Region { I1, I2, I3, I1s, I2s, I3s, J1, J2, J3 };

inline const char* region_name(Region r) {
    static constexpr std::array<const char*, 9> names{"I1", "I2", "I3", "I1*", "I2*",
                                                      "I3*", "J1", "J2", "J3"};
    return names[static_cast<std::size_t>(r)];
}

/// Every region whose (closed) defining inequalities hold at (1/p, 1/q).
struct RegionLabel {
    std::array<bool, 9> contains{};

    [[nodiscard]] bool in(Region r) const { return contains[static_cast<std::size_t>(r)]; }
    [[nodiscard]] std::vector<Region> regions() const {
        std::vector<Region> out;
        for (std::size_t i = 0; i < contains.size(); ++i) {
            if (contains[i]) out.push_back(static_cast<Region>(i));
        }
        return out;
    }
    /// Regions joined with '|', e.g. "I2|I2*|J1".
    [[nodiscard]] std::string to_string() const {
        std::string s;
        for (auto r : regions()) {
            if (!s.empty()) s += '|';
            s += region_name(r);
        }
        return s;
    }
};

template <class T>
RegionLabel region(T a, T b) {
    using detail::max2;
    using detail::min2;
    const T half = T(1) / T(2);
    const T ac = T(1) - a;
    RegionLabel r;
    auto set = [&](Region reg, bool v) { r.contains[static_cast<std::size_t>(reg)] = v; };
    const bool i1 = min2(b, half) >= a;
    const bool i2 = min2(a, ac) >= b;
    const bool i3 = min2(b, half) >= ac;
    const bool i1s = max2(b, half) <= a;
    const bool i2s = max2(a, ac) <= b;
    const bool i3s = max2(b, half) <= ac;
    set(Region::I1, i1);
    set(Region::I2, i2);
    set(Region::I3, i3);
    set(Region::I1s, i1s);
    set(Region::I2s, i2s);
    set(Region::I3s, i3s);
    set(Region::J1, (i1 && i2s) || (i2 && i1s));
    set(Region::J2, (i1 && i3s) || (i3 && i1s));
    set(Region::J3, (i2 && i3s) || (i3 && i2s));
    return r;
}

inline RegionLabel region(const ExponentPair& e) {
    if (e.is_exact()) return region(*e.exact_inv_p(), *e.exact_inv_q());
    return region(e.inv_p(), e.inv_q());
}

/// Piecewise value of mu1 on each I region containing the point.
template <class T>
std::vector<std::pair<Region, T>> mu1_piecewise(T a, T b) {
    const auto lab = region(a, b);
    std::vector<std::pair<Region, T>> out;
    if (lab.in(Region::I1)) out.emplace_back(Region::I1, -T(2) * a + b);
    if (lab.in(Region::I2)) out.emplace_back(Region::I2, -a);
    if (lab.in(Region::I3)) out.emplace_back(Region::I3, b - T(1));
    return out;
}

/// Piecewise value of mu2 on each I* region containing the point.
template <class T>
std::vector<std::pair<Region, T>> mu2_piecewise(T a, T b) {
    const auto lab = region(a, b);
    std::vector<std::pair<Region, T>> out;
    if (lab.in(Region::I1s)) out.emplace_back(Region::I1s, -T(2) * a + b);
    if (lab.in(Region::I2s)) out.emplace_back(Region::I2s, -a);
    if (lab.in(Region::I3s)) out.emplace_back(Region::I3s, b - T(1));
    return out;
}

/// Gap mu1 - mu2 from the J table, one entry per J region containing the point.
template <class T>
std::vector<std::pair<Region, T>> gap_piecewise(T a, T b) {
    using detail::absval;
    const auto lab = region(a, b);
    std::vector<std::pair<Region, T>> out;
    if (lab.in(Region::J1)) out.emplace_back(Region::J1, absval(a - b));
    if (lab.in(Region::J2)) out.emplace_back(Region::J2, absval(T(2) * a - T(1)));
    if (lab.in(Region::J3)) out.emplace_back(Region::J3, absval(a + b - T(1)));
    return out;
}

template <class T>
T critical_order_value(T a, T b, T delta, int n) {
    if (delta < T(0) || !(delta < T(1))) {
        throw PreconditionError("critical_order: delta must satisfy 0 <= delta < 1");
    }
    if (n < 1) throw PreconditionError("critical_order: dimension must be positive");
    return -(mu1(a, b) - mu2(a, b)) * delta * T(n);
}

struct CriticalOrder {
    double p = 2.0;
    double q = 2.0;
    double delta = 0.0;
    int n = 1;
    double value = 0.0;
};

/// m_crit = -(mu1 - mu2) * delta * n; operators of order m <= m_crit are bounded.
inline CriticalOrder critical_order(const ExponentPair& e, double delta, int n) {
    CriticalOrder c{e.p(), e.q(), delta, n, 0.0};
    if (e.is_exact()) {
        try {
            const Rational d = Rational::approximate(delta, 100000, 1e-15);
            c.value = critical_order_value(*e.exact_inv_p(), *e.exact_inv_q(), d, n).to_double();
            return c;
        } catch (const PreconditionError&) {
            if (delta < 0.0 || !(delta < 1.0)) throw;
        }
    }
    c.value = critical_order_value(e.inv_p(), e.inv_q(), delta, n) + 0.0;
    return c;
}

}  // namespace modspace
