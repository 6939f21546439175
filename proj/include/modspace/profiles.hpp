#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "modspace/grid.hpp"
#include "modspace/numeric.hpp"

namespace modspace {

/// C^inf step: 0 for t <= 0, 1 for t >= 1, g(t)/(g(t)+g(1-t)) with g(t) = exp(-1/t).
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double g0 = std::exp(-1.0 / t);
    const double g1 = std::exp(-1.0 / (1.0 - t));
    return g0 / (g0 + g1);
}

/// Real frequency profile with compact support in the sup-norm ball of `radius`.
struct FrequencyProfile {
    std::function<double(const Point&)> value;
    double radius = 1.0;
    std::string name;

    double operator()(const Point& xi) const { return value(xi); }
};

/// Radial cutoff: 1 on |xi| <= a0, 0 on |xi| >= 2.
inline double psi0_value(double r, double a0) {
    return 1.0 - smooth_step((r - a0) / (2.0 - a0));
}

/// One-dimensional tile: h(t + 1/2) - h(t - 1/2), h a smooth step over [-w, w].
/// Integer translates sum to one; support is [-1/2 - w, 1/2 + w].
inline double phi1_value(double t, double w) {
    auto h = [w](double s) { return smooth_step((s + w) / (2.0 * w)); };
    return h(t + 0.5) - h(t - 0.5);
}

/// Annulus profile in u = log2|xi|: 1 for |u| <= 1/4, 0 for |u| >= 1/2.
inline double eta_annulus_value(double r) {
    if (r <= 0.0) return 0.0;
    const double u = std::abs(std::log2(r));
    return 1.0 - smooth_step((u - 0.25) / 0.25);
}

/// Product tile phi(xi) = prod_i phi1(xi_i) in dimension `dim`.
inline FrequencyProfile tile_profile(int dim, double w = 0.25) {
    return {[dim, w](const Point& xi) {
                double v = phi1_value(xi[0], w);
                if (dim == 2) v *= phi1_value(xi[1], w);
                return v;
            },
            0.5 + w, "tile"};
}

}  // namespace modspace
