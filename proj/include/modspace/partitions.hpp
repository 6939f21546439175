#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "modspace/grid.hpp"
#include "modspace/numeric.hpp"
#include "modspace/profiles.hpp"

namespace modspace {

/// Littlewood-Paley pair (psi0, psi), the unit tile phi and the annulus
/// profile eta, all built from the same C^inf step.
///
/// psi0 = 1 on |xi| <= a0 (1 <= a0 < 2) and vanishes for |xi| >= 2;
/// psi(xi) = psi0(xi) - psi0(2 xi), so psi0 + sum_{j>=1} psi(2^-j xi) telescopes to 1. phi is a product of
/// one-dimensional tiles whose integer translates sum to 1.
struct PartitionFamily {
    int dim = 1;
    double inner_radius = 1.5;   ///< a0
    double tile_width = 0.25;    ///< w, phi1 has support [-1/2 - w, 1/2 + w]

    // Support radii of eta: plateau 2^{+-1/4}, support 2^{+-1/2}.
    static constexpr double eta_plateau_lo = 0.8408964152537145;
    static constexpr double eta_plateau_hi = 1.189207115002721;
    static constexpr double eta_support_lo = 0.7071067811865476;
    static constexpr double eta_support_hi = 1.4142135623730951;

    [[nodiscard]] double psi0(const Point& xi) const { return psi0_value(norm2(xi, dim), inner_radius); }
    [[nodiscard]] double psi(const Point& xi) const {
        const double r = norm2(xi, dim);
        return psi0_value(r, inner_radius) - psi0_value(2.0 * r, inner_radius);
    }
    /// psi_0 = psi0, psi_j = psi(2^-j .) for j >= 1.
    [[nodiscard]] double psi_j(int j, const Point& xi) const {
        if (j == 0) return psi0(xi);
        const double s = std::ldexp(1.0, -j);
        return psi({s * xi[0], s * xi[1]});
    }
    [[nodiscard]] double phi(const Point& xi) const {
        double v = phi1_value(xi[0], tile_width);
        if (dim == 2) v *= phi1_value(xi[1], tile_width);
        return v;
    }
    [[nodiscard]] double phi_radius() const { return 0.5 + tile_width; }
    [[nodiscard]] double eta(const Point& xi) const { return eta_annulus_value(norm2(xi, dim)); }

    [[nodiscard]] FrequencyProfile tile() const { return tile_profile(dim, tile_width); }

    /// Largest j with psi_j nonzero somewhere in |xi|_2 <= radius.
    [[nodiscard]] static int max_level(double radius) {
        int j = 0;
        while (std::ldexp(inner_radius_floor, j) < radius) ++j;
        return j + 1;
    }

private:
    static constexpr double inner_radius_floor = 1.0;
};

namespace detail {

inline void partition_fail(const std::string& identity, double deviation) {
    throw ConstructionError("build_partitions: " + identity + " violated, max deviation " +
                            std::to_string(deviation));
}

}  // namespace detail

/// Builds and verifies the partition family.
///
/// `smoothness` in (0, 1] widens the transition bands: a0 = 2 - smoothness
/// and tile width w = smoothness/2. Every identity is checked on `check_grid`
/// (frequency nodes) and on a seeded random sample before returning.
inline PartitionFamily build_partitions(double smoothness, const Grid& check_grid, double tolerance = 1e-10) {
    if (!(smoothness > 0.0 && smoothness <= 1.0)) {
        throw PreconditionError("build_partitions: smoothness must lie in (0, 1]");
    }
    PartitionFamily P;
    P.dim = check_grid.dim();
    P.inner_radius = 2.0 - smoothness;
    P.tile_width = 0.5 * smoothness;
    const int dim = P.dim;

    std::vector<Point> pts;
    for (std::size_t k = 0; k < check_grid.size(); ++k) pts.push_back(check_grid.frequency_at(k));
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(-check_grid.nyquist(), check_grid.nyquist());
    for (int i = 0; i < 10000; ++i) pts.push_back({u(rng), dim == 2 ? u(rng) : 0.0});

    const int jmax = PartitionFamily::max_level(std::sqrt(2.0) * check_grid.nyquist());
    double lp_dev = 0, tile_dev = 0, supp_dev = 0, eta_dev = 0;
    for (const auto& xi : pts) {
        double s = 0.0;
        for (int j = 0; j <= jmax; ++j) s += P.psi_j(j, xi);
        lp_dev = std::max(lp_dev, std::abs(s - 1.0));

        double t = 0.0;
        const int r = static_cast<int>(std::ceil(P.phi_radius())) + 1;
        const long c0 = std::lround(xi[0]), c1 = std::lround(xi[1]);
        for (long k0 = c0 - r; k0 <= c0 + r; ++k0) {
            for (long k1 = (dim == 2 ? c1 - r : 0); k1 <= (dim == 2 ? c1 + r : 0); ++k1) {
                t += P.phi({xi[0] - static_cast<double>(k0), xi[1] - static_cast<double>(k1)});
            }
        }
        tile_dev = std::max(tile_dev, std::abs(t - 1.0));

        const double rad = norm2(xi, dim);
        if (rad < 0.5 || rad > 2.0) supp_dev = std::max(supp_dev, std::abs(P.psi(xi)));
        if (rad > 2.0) supp_dev = std::max(supp_dev, std::abs(P.psi0(xi)));
        if (norm_inf(xi, dim) > 1.0) supp_dev = std::max(supp_dev, std::abs(P.phi(xi)));

        if (rad >= P.eta_plateau_lo && rad <= P.eta_plateau_hi) eta_dev = std::max(eta_dev, std::abs(P.eta(xi) - 1.0));
        if (rad <= P.eta_support_lo || rad >= P.eta_support_hi) eta_dev = std::max(eta_dev, std::abs(P.eta(xi)));
    }
    if (lp_dev > tolerance) detail::partition_fail("sum_j psi_j = 1", lp_dev);
    if (tile_dev > tolerance) detail::partition_fail("sum_k phi(xi - k) = 1", tile_dev);
    if (supp_dev > 0.0) detail::partition_fail("support of psi0/psi/phi", supp_dev);
    if (eta_dev > 0.0) detail::partition_fail("eta plateau/support", eta_dev);

    // Derivative scaling of psi_j: ||d^a psi_j||_inf 2^{j|a|} should not depend on j.
    for (int order = 1; order <= 2; ++order) {
        double lo = kInf, hi = 0.0;
        for (int j = 1; j <= 6; ++j) {
            const double scale = std::ldexp(1.0, j);
            const double h = 1e-3 * scale;
            double m = 0.0;
            for (int i = 0; i <= 4000; ++i) {
                const double x = scale * (0.5 + 1.5 * i / 4000.0);
                auto f = [&](double y) { return P.psi_j(j, {y, 0.0}); };
                const double d = order == 1 ? (f(x + h) - f(x - h)) / (2 * h)
                                            : (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
                m = std::max(m, std::abs(d));
            }
            const double c = m * std::pow(scale, order);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        if (hi > 1.05 * lo) detail::partition_fail("derivative bound 2^{-j|alpha|}", hi / lo - 1.0);
    }
    return P;
}

inline PartitionFamily build_partitions(double smoothness = 0.5) {
    return build_partitions(smoothness, Grid::standard(1));
}

}  // namespace modspace
