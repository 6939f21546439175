#pragma once

#include <cmath>
#include <vector>

#include "modspace/numeric.hpp"

namespace modspace {

/// Least-squares line through (x, y); residual is the RMS deviation.
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::vector<double> xs, ys;
};

inline FitResult fit_line(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size()) throw StructuralError("fit_line: abscissa/ordinate size mismatch");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw PreconditionError("fit_line: non-finite sample");
    }
    bool distinct = false;
    for (std::size_t i = 1; i < xs.size(); ++i) distinct = distinct || xs[i] != xs[0];
    if (xs.size() < 2 || !distinct) throw PreconditionError("fit_line: need at least two distinct abscissae");

    const double n = static_cast<double>(xs.size());
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx.add(xs[i]);
        sy.add(ys[i]);
    }
    const double mx = sx.value() / n, my = sy.value() / n;
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx.add((xs[i] - mx) * (xs[i] - mx));
        sxy.add((xs[i] - mx) * (ys[i] - my));
    }
    FitResult r;
    r.slope = sxy.value() / sxx.value();
    r.intercept = my - r.slope * mx;
    CompensatedSum rr;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = ys[i] - (r.intercept + r.slope * xs[i]);
        rr.add(d * d);
    }
    r.residual = std::sqrt(rr.value() / n);
    r.xs = std::move(xs);
    r.ys = std::move(ys);
    return r;
}

/// Fit of log y against log x (natural logs); both must be positive.
inline FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw StructuralError("fit_loglog: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw PreconditionError("fit_loglog: values must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(std::move(lx), std::move(ly));
}

}  // namespace modspace
