#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"

namespace ppm {

inline double tricube(double u)
{
    if (u >= 1.0)
        return 0.0;
    const double t = 1.0 - u * u * u;
    return t * t * t;
}

// Local polynomial regression of y on x evaluated at every x_i. The
// neighbourhood of x_i is its ceil(span*n) nearest points; weights are
// tricube in distance / (distance to the farthest of those points). Points
// at exactly that distance get weight zero, so which of several tied points
// enters the window does not matter.
inline std::vector<double> loess_fit(std::span<const double> x, std::span<const double> y, double span, int degree)
{
    const std::size_t n = x.size();
    if (y.size() != n)
        throw ConfigError("loess: x and y lengths differ");
    if (!(span > 0.0 && span <= 1.0))
        throw ConfigError("loess: span must lie in (0, 1]");
    if (degree != 0 && degree != 1)
        throw ConfigError("loess: degree must be 0 or 1");
    if (n == 0)
        return {};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[order[i]];
        ys[i] = y[order[i]];
    }

    const auto q = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(span * static_cast<double>(n) - 1e-9)), 1, n);
    std::vector<double> fitted(n);
    std::size_t left = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x0 = xs[k];
        // Slide the q-wide window right while that brings it closer to x0.
        while (left + q < n && xs[left + q] - x0 < x0 - xs[left])
            ++left;
        const double h = std::max(x0 - xs[left], xs[left + q - 1] - x0);
        if (h == 0.0) {
            // Zero bandwidth: every point sitting at x0 counts, window or not.
            const auto [lo, hi] = std::equal_range(xs.begin(), xs.end(), x0);
            double sum = 0.0;
            for (auto it = lo; it != hi; ++it)
                sum += ys[static_cast<std::size_t>(it - xs.begin())];
            fitted[order[k]] = sum / static_cast<double>(hi - lo);
            continue;
        }

        double sw = 0.0, sx = 0.0, sy = 0.0;
        for (std::size_t j = left; j < left + q; ++j) {
            const double d = std::abs(xs[j] - x0);
            const double w = tricube(d / h);
            sw += w;
            sx += w * xs[j];
            sy += w * ys[j];
        }
        const double xbar = sx / sw;
        const double ybar = sy / sw;
        double value = ybar;
        if (degree == 1) {
            double sxx = 0.0, sxy = 0.0;
            for (std::size_t j = left; j < left + q; ++j) {
                const double d = std::abs(xs[j] - x0);
                const double w = tricube(d / h);
                sxx += w * (xs[j] - xbar) * (xs[j] - xbar);
                sxy += w * (xs[j] - xbar) * (ys[j] - ybar);
            }
            // A window with no spread in x cannot support a slope.
            if (sxx > 1e-14 * sw * std::max(1.0, xbar * xbar))
                value = ybar + sxy / sxx * (x0 - xbar);
        }
        fitted[order[k]] = value;
    }
    return fitted;
}

} // namespace ppm
