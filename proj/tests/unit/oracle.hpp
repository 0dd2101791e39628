#pragma once

// Reference computations for the unit tests, written independently of the
// library: plain composite Simpson integration and brute-force grids.

#include <cmath>
#include <functional>
#include <algorithm>
#include <numbers>
#include <vector>

namespace oracle {

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000,
                      bool open_ends = false) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    // Open ends sample just inside [a, b], for integrands that jump at the ends.
    double s = open_ends ? f(std::nextafter(a, b)) + f(std::nextafter(b, a)) : f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Simpson on each piece of [a, b] cut at the given points (kinks, jumps).
inline double simpson_pieces(const std::function<double(double)>& f, double a, double b,
                             std::vector<double> cuts, int n = 20000) {
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = std::max(a, cuts[i]), hi = std::min(b, cuts[i + 1]);
        if (hi > lo) s += simpson(f, lo, hi, n, true);
    }
    return s;
}

/// E[g(Z)] for Z ~ N(0, s²) over ±12s, cut where g is not smooth.
inline double normal_expect(const std::function<double(double)>& g, double s = 1.0,
                            std::vector<double> cuts = {}, int n = 40000) {
    return simpson_pieces([&](double z) { return g(z) * normal_pdf(z / s) / s; }, -12.0 * s, 12.0 * s,
                          std::move(cuts), n);
}

/// Argmax of f on an evenly spaced grid of `points` points over [lo, hi].
inline double grid_argmax(const std::function<double(double)>& f, double lo, double hi, int points) {
    double best_x = lo, best = f(lo);
    for (int i = 1; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        const double y = f(x);
        if (y > best) {
            best = y;
            best_x = x;
        }
    }
    return best_x;
}

}  // namespace oracle
