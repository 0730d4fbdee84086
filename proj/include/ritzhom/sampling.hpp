#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ritzhom/common.hpp"
#include "ritzhom/rng.hpp"

namespace ritzhom {

struct SamplingPlan {
    int n_interior = 10000;
    int n_boundary = 0;  // only used by the soft-penalty mode
    std::uint64_t seed = 1;
    bool resample_each_epoch = false;
};

// Uniform i.i.d. points in the open rectangle; x1 drawn before x2 per point.
inline std::vector<Vec2> sample_interior(const Rect& rect, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_interior: n must be >= 1");
    Rng rng(seed);
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x1 = rng.uniform(rect.lo[0], rect.hi[0]);
        const double x2 = rng.uniform(rect.lo[1], rect.hi[1]);
        pts.push_back({x1, x2});
    }
    return pts;
}

// Uniform points on the perimeter by arc length; edges walked
// bottom -> right -> top -> left.
inline std::vector<Vec2> sample_boundary(const Rect& rect, int n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("sample_boundary: n must be >= 0");
    Rng rng(seed);
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    const double w = rect.width(), h = rect.height();
    const double perimeter = 2.0 * (w + h);
    for (int i = 0; i < n; ++i) {
        double t = rng.uniform01() * perimeter;
        if (t < w) {
            pts.push_back({rect.lo[0] + t, rect.lo[1]});
        } else if ((t -= w) < h) {
            pts.push_back({rect.hi[0], rect.lo[1] + t});
        } else if ((t -= h) < w) {
            pts.push_back({rect.hi[0] - t, rect.hi[1]});
        } else {
            pts.push_back({rect.lo[0], rect.hi[1] - (t - w)});
        }
    }
    return pts;
}

// Midpoint rule: N x N nodes at cell centers, equal weights area/N^2.
struct QuadratureGrid {
    Rect rect;
    int n = 0;

    std::size_t node_count() const { return static_cast<std::size_t>(n) * n; }
    double weight() const { return rect.area() / (static_cast<double>(n) * n); }
    Vec2 node(int i, int j) const {
        return {rect.lo[0] + (i + 0.5) * rect.width() / n,
                rect.lo[1] + (j + 0.5) * rect.height() / n};
    }

    template <class F>
    double integrate(F&& f) const {
        const double wgt = weight();
        double sum = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) sum += f(node(i, j));
        return wgt * sum;
    }
};

inline QuadratureGrid midpoint_grid(const Rect& rect, int n) {
    if (n < 1) throw std::invalid_argument("midpoint_grid: N must be >= 1");
    return {rect, n};
}

}  // namespace ritzhom
