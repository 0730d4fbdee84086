#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ritzhom {

struct Vec2 {
    double v[2] = {0.0, 0.0};

    Vec2() = default;
    Vec2(double a, double b) : v{a, b} {}

    double operator[](int i) const { return v[i]; }
    double& operator[](int i) { return v[i]; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a[0], s * a[1]}; }
inline double dot(Vec2 a, Vec2 b) { return a[0] * b[0] + a[1] * b[1]; }

// Symmetric-use 2x2 matrix; stored row-major.
struct Mat2 {
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    Mat2() = default;
    Mat2(double a11, double a12, double a21, double a22) : m{{a11, a12}, {a21, a22}} {}

    static Mat2 diag(double a, double b) { return {a, 0.0, 0.0, b}; }
    static Mat2 identity() { return diag(1.0, 1.0); }

    double operator()(int i, int j) const { return m[i][j]; }
    double& operator()(int i, int j) { return m[i][j]; }
};

inline Vec2 operator*(const Mat2& a, Vec2 x) {
    return {a(0, 0) * x[0] + a(0, 1) * x[1], a(1, 0) * x[0] + a(1, 1) * x[1]};
}

inline double frobenius_norm(const Mat2& a) {
    return std::sqrt(a(0, 0) * a(0, 0) + a(0, 1) * a(0, 1) + a(1, 0) * a(1, 0) +
                     a(1, 1) * a(1, 1));
}

// 2x2 symmetric positive definiteness via leading minors.
inline bool positive_definite(const Mat2& a) {
    return a(0, 0) > 0.0 && a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) > 0.0;
}

struct Rect {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};

    double width() const { return hi[0] - lo[0]; }
    double height() const { return hi[1] - lo[1]; }
    double area() const { return width() * height(); }
    bool contains(Vec2 p) const {
        return p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1];
    }
};

inline Rect unit_square() { return Rect{{0.0, 0.0}, {1.0, 1.0}}; }

// Deterministic sum: fixed left-to-right order regardless of how the terms
// were produced (chunked reductions feed through this).
inline double ordered_sum(std::span<const double> terms) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

// SplitMix64; used to derive independent sub-seeds from one global seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ritzhom
