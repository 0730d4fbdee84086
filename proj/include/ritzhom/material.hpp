#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ritzhom/common.hpp"

// Unit-cell microstructure: piecewise-constant diagonal conductivity on
// Y = [0,1]^2, a homogeneous matrix with circular/square inclusions. Points
// exactly on an inclusion interface count as inclusion (closed regions).

namespace ritzhom {

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

struct Square {
    Vec2 center;
    double side = 0.0;
};

struct Inclusion {
    std::variant<Circle, Square> shape;
    Vec2 conductivity;  // diagonal pair (a11, a22)

    bool contains(Vec2 y) const {
        if (const Circle* c = std::get_if<Circle>(&shape)) {
            const double dx = y[0] - c->center[0];
            const double dy = y[1] - c->center[1];
            return dx * dx + dy * dy <= c->radius * c->radius;
        }
        const Square& s = std::get<Square>(shape);
        return std::max(std::abs(y[0] - s.center[0]), std::abs(y[1] - s.center[1])) <=
               0.5 * s.side;
    }

    // area inside the unit cell; squares are clipped, circles assumed inside
    double area() const {
        if (const Circle* c = std::get_if<Circle>(&shape))
            return 3.14159265358979323846 * c->radius * c->radius;
        const Square& s = std::get<Square>(shape);
        auto clip = [](double lo, double hi) {
            return std::max(0.0, std::min(hi, 1.0) - std::max(lo, 0.0));
        };
        return clip(s.center[0] - 0.5 * s.side, s.center[0] + 0.5 * s.side) *
               clip(s.center[1] - 0.5 * s.side, s.center[1] + 0.5 * s.side);
    }
};

inline Inclusion circle_inclusion(Vec2 center, double radius, double k) {
    return {Circle{center, radius}, {k, k}};
}
inline Inclusion square_inclusion(Vec2 center, double side, double k) {
    return {Square{center, side}, {k, k}};
}

class Microstructure {
  public:
    Microstructure(Vec2 matrix_conductivity, std::vector<Inclusion> inclusions)
        : matrix_(matrix_conductivity), inclusions_(std::move(inclusions)) {
        if (matrix_[0] <= 0.0 || matrix_[1] <= 0.0)
            throw std::invalid_argument("matrix conductivity must be positive");
        for (const auto& inc : inclusions_)
            if (inc.conductivity[0] <= 0.0 || inc.conductivity[1] <= 0.0)
                throw std::invalid_argument("inclusion conductivity must be positive");
        check_disjoint();
    }

    static Microstructure homogeneous(double k = 1.0) { return {{k, k}, {}}; }

    Vec2 matrix_conductivity() const { return matrix_; }
    const std::vector<Inclusion>& inclusions() const { return inclusions_; }

    double min_conductivity() const {
        double m = std::min(matrix_[0], matrix_[1]);
        for (const auto& inc : inclusions_)
            m = std::min({m, inc.conductivity[0], inc.conductivity[1]});
        return m;
    }
    double max_conductivity() const {
        double m = std::max(matrix_[0], matrix_[1]);
        for (const auto& inc : inclusions_)
            m = std::max({m, inc.conductivity[0], inc.conductivity[1]});
        return m;
    }

    // Volume-fraction weighted harmonic/arithmetic means (Reuss-Voigt
    // envelope), per diagonal component.
    Vec2 harmonic_mean() const {
        double inv[2] = {0.0, 0.0};
        double vol_matrix = 1.0;
        for (const auto& inc : inclusions_) {
            const double a = inc.area();
            vol_matrix -= a;
            inv[0] += a / inc.conductivity[0];
            inv[1] += a / inc.conductivity[1];
        }
        inv[0] += vol_matrix / matrix_[0];
        inv[1] += vol_matrix / matrix_[1];
        return {1.0 / inv[0], 1.0 / inv[1]};
    }
    Vec2 arithmetic_mean() const {
        double s[2] = {0.0, 0.0};
        double vol_matrix = 1.0;
        for (const auto& inc : inclusions_) {
            const double a = inc.area();
            vol_matrix -= a;
            s[0] += a * inc.conductivity[0];
            s[1] += a * inc.conductivity[1];
        }
        s[0] += vol_matrix * matrix_[0];
        s[1] += vol_matrix * matrix_[1];
        return {s[0], s[1]};
    }

  private:
    void check_disjoint() const {
        for (std::size_t i = 0; i < inclusions_.size(); ++i)
            for (std::size_t j = i + 1; j < inclusions_.size(); ++j)
                if (overlap(inclusions_[i], inclusions_[j]))
                    throw std::invalid_argument("inclusions overlap");
    }

    static bool overlap(const Inclusion& a, const Inclusion& b) {
        // conservative: compare bounding radii in max-norm
        auto bounds = [](const Inclusion& inc) -> std::pair<Vec2, double> {
            if (const Circle* c = std::get_if<Circle>(&inc.shape)) return {c->center, c->radius};
            const Square& s = std::get<Square>(inc.shape);
            return {s.center, 0.5 * s.side * std::sqrt(2.0)};
        };
        const auto [ca, ra] = bounds(a);
        const auto [cb, rb] = bounds(b);
        const double dx = ca[0] - cb[0], dy = ca[1] - cb[1];
        return std::sqrt(dx * dx + dy * dy) < ra + rb;
    }

    Vec2 matrix_;
    std::vector<Inclusion> inclusions_;
};

struct MacroProblem {
    Rect domain = unit_square();
    double source = 10.0;       // constant internal heat source
    double cell_size = 0.1;     // xi; 1/xi whole cells tile the domain
    double boundary_value = 0.0;
};

// a(y), y in the closed unit cell; diagonal 2x2.
inline Mat2 conductivity_at(const Microstructure& micro, Vec2 y) {
    if (y[0] < 0.0 || y[0] > 1.0 || y[1] < 0.0 || y[1] > 1.0)
        throw std::domain_error("conductivity_at: point outside unit cell");
    for (const auto& inc : micro.inclusions())
        if (inc.contains(y)) return Mat2::diag(inc.conductivity[0], inc.conductivity[1]);
    const Vec2 m = micro.matrix_conductivity();
    return Mat2::diag(m[0], m[1]);
}

// ---- benchmark unit cells ----------------------------------------------
// Centered circle / centered square / two circles on the diagonal, matrix
// conductivity 1, source 10, unit macro domain. The laminate splits the cell
// at y1 = 0.5 (left half takes the inclusion conductivity).

struct CircleCase {
    double radius = 0.3;
    double inclusion_k = 0.1;
};
struct SquareCase {
    double side = 0.5;
    double inclusion_k = 0.1;
};
struct TwoCircleCase {
    double k_lower = 0.01;  // circle centered (0.3, 0.3)
    double k_upper = 0.01;  // circle centered (0.7, 0.7)
};
struct LaminateCase {
    double left_k = 0.1;
};
struct HomogeneousCase {
    double k = 1.0;
};

using CaseSpec =
    std::variant<CircleCase, SquareCase, TwoCircleCase, LaminateCase, HomogeneousCase>;

inline Microstructure make_microstructure(const CaseSpec& spec, double matrix_k = 1.0) {
    const Vec2 mk{matrix_k, matrix_k};
    if (const auto* c = std::get_if<CircleCase>(&spec))
        return {mk, {circle_inclusion({0.5, 0.5}, c->radius, c->inclusion_k)}};
    if (const auto* s = std::get_if<SquareCase>(&spec))
        return {mk, {square_inclusion({0.5, 0.5}, s->side, s->inclusion_k)}};
    if (const auto* t = std::get_if<TwoCircleCase>(&spec))
        return {mk,
                {circle_inclusion({0.3, 0.3}, 0.2, t->k_lower),
                 circle_inclusion({0.7, 0.7}, 0.2, t->k_upper)}};
    if (const auto* l = std::get_if<LaminateCase>(&spec))
        return {mk, {square_inclusion({0.0, 0.5}, 1.0, l->left_k)}};
    return Microstructure::homogeneous(std::get<HomogeneousCase>(spec).k);
}

inline std::pair<Microstructure, MacroProblem> benchmark_problem(const CaseSpec& spec,
                                                                 double cell_size = 0.1,
                                                                 double source = 10.0,
                                                                 double matrix_k = 1.0) {
    MacroProblem macro;
    macro.source = source;
    macro.cell_size = cell_size;
    const double inv = 1.0 / cell_size;
    if (cell_size <= 0.0 || std::abs(inv - std::round(inv)) > 1e-9)
        throw std::invalid_argument("1/cell_size must be a positive integer");
    return {make_microstructure(spec, matrix_k), macro};
}

}  // namespace ritzhom
