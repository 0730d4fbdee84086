#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ritzhom/common.hpp"
#include "ritzhom/losses.hpp"
#include "ritzhom/material.hpp"

// Classical grid-based reference solvers. Cell-centered finite volumes with
// harmonic-mean face conductivities; homogeneous Dirichlet data enters the
// boundary fluxes at half-cell distance (ghost reflection). Systems are
// 5-point SPD and solved matrix-free by Jacobi-preconditioned CG to relative
// residual 1e-10 with iteration cap 50 n.

namespace ritzhom {

// Maps a macroscopic point into the unit cell: y = x/xi - floor(x/xi).
// Fractional parts within 1e-12 of 1 wrap to 0.
inline Vec2 micro_coord(Vec2 x, double xi) {
    Vec2 y;
    for (int d = 0; d < 2; ++d) {
        const double t = x[d] / xi;
        double f = t - std::floor(t);
        if (f > 1.0 - 1e-12) f = 0.0;
        y[d] = f;
    }
    return y;
}

// Cell-centered scalar field on a rectangle; index (i, j) -> j * n + i with
// i along x1. Node (i, j) sits at lo + ((i+1/2) hx, (j+1/2) hy).
struct FieldGrid {
    Rect rect;
    int n = 0;
    std::vector<double> values;

    FieldGrid() = default;
    FieldGrid(Rect r, int n_) : rect(r), n(n_), values(static_cast<std::size_t>(n_) * n_, 0.0) {}

    double hx() const { return rect.width() / n; }
    double hy() const { return rect.height() / n; }
    Vec2 node(int i, int j) const {
        return {rect.lo[0] + (i + 0.5) * hx(), rect.lo[1] + (j + 0.5) * hy()};
    }
    double operator()(int i, int j) const { return values[static_cast<std::size_t>(j) * n + i]; }
    double& operator()(int i, int j) { return values[static_cast<std::size_t>(j) * n + i]; }

    // value at the cell center nearest to p
    double nearest(Vec2 p) const {
        auto clampi = [this](double f) {
            int k = static_cast<int>(std::floor(f));
            return k < 0 ? 0 : (k >= n ? n - 1 : k);
        };
        return (*this)(clampi((p[0] - rect.lo[0]) / hx()), clampi((p[1] - rect.lo[1]) / hy()));
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what + " (relative residual " + std::to_string(residual) + ")"),
          residual(residual) {}
    double residual;
};

namespace fv {

// 5-point stencil with per-cell coefficients; boundary faces fold the
// Dirichlet ghost into the diagonal (factor 2: data at distance h/2).
struct Stencil {
    int n = 0;
    double h = 0.0;
    std::vector<double> diag, west, east, south, north;

    explicit Stencil(int n_, double h_)
        : n(n_),
          h(h_),
          diag(static_cast<std::size_t>(n_) * n_),
          west(diag.size()),
          east(diag.size()),
          south(diag.size()),
          north(diag.size()) {}

    void apply(std::span<const double> u, std::span<double> out) const {
        const std::size_t nn = diag.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(nn); ++k) {
            const int i = static_cast<int>(k % n);
            const int j = static_cast<int>(k / n);
            double s = diag[k] * u[k];
            if (i > 0) s += west[k] * u[k - 1];
            if (i < n - 1) s += east[k] * u[k + 1];
            if (j > 0) s += south[k] * u[k - n];
            if (j < n - 1) s += north[k] * u[k + n];
            out[k] = s;
        }
    }
};

// Face conductivities by harmonic means of cell-center samples; the
// component index picks a11 (x-faces) or a22 (y-faces).
// ax has (n+1) x n entries, ax(i, j) between cells (i-1, j) and (i, j);
// boundary faces carry the adjacent cell's value.
struct FaceField {
    int n = 0;
    std::vector<double> ax, ay;

    FaceField(int n_, const std::vector<double>& a11, const std::vector<double>& a22)
        : n(n_),
          ax(static_cast<std::size_t>(n_ + 1) * n_),
          ay(static_cast<std::size_t>(n_) * (n_ + 1)) {
        auto harm = [](double a, double b) { return 2.0 * a * b / (a + b); };
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i <= n; ++i) {
                double v;
                if (i == 0)
                    v = a11[static_cast<std::size_t>(j) * n];
                else if (i == n)
                    v = a11[static_cast<std::size_t>(j) * n + (n - 1)];
                else
                    v = harm(a11[static_cast<std::size_t>(j) * n + (i - 1)],
                             a11[static_cast<std::size_t>(j) * n + i]);
                x(i, j) = v;
            }
        }
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i < n; ++i) {
                double v;
                if (j == 0)
                    v = a22[static_cast<std::size_t>(i)];
                else if (j == n)
                    v = a22[static_cast<std::size_t>(n - 1) * n + i];
                else
                    v = harm(a22[static_cast<std::size_t>(j - 1) * n + i],
                             a22[static_cast<std::size_t>(j) * n + i]);
                y(i, j) = v;
            }
        }
    }

    double& x(int i, int j) { return ax[static_cast<std::size_t>(j) * (n + 1) + i]; }
    double x(int i, int j) const { return ax[static_cast<std::size_t>(j) * (n + 1) + i]; }
    double& y(int i, int j) { return ay[static_cast<std::size_t>(j) * n + i]; }
    double y(int i, int j) const { return ay[static_cast<std::size_t>(j) * n + i]; }
};

inline Stencil build_stencil(const FaceField& f, int n, double h) {
    Stencil st(n, h);
    const double ih2 = 1.0 / (h * h);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * n + i;
            const double aw = f.x(i, j), ae = f.x(i + 1, j);
            const double as = f.y(i, j), an = f.y(i, j + 1);
            double d = 0.0;
            d += (i > 0 ? aw : 2.0 * aw) * ih2;
            d += (i < n - 1 ? ae : 2.0 * ae) * ih2;
            d += (j > 0 ? as : 2.0 * as) * ih2;
            d += (j < n - 1 ? an : 2.0 * an) * ih2;
            st.diag[k] = d;
            st.west[k] = i > 0 ? -aw * ih2 : 0.0;
            st.east[k] = i < n - 1 ? -ae * ih2 : 0.0;
            st.south[k] = j > 0 ? -as * ih2 : 0.0;
            st.north[k] = j < n - 1 ? -an * ih2 : 0.0;
        }
    }
    return st;
}

// deterministic dot product: fixed 4096-element chunks summed in order
inline double det_dot(std::span<const double> a, std::span<const double> b) {
    constexpr std::size_t kChunk = 4096;
    const std::size_t n = a.size();
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partials(n_chunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::size_t b0 = static_cast<std::size_t>(c) * kChunk;
        const std::size_t b1 = std::min(b0 + kChunk, n);
        double s = 0.0;
        for (std::size_t k = b0; k < b1; ++k) s += a[k] * b[k];
        partials[static_cast<std::size_t>(c)] = s;
    }
    return ordered_sum(partials);
}

// Jacobi-preconditioned conjugate gradient; x starts at 0.
inline long pcg_solve(const Stencil& st, std::span<const double> b, std::span<double> x,
                      double rel_tol, long max_iter) {
    const std::size_t nn = b.size();
    std::vector<double> r(b.begin(), b.end()), z(nn), p(nn), q(nn);
    std::fill(x.begin(), x.end(), 0.0);
    const double bnorm = std::sqrt(det_dot(b, b));
    if (bnorm == 0.0) return 0;
    for (std::size_t k = 0; k < nn; ++k) z[k] = r[k] / st.diag[k];
    p = z;
    double rz = det_dot(r, z);
    double rnorm = std::sqrt(det_dot(r, r));
    long it = 0;
    while (rnorm > rel_tol * bnorm) {
        if (it >= max_iter)
            throw SolverError("conjugate gradient failed to converge within " +
                                  std::to_string(max_iter) + " iterations",
                              rnorm / bnorm);
        st.apply(p, q);
        const double alpha = rz / det_dot(p, q);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(nn); ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
            z[k] = r[k] / st.diag[k];
        }
        const double rz_new = det_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(nn); ++k)
            p[k] = z[k] + beta * p[k];
        rnorm = std::sqrt(det_dot(r, r));
        ++it;
    }
    return it;
}

// cell-centered conductivity component fields over a unit-cell grid
inline void sample_cell_conductivity(const Microstructure& micro, int n,
                                     std::vector<double>& a11, std::vector<double>& a22) {
    a11.resize(static_cast<std::size_t>(n) * n);
    a22.resize(a11.size());
    const double h = 1.0 / n;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Mat2 a = conductivity_at(micro, {(i + 0.5) * h, (j + 0.5) * h});
            a11[static_cast<std::size_t>(j) * n + i] = a(0, 0);
            a22[static_cast<std::size_t>(j) * n + i] = a(1, 1);
        }
    }
}

}  // namespace fv

constexpr double kCgRelTol = 1e-10;

// Fine-grid solve of -div(a^xi grad u) = f on the unit square, u = 0 on the
// boundary; the coefficient is the microstructure wrapped periodically with
// cell size xi.
inline FieldGrid dns_solve(const Microstructure& micro, const MacroProblem& macro, int n,
                           const std::function<double(Vec2)>& source = {}) {
    const double xi = macro.cell_size;
    const int cells = static_cast<int>(std::round(1.0 / xi));
    if (n % cells != 0 || n / cells < 40)
        throw std::invalid_argument(
            "dns_solve: n must be a multiple of 1/xi with at least 40 cells per unit cell");
    FieldGrid u(macro.domain, n);
    std::vector<double> a11(static_cast<std::size_t>(n) * n), a22(a11.size());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Mat2 a = conductivity_at(micro, micro_coord(u.node(i, j), xi));
            a11[static_cast<std::size_t>(j) * n + i] = a(0, 0);
            a22[static_cast<std::size_t>(j) * n + i] = a(1, 1);
        }
    }
    fv::FaceField faces(n, a11, a22);
    fv::Stencil st = fv::build_stencil(faces, n, u.hx());
    std::vector<double> b(a11.size(), macro.source);
    if (source)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                b[static_cast<std::size_t>(j) * n + i] = source(u.node(i, j));
    fv::pcg_solve(st, b, u.values, kCgRelTol, 50L * n);
    return u;
}

// Default DNS resolution: at least 40 cells per unit cell and at least 400
// cells per axis (rounded up to a whole number of unit cells).
inline int dns_resolution(double xi) {
    const int cells = static_cast<int>(std::round(1.0 / xi));
    const int floor_n = ((400 + cells - 1) / cells) * cells;
    return std::max(floor_n, 40 * cells);
}

// Lower-order cell problem in conservative form: the distributional right
// side of -div(a grad N) = div(a e_alpha) becomes face-flux differences of
// the harmonic face coefficients.
inline FieldGrid cell_solve_lower(const Microstructure& micro, int alpha, int n) {
    if (n < 64) throw std::invalid_argument("cell_solve_lower: n must be >= 64");
    if (alpha != 1 && alpha != 2) throw std::invalid_argument("alpha must be 1 or 2");
    FieldGrid N(unit_square(), n);
    std::vector<double> a11, a22;
    fv::sample_cell_conductivity(micro, n, a11, a22);
    fv::FaceField faces(n, a11, a22);
    fv::Stencil st = fv::build_stencil(faces, n, N.hx());
    const double h = N.hx();
    std::vector<double> b(a11.size());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            b[static_cast<std::size_t>(j) * n + i] =
                alpha == 1 ? (faces.x(i + 1, j) - faces.x(i, j)) / h
                           : (faces.y(i, j + 1) - faces.y(i, j)) / h;
    fv::pcg_solve(st, b, N.values, kCgRelTol, 50L * n);
    return N;
}

namespace fv {

// central differences with Dirichlet ghost reflection (u = 0 on faces)
inline void central_gradient(const FieldGrid& g, FieldGrid& d1, FieldGrid& d2) {
    const int n = g.n;
    const double ix = 0.5 / g.hx(), iy = 0.5 / g.hy();
    auto at = [&](int i, int j) {
        if (i < 0) return -g(0, j);
        if (i >= n) return -g(n - 1, j);
        if (j < 0) return -g(i, 0);
        if (j >= n) return -g(i, n - 1);
        return g(i, j);
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            d1(i, j) = (at(i + 1, j) - at(i - 1, j)) * ix;
            d2(i, j) = (at(i, j + 1) - at(i, j - 1)) * iy;
        }
    }
}

}  // namespace fv

// Higher-order cell problem, Eq-(8)-style data: conservative flux term
// div(a_{. a2} N_a1) plus cell-centered sources.
inline FieldGrid cell_solve_higher(const Microstructure& micro, int a1, int a2,
                                   const FieldGrid& n_lower, const HomogenizedTensor& a0,
                                   int n) {
    if (n != n_lower.n)
        throw std::invalid_argument("cell_solve_higher: lower-order grid resolution mismatch");
    if ((a1 != 1 && a1 != 2) || (a2 != 1 && a2 != 2))
        throw std::invalid_argument("alpha indices must be 1 or 2");
    FieldGrid N(unit_square(), n);
    std::vector<double> a11, a22;
    fv::sample_cell_conductivity(micro, n, a11, a22);
    fv::FaceField faces(n, a11, a22);
    fv::Stencil st = fv::build_stencil(faces, n, N.hx());
    const double h = N.hx();

    FieldGrid d1(unit_square(), n), d2(unit_square(), n);
    fv::central_gradient(n_lower, d1, d2);

    std::vector<double> b(a11.size());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * n + i;
            // flux-form term along a2; N vanishes on boundary faces
            double flux_div;
            if (a2 == 1) {
                const double fw = i > 0 ? faces.x(i, j) * 0.5 * (n_lower(i - 1, j) + n_lower(i, j))
                                        : 0.0;
                const double fe = i < n - 1
                                      ? faces.x(i + 1, j) * 0.5 * (n_lower(i, j) + n_lower(i + 1, j))
                                      : 0.0;
                flux_div = (fe - fw) / h;
            } else {
                const double fs = j > 0 ? faces.y(i, j) * 0.5 * (n_lower(i, j - 1) + n_lower(i, j))
                                        : 0.0;
                const double fn = j < n - 1
                                      ? faces.y(i, j + 1) * 0.5 * (n_lower(i, j) + n_lower(i, j + 1))
                                      : 0.0;
                flux_div = (fn - fs) / h;
            }
            const double acc = a2 == 1 ? a11[k] : a22[k];
            const double grad_term = acc * (a2 == 1 ? d1(i, j) : d2(i, j));
            const double diag_term = a1 == a2 ? (a1 == 1 ? a11[k] : a22[k]) : 0.0;
            b[k] = flux_div + grad_term + diag_term - a0.a(a1 - 1, a2 - 1);
        }
    }
    fv::pcg_solve(st, b, N.values, kCgRelTol, 50L * n);
    return N;
}

// Constant-coefficient macro solve; off-diagonal entries are dropped (the
// 5-point scheme cannot carry them) with a warning when nonzero.
inline FieldGrid fem_macro_solve(const HomogenizedTensor& a0, double f, int n,
                                 const std::function<double(Vec2)>& source = {}) {
    if (!a0.positive_definite())
        throw std::invalid_argument("fem_macro_solve: tensor not positive definite");
    const double off = std::max(std::abs(a0.a(0, 1)), std::abs(a0.a(1, 0)));
    if (off > 1e-6)
        std::fprintf(stderr,
                     "fem_macro_solve: dropping off-diagonal tensor entries (|a12| = %.3e)\n",
                     off);
    FieldGrid u(unit_square(), n);
    std::vector<double> a11(static_cast<std::size_t>(n) * n, a0.a(0, 0));
    std::vector<double> a22(a11.size(), a0.a(1, 1));
    fv::FaceField faces(n, a11, a22);
    fv::Stencil st = fv::build_stencil(faces, n, u.hx());
    std::vector<double> b(a11.size(), f);
    if (source)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                b[static_cast<std::size_t>(j) * n + i] = source(u.node(i, j));
    fv::pcg_solve(st, b, u.values, kCgRelTol, 50L * n);
    return u;
}

// Homogenized tensor from grid cell functions (central-difference gradients).
inline HomogenizedTensor homog_tensor_from_grids(const Microstructure& micro,
                                                 const FieldGrid& n1, const FieldGrid& n2) {
    const int n = n1.n;
    std::vector<double> a11, a22;
    fv::sample_cell_conductivity(micro, n, a11, a22);
    FieldGrid d1(unit_square(), n), d2(unit_square(), n);
    Mat2 a0;
    const double w = 1.0 / (static_cast<double>(n) * n);
    for (int col = 0; col < 2; ++col) {
        fv::central_gradient(col == 0 ? n1 : n2, d1, d2);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const std::size_t k = static_cast<std::size_t>(j) * n + i;
                a0(0, col) += w * ((col == 0 ? a11[k] : 0.0) + a11[k] * d1(i, j));
                a0(1, col) += w * ((col == 1 ? a22[k] : 0.0) + a22[k] * d2(i, j));
            }
        }
    }
    return {a0};
}

// ---- classical multi-scale reference ---------------------------------------

// Bilinear interpolant on the vertex lattice of a cell-centered grid.
// Dirichlet fields get exact zero boundary vertices; derivative fields are
// extrapolated by edge duplication.
struct VertexInterpolant {
    Rect rect;
    int n = 0;
    std::vector<double> v;  // (n+1)^2, index j*(n+1)+i

    static VertexInterpolant from_grid(const FieldGrid& g, bool dirichlet_zero) {
        VertexInterpolant out;
        out.rect = g.rect;
        out.n = g.n;
        const int n = g.n;
        out.v.assign(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
        auto cell = [&](int i, int j) {
            i = std::min(std::max(i, 0), n - 1);
            j = std::min(std::max(j, 0), n - 1);
            return g(i, j);
        };
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                const bool boundary = i == 0 || j == 0 || i == n || j == n;
                if (dirichlet_zero && boundary) continue;
                out.v[static_cast<std::size_t>(j) * (n + 1) + i] =
                    0.25 * (cell(i - 1, j - 1) + cell(i, j - 1) + cell(i - 1, j) + cell(i, j));
            }
        }
        return out;
    }

    double operator()(Vec2 p) const {
        double fx = (p[0] - rect.lo[0]) / rect.width() * n;
        double fy = (p[1] - rect.lo[1]) / rect.height() * n;
        fx = std::min(std::max(fx, 0.0), static_cast<double>(n) - 1e-12);
        fy = std::min(std::max(fy, 0.0), static_cast<double>(n) - 1e-12);
        const int i = static_cast<int>(fx);
        const int j = static_cast<int>(fy);
        const double tx = fx - i, ty = fy - j;
        const std::size_t k = static_cast<std::size_t>(j) * (n + 1) + i;
        return v[k] * (1 - tx) * (1 - ty) + v[k + 1] * tx * (1 - ty) +
               v[k + n + 1] * (1 - tx) * ty + v[k + n + 2] * tx * ty;
    }
};

// u^(2xi) evaluator assembled from grid cell functions, the grid homogenized
// solution, and its central-difference derivatives.
class HomsReference {
  public:
    HomsReference(const Microstructure& micro, const MacroProblem& macro, int n_cell,
                  int n_macro)
        : xi_(macro.cell_size) {
        n1_ = cell_solve_lower(micro, 1, n_cell);
        n2_ = cell_solve_lower(micro, 2, n_cell);
        tensor_ = homog_tensor_from_grids(micro, n1_, n2_);
        n11_ = cell_solve_higher(micro, 1, 1, n1_, tensor_, n_cell);
        n12_ = cell_solve_higher(micro, 1, 2, n1_, tensor_, n_cell);
        n21_ = cell_solve_higher(micro, 2, 1, n2_, tensor_, n_cell);
        n22_ = cell_solve_higher(micro, 2, 2, n2_, tensor_, n_cell);
        u0_ = fem_macro_solve(tensor_, macro.source, n_macro);
        build_interpolants();
    }

    // Rebuild from previously computed grids (e.g. persisted artifacts).
    static HomsReference from_grids(double xi, HomogenizedTensor tensor, FieldGrid u0,
                                    FieldGrid n1, FieldGrid n2, FieldGrid n11, FieldGrid n12,
                                    FieldGrid n21, FieldGrid n22) {
        HomsReference r(xi);
        r.tensor_ = tensor;
        r.u0_ = std::move(u0);
        r.n1_ = std::move(n1);
        r.n2_ = std::move(n2);
        r.n11_ = std::move(n11);
        r.n12_ = std::move(n12);
        r.n21_ = std::move(n21);
        r.n22_ = std::move(n22);
        r.build_interpolants();
        return r;
    }

    double evaluate(Vec2 x) const {
        if (!iu0_.rect.contains(x)) throw std::domain_error("HomsReference: point outside domain");
        const Vec2 y = micro_coord(x, xi_);
        const double mixed = id12_(x);
        return iu0_(x) + xi_ * (in1_(y) * id1_(x) + in2_(y) * id2_(x)) +
               xi_ * xi_ *
                   (in11_(y) * id11_(x) + (in12_(y) + in21_(y)) * mixed + in22_(y) * id22_(x));
    }

    const HomogenizedTensor& tensor() const { return tensor_; }
    const FieldGrid& u0() const { return u0_; }
    const FieldGrid& cell_grid(int a1, int a2 = 0) const {
        if (a2 == 0) return a1 == 1 ? n1_ : n2_;
        if (a1 == 1) return a2 == 1 ? n11_ : n12_;
        return a2 == 1 ? n21_ : n22_;
    }
    double xi() const { return xi_; }

  private:
    explicit HomsReference(double xi) : xi_(xi) {}

    void build_interpolants() {
        const int n_macro = u0_.n;
        FieldGrid d1(u0_.rect, n_macro), d2(u0_.rect, n_macro);
        fv::central_gradient(u0_, d1, d2);
        FieldGrid d11(u0_.rect, n_macro), d22(u0_.rect, n_macro), d12(u0_.rect, n_macro);
        second_derivatives(u0_, d11, d22, d12);

        iu0_ = VertexInterpolant::from_grid(u0_, true);
        id1_ = VertexInterpolant::from_grid(d1, false);
        id2_ = VertexInterpolant::from_grid(d2, false);
        id11_ = VertexInterpolant::from_grid(d11, false);
        id22_ = VertexInterpolant::from_grid(d22, false);
        id12_ = VertexInterpolant::from_grid(d12, false);
        in1_ = VertexInterpolant::from_grid(n1_, true);
        in2_ = VertexInterpolant::from_grid(n2_, true);
        in11_ = VertexInterpolant::from_grid(n11_, true);
        in12_ = VertexInterpolant::from_grid(n12_, true);
        in21_ = VertexInterpolant::from_grid(n21_, true);
        in22_ = VertexInterpolant::from_grid(n22_, true);
    }

    static void second_derivatives(const FieldGrid& g, FieldGrid& d11, FieldGrid& d22,
                                   FieldGrid& d12) {
        const int n = g.n;
        const double ix2 = 1.0 / (g.hx() * g.hx()), iy2 = 1.0 / (g.hy() * g.hy());
        const double ixy = 0.25 / (g.hx() * g.hy());
        auto at = [&](int i, int j) {
            // ghost reflection consistent with u = 0 on the boundary
            double sign = 1.0;
            if (i < 0) { i = 0; sign = -sign; }
            if (i >= n) { i = n - 1; sign = -sign; }
            if (j < 0) { j = 0; sign = -sign; }
            if (j >= n) { j = n - 1; sign = -sign; }
            return sign * g(i, j);
        };
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                d11(i, j) = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) * ix2;
                d22(i, j) = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) * iy2;
                d12(i, j) =
                    (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) *
                    ixy;
            }
        }
    }

    double xi_;
    FieldGrid n1_, n2_, n11_, n12_, n21_, n22_, u0_;
    HomogenizedTensor tensor_;
    VertexInterpolant iu0_, id1_, id2_, id11_, id22_, id12_;
    VertexInterpolant in1_, in2_, in11_, in12_, in21_, in22_;
};

inline HomsReference homs_reference(const Microstructure& micro, const MacroProblem& macro,
                                    int n_cell, int n_macro) {
    return HomsReference(micro, macro, n_cell, n_macro);
}

}  // namespace ritzhom
