#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ritzhom/common.hpp"
#include "ritzhom/network.hpp"
#include "ritzhom/oracle.hpp"

// Assembly of the multi-scale solution
//   u(x) = u0(x) + xi N_a1(y) d u0/dx_a1 + xi^2 N_a1a2(y) d^2 u0/dx_a1 dx_a2,
// y = micro_coord(x, xi), summed over a1, a2 in {1,2}; and the relative-L2
// error metrics against the fine-grid and classical references.

namespace ritzhom {

struct MultiscaleSolution {
    HardConstrainedNet u0;
    std::array<HardConstrainedNet, 2> cell_lower;   // N_1, N_2
    std::array<HardConstrainedNet, 4> cell_higher;  // N_11, N_12, N_21, N_22
    double xi = 0.1;
    int order = 2;  // 0: u0 only, 1: + first corrector, 2: full

    const HardConstrainedNet& higher(int a1, int a2) const {
        return cell_higher[static_cast<std::size_t>((a1 - 1) * 2 + (a2 - 1))];
    }
};

// Point evaluation; u0 derivatives come from the autodiff Hessian. For grids
// prefer MultiscaleField, which reuses evaluators across points.
inline double evaluate_multiscale(const MultiscaleSolution& sol, Vec2 x) {
    if (!sol.u0.domain.contains(x))
        throw std::domain_error("evaluate_multiscale: point outside domain");
    const Vec2 y = micro_coord(x, sol.xi);
    if (sol.order == 0) return forward(sol.u0, x);
    if (sol.order == 1) {
        const ValueGrad vg = forward_with_input_grad(sol.u0, x);
        return vg.value + sol.xi * (forward(sol.cell_lower[0], y) * vg.grad[0] +
                                    forward(sol.cell_lower[1], y) * vg.grad[1]);
    }
    const ValueGradHess vh = forward_with_input_hessian(sol.u0, x);
    double u = vh.value;
    u += sol.xi * (forward(sol.cell_lower[0], y) * vh.grad[0] +
                   forward(sol.cell_lower[1], y) * vh.grad[1]);
    u += sol.xi * sol.xi *
         (forward(sol.higher(1, 1), y) * vh.hess(0, 0) +
          forward(sol.higher(1, 2), y) * vh.hess(0, 1) +
          forward(sol.higher(2, 1), y) * vh.hess(1, 0) +
          forward(sol.higher(2, 2), y) * vh.hess(1, 1));
    return u;
}

// Batch evaluator: one NetEvaluator per net, shared across all points.
class MultiscaleField {
  public:
    explicit MultiscaleField(const MultiscaleSolution& sol)
        : sol_(sol), u0_eval_(sol.u0) {}

    double operator()(Vec2 x) {
        if (!sol_.u0.domain.contains(x))
            throw std::domain_error("evaluate_multiscale: point outside domain");
        if (sol_.order == 0) return u0_eval_.value(x);
        const Vec2 y = micro_coord(x, sol_.xi);
        if (sol_.order == 1) {
            const ValueGrad vg = u0_eval_.value_grad(x);
            return vg.value + sol_.xi * (forward(sol_.cell_lower[0], y) * vg.grad[0] +
                                         forward(sol_.cell_lower[1], y) * vg.grad[1]);
        }
        const ValueGradHess vh = u0_eval_.value_grad_hess(x);
        double u = vh.value;
        u += sol_.xi * (forward(sol_.cell_lower[0], y) * vh.grad[0] +
                        forward(sol_.cell_lower[1], y) * vh.grad[1]);
        u += sol_.xi * sol_.xi *
             (forward(sol_.higher(1, 1), y) * vh.hess(0, 0) +
              forward(sol_.higher(1, 2), y) * vh.hess(0, 1) +
              forward(sol_.higher(2, 1), y) * vh.hess(1, 0) +
              forward(sol_.higher(2, 2), y) * vh.hess(1, 1));
        return u;
    }

    // samples the assembled field at the cell centers of `grid`
    FieldGrid on_grid(const FieldGrid& grid) {
        FieldGrid out(grid.rect, grid.n);
        for (int j = 0; j < grid.n; ++j)
            for (int i = 0; i < grid.n; ++i) out(i, j) = (*this)(grid.node(i, j));
        return out;
    }

  private:
    const MultiscaleSolution& sol_;
    NetEvaluator u0_eval_;
};

// sqrt( sum (A-B)^2 / sum B^2 ) over shared nodes.
inline double relative_l2(const FieldGrid& a, const FieldGrid& b) {
    if (a.n != b.n || a.values.size() != b.values.size())
        throw std::invalid_argument("relative_l2: grid layout mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        const double d = a.values[k] - b.values[k];
        num += d * d;
        den += b.values[k] * b.values[k];
    }
    if (den == 0.0) throw std::invalid_argument("relative_l2: zero reference norm");
    return std::sqrt(num / den);
}

// net sampled at the cell centers of a reference grid
inline FieldGrid net_on_grid(const HardConstrainedNet& net, const FieldGrid& ref) {
    FieldGrid out(ref.rect, ref.n);
    for (int j = 0; j < ref.n; ++j)
        for (int i = 0; i < ref.n; ++i) out(i, j) = forward(net, ref.node(i, j));
    return out;
}

namespace detail {

// relative L2 where possible; falls back to the RMS difference when the
// reference vanishes identically (homogeneous materials have zero correctors)
inline double relative_or_rms(const FieldGrid& a, const FieldGrid& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        const double d = a.values[k] - b.values[k];
        num += d * d;
        den += b.values[k] * b.values[k];
    }
    if (den == 0.0) return std::sqrt(num / static_cast<double>(a.values.size()));
    return std::sqrt(num / den);
}

}  // namespace detail

struct ErrorReport {
    double error1 = 0.0;  // u_drm vs u_dns        (|| . || / ||u_dns||)
    double error2 = 0.0;  // u_drm vs u_homs       (|| . || / ||u_homs||)
    double error3 = 0.0;  // u_homs vs u_dns       (|| . || / ||u_dns||)
    std::map<std::string, double> cell_errors;  // per cell function, vs oracle grids
    double macro_error = 0.0;                   // u0 net vs oracle u0 grid
    double tensor_rel_error = 0.0;              // drm tensor vs oracle tensor

    bool all_finite() const {
        if (!std::isfinite(error1) || !std::isfinite(error2) || !std::isfinite(error3) ||
            !std::isfinite(macro_error) || !std::isfinite(tensor_rel_error))
            return false;
        for (const auto& [_, v] : cell_errors)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// Errors are evaluated at the DNS grid's own cell centers: the mesh-free
// fields are sampled exactly there, so no restriction of the fine-grid
// reference is needed.
inline ErrorReport error_suite(const MultiscaleSolution& drm, const HomsReference& homs,
                               const FieldGrid& dns, const HomogenizedTensor& drm_tensor) {
    ErrorReport rep;
    MultiscaleField field(drm);
    FieldGrid u_drm = field.on_grid(dns);
    FieldGrid u_homs(dns.rect, dns.n);
    for (int j = 0; j < dns.n; ++j)
        for (int i = 0; i < dns.n; ++i) u_homs(i, j) = homs.evaluate(dns.node(i, j));
    rep.error1 = relative_l2(u_drm, dns);
    rep.error2 = relative_l2(u_drm, u_homs);
    rep.error3 = relative_l2(u_homs, dns);

    const char* names[6] = {"N1", "N2", "N11", "N12", "N21", "N22"};
    const HardConstrainedNet* nets[6] = {&drm.cell_lower[0], &drm.cell_lower[1],
                                         &drm.higher(1, 1), &drm.higher(1, 2),
                                         &drm.higher(2, 1), &drm.higher(2, 2)};
    const FieldGrid* grids[6] = {&homs.cell_grid(1), &homs.cell_grid(2), &homs.cell_grid(1, 1),
                                 &homs.cell_grid(1, 2), &homs.cell_grid(2, 1),
                                 &homs.cell_grid(2, 2)};
    for (int k = 0; k < 6; ++k)
        rep.cell_errors[names[k]] =
            detail::relative_or_rms(net_on_grid(*nets[k], *grids[k]), *grids[k]);
    rep.macro_error = relative_l2(net_on_grid(drm.u0, homs.u0()), homs.u0());
    rep.tensor_rel_error = drm_tensor.relative_error_to(homs.tensor());
    return rep;
}

}  // namespace ritzhom
