#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ritzhom/common.hpp"
#include "ritzhom/energy_kernel.hpp"
#include "ritzhom/material.hpp"
#include "ritzhom/network.hpp"
#include "ritzhom/sampling.hpp"

// Monte-Carlo energy functionals for the four problem families. Every
// interior loss is a batch mean of  1/2 g^T A g + c . g + s v  with
// per-point coefficients:
//   lower cell (alpha):        A = a(y),  c = a e_alpha,            s = 0
//   homogenized macro:         A = a0,    c = 0,                    s = -f
//   higher cell (a1, a2):      A = a(y),  c = a_{.a2} N_a1(y),
//                              s = -(a_{a2 j} dN_a1/dy_j + a_{a1 a2}(y) - a0_{a1 a2})
// The boundary penalty (soft mode only) is the mean squared boundary value.

namespace ritzhom {

enum class ConstraintMode { kHardConstraint, kSoftPenalty };

struct LossSpec {
    double lambda_f = 1.0;
    double lambda_b = 100.0;  // ignored entirely in hard-constraint mode
    ConstraintMode mode = ConstraintMode::kHardConstraint;
};

struct HomogenizedTensor {
    Mat2 a;

    bool positive_definite() const { return ritzhom::positive_definite(a); }
    double relative_error_to(const HomogenizedTensor& ref) const {
        Mat2 d = {a(0, 0) - ref.a(0, 0), a(0, 1) - ref.a(0, 1), a(1, 0) - ref.a(1, 0),
                  a(1, 1) - ref.a(1, 1)};
        return frobenius_norm(d) / frobenius_norm(ref.a);
    }
};

namespace detail {

inline EnergyTerm lower_cell_term(const Microstructure& micro, int alpha, Vec2 y) {
    const Mat2 a = conductivity_at(micro, y);
    Vec2 c{a(0, alpha - 1), a(1, alpha - 1)};
    return {y, a, c, 0.0};
}

inline EnergyTerm macro_term(const Mat2& a0, double source, Vec2 x) {
    return {x, a0, {0.0, 0.0}, -source};
}

// frozen lower-order data enters through (value, gradient) at y
inline EnergyTerm higher_cell_term(const Microstructure& micro, int a1, int a2,
                                   const Mat2& a0, Vec2 y, double n_low, Vec2 n_low_grad) {
    const Mat2 a = conductivity_at(micro, y);
    Vec2 c{a(0, a2 - 1) * n_low, a(1, a2 - 1) * n_low};
    const double s = -(a(a2 - 1, 0) * n_low_grad[0] + a(a2 - 1, 1) * n_low_grad[1] +
                       a(a1 - 1, a2 - 1) - a0(a1 - 1, a2 - 1));
    return {y, a, c, s};
}

inline double point_energy(EnergyKernel& kernel, std::span<const double> params,
                           const EnergyTerm& t) {
    const ValueGrad vg = kernel.value_grad(params, t.y);
    return 0.5 * dot(vg.grad, t.A * vg.grad) + dot(t.c, vg.grad) + t.s * vg.value;
}

}  // namespace detail

inline double lower_cell_loss(const HardConstrainedNet& net, int alpha,
                              const Microstructure& micro, std::span<const Vec2> batch) {
    if (batch.empty()) throw std::invalid_argument("lower_cell_loss: empty batch");
    EnergyKernel kernel(net.base.arch, net.domain);
    double sum = 0.0;
    for (const Vec2& y : batch)
        sum += detail::point_energy(kernel, net.base.params, detail::lower_cell_term(micro, alpha, y));
    return sum / static_cast<double>(batch.size());
}

inline double macro_loss(const HardConstrainedNet& net, const HomogenizedTensor& a0,
                         double source, std::span<const Vec2> batch) {
    if (batch.empty()) throw std::invalid_argument("macro_loss: empty batch");
    if (!a0.positive_definite())
        throw std::invalid_argument("macro_loss: homogenized tensor not positive definite");
    EnergyKernel kernel(net.base.arch, net.domain);
    double sum = 0.0;
    for (const Vec2& x : batch)
        sum += detail::point_energy(kernel, net.base.params, detail::macro_term(a0.a, source, x));
    return sum / static_cast<double>(batch.size());
}

// Lower-order net is frozen: its values and gradients are plain data here,
// so no parameter gradient can flow into it.
inline double higher_cell_loss(const HardConstrainedNet& net, int a1, int a2,
                               const HardConstrainedNet& frozen_lower,
                               const HomogenizedTensor& a0, const Microstructure& micro,
                               std::span<const Vec2> batch) {
    if (batch.empty()) throw std::invalid_argument("higher_cell_loss: empty batch");
    EnergyKernel kernel(net.base.arch, net.domain);
    EnergyKernel lower_kernel(frozen_lower.base.arch, frozen_lower.domain);
    double sum = 0.0;
    for (const Vec2& y : batch) {
        const ValueGrad low = lower_kernel.value_grad(frozen_lower.base.params, y);
        sum += detail::point_energy(
            kernel, net.base.params,
            detail::higher_cell_term(micro, a1, a2, a0.a, y, low.value, low.grad));
    }
    return sum / static_cast<double>(batch.size());
}

inline double boundary_loss(const ResidualNet& net, std::span<const Vec2> batch) {
    if (batch.empty()) throw std::invalid_argument("boundary_loss: empty batch");
    double sum = 0.0;
    for (const Vec2& y : batch) {
        const double v = forward(net, y);
        sum += v * v;
    }
    return sum / static_cast<double>(batch.size());
}

inline double boundary_loss(const HardConstrainedNet& net, std::span<const Vec2> batch) {
    if (batch.empty()) throw std::invalid_argument("boundary_loss: empty batch");
    double sum = 0.0;
    for (const Vec2& y : batch) {
        const double v = forward(net, y);
        sum += v * v;
    }
    return sum / static_cast<double>(batch.size());
}

// Eq-style quadrature of the homogenized tensor from the two trained cell
// nets: a0_ij = (1/|Y|) sum w [ a_ij(y) + a_ik(y) dN_j/dy_k ], with the net
// gradients supplied by the autodiff evaluator.
inline HomogenizedTensor homog_coefficient(const HardConstrainedNet& n1,
                                           const HardConstrainedNet& n2,
                                           const Microstructure& micro,
                                           const QuadratureGrid& grid) {
    NetEvaluator ev1(n1);
    NetEvaluator ev2(n2);
    Mat2 a0;
    const double w = grid.weight();
    for (int j = 0; j < grid.n; ++j) {
        for (int i = 0; i < grid.n; ++i) {
            const Vec2 y = grid.node(i, j);
            const Mat2 a = conductivity_at(micro, y);
            const Vec2 g1 = ev1.value_grad(y).grad;
            const Vec2 g2 = ev2.value_grad(y).grad;
            a0(0, 0) += w * (a(0, 0) + a(0, 0) * g1[0] + a(0, 1) * g1[1]);
            a0(1, 0) += w * (a(1, 0) + a(1, 0) * g1[0] + a(1, 1) * g1[1]);
            a0(0, 1) += w * (a(0, 1) + a(0, 0) * g2[0] + a(0, 1) * g2[1]);
            a0(1, 1) += w * (a(1, 1) + a(1, 0) * g2[0] + a(1, 1) * g2[1]);
        }
    }
    return {a0};
}

// ---- trainable objective --------------------------------------------------

// Full-batch objective over per-point energy terms. Deterministic under any
// thread count: points are processed in fixed chunks whose partial sums are
// reduced in chunk order.
class EnergyObjective {
  public:
    using TermBuilder = std::function<EnergyTerm(Vec2)>;

    EnergyObjective(NetArch arch, std::optional<Rect> hard_domain, Rect sample_domain,
                    TermBuilder builder, SamplingPlan plan, LossSpec spec)
        : arch_(arch),
          hard_(hard_domain),
          sample_domain_(sample_domain),
          builder_(std::move(builder)),
          plan_(plan),
          spec_(spec) {
        if (plan_.n_interior < 1) throw std::invalid_argument("n_interior must be >= 1");
        int threads = 1;
#ifdef _OPENMP
        threads = omp_get_max_threads();
#endif
        for (int t = 0; t < threads; ++t) kernels_.emplace_back(arch_, hard_);
        rebuild(plan_.seed);
        if (spec_.mode == ConstraintMode::kSoftPenalty) {
            if (plan_.n_boundary < 1)
                throw std::invalid_argument("soft-penalty mode needs boundary points");
            boundary_pts_ =
                sample_boundary(sample_domain_, plan_.n_boundary, mix_seed(plan_.seed, 0x6bd));
        }
        const std::size_t n = terms_.size();
        n_chunks_ = (n + kChunk - 1) / kChunk;
        loss_partials_.resize(n_chunks_);
        grad_partials_.assign(n_chunks_ * param_count(arch_), 0.0);
    }

    // Resamples the interior batch when the plan asks for it.
    void begin_epoch(long epoch) {
        if (plan_.resample_each_epoch && epoch > 0)
            rebuild(mix_seed(plan_.seed, static_cast<std::uint64_t>(epoch)));
    }

    double value(std::span<const double> params) const {
        return evaluate(params, nullptr);
    }

    double value_and_grad(std::span<const double> params, std::span<double> grad) const {
        return evaluate(params, &grad);
    }

    const std::vector<EnergyTerm>& terms() const { return terms_; }

  private:
    static constexpr std::size_t kChunk = 256;

    void rebuild(std::uint64_t seed) {
        const std::vector<Vec2> pts = sample_interior(sample_domain_, plan_.n_interior, seed);
        terms_.clear();
        terms_.reserve(pts.size());
        for (const Vec2& y : pts) terms_.push_back(builder_(y));
    }

    double evaluate(std::span<const double> params, std::span<double>* grad_out) const {
        const std::size_t n = terms_.size();
        const std::size_t np = param_count(arch_);
        if (grad_out) std::fill(grad_partials_.begin(), grad_partials_.end(), 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(n_chunks_); ++ci) {
            int tid = 0;
#ifdef _OPENMP
            tid = omp_get_thread_num();
#endif
            EnergyKernel& kernel = kernels_[static_cast<std::size_t>(tid)];
            const std::size_t begin = static_cast<std::size_t>(ci) * kChunk;
            const std::size_t end = std::min(begin + kChunk, n);
            double local = 0.0;
            if (grad_out) {
                std::span<double> gchunk(grad_partials_.data() + static_cast<std::size_t>(ci) * np,
                                         np);
                for (std::size_t k = begin; k < end; ++k)
                    local += kernel.energy_with_param_grad(params, terms_[k], gchunk);
            } else {
                for (std::size_t k = begin; k < end; ++k)
                    local += detail::point_energy(kernel, params, terms_[k]);
            }
            loss_partials_[static_cast<std::size_t>(ci)] = local;
        }

        const double inv_n = 1.0 / static_cast<double>(n);
        double loss = spec_.lambda_f * inv_n * ordered_sum(loss_partials_);
        if (grad_out) {
            std::span<double>& g = *grad_out;
            std::fill(g.begin(), g.end(), 0.0);
            for (std::size_t ci = 0; ci < n_chunks_; ++ci) {
                const double* src = grad_partials_.data() + ci * np;
                for (std::size_t p = 0; p < np; ++p) g[p] += src[p];
            }
            const double scale = spec_.lambda_f * inv_n;
            for (std::size_t p = 0; p < np; ++p) g[p] *= scale;
        }

        if (spec_.mode == ConstraintMode::kSoftPenalty && !boundary_pts_.empty()) {
            EnergyKernel& kernel = kernels_[0];
            const double wb = spec_.lambda_b / static_cast<double>(boundary_pts_.size());
            double bsum = 0.0;
            for (const Vec2& y : boundary_pts_) {
                if (grad_out)
                    bsum += kernel.square_with_param_grad(params, y, wb, *grad_out);
                else {
                    const ValueGrad vg = kernel.value_grad(params, y);
                    bsum += wb * vg.value * vg.value;
                }
            }
            loss += bsum;
        }
        return loss;
    }

    NetArch arch_;
    std::optional<Rect> hard_;
    Rect sample_domain_;
    TermBuilder builder_;
    SamplingPlan plan_;
    LossSpec spec_;
    std::vector<EnergyTerm> terms_;
    std::vector<Vec2> boundary_pts_;
    std::size_t n_chunks_ = 0;
    mutable std::vector<EnergyKernel> kernels_;
    mutable std::vector<double> loss_partials_;
    mutable std::vector<double> grad_partials_;
};

// Frozen lower-order data for higher-cell objectives is tabulated with the
// fast kernel (it is the same forward/tangent pass the trainer uses).
inline EnergyObjective::TermBuilder higher_cell_builder(const Microstructure& micro, int a1,
                                                        int a2, const HomogenizedTensor& a0,
                                                        HardConstrainedNet frozen_lower) {
    auto kernel = std::make_shared<EnergyKernel>(frozen_lower.base.arch, frozen_lower.domain);
    auto net = std::make_shared<HardConstrainedNet>(std::move(frozen_lower));
    Mat2 t = a0.a;
    return [micro, a1, a2, t, kernel, net](Vec2 y) {
        const ValueGrad low = kernel->value_grad(net->base.params, y);
        return detail::higher_cell_term(micro, a1, a2, t, y, low.value, low.grad);
    };
}

inline EnergyObjective make_lower_cell_objective(const NetArch& arch, const Rect& cell,
                                                 int alpha, const Microstructure& micro,
                                                 const SamplingPlan& plan, const LossSpec& spec) {
    std::optional<Rect> hard;
    if (spec.mode == ConstraintMode::kHardConstraint) hard = cell;
    return {arch, hard, cell,
            [micro, alpha](Vec2 y) { return detail::lower_cell_term(micro, alpha, y); }, plan,
            spec};
}

inline EnergyObjective make_macro_objective(const NetArch& arch, const Rect& domain,
                                            const HomogenizedTensor& a0, double source,
                                            const SamplingPlan& plan, const LossSpec& spec) {
    if (!a0.positive_definite())
        throw std::invalid_argument("macro objective: tensor not positive definite");
    std::optional<Rect> hard;
    if (spec.mode == ConstraintMode::kHardConstraint) hard = domain;
    const Mat2 t = a0.a;
    return {arch, hard, domain, [t, source](Vec2 x) { return detail::macro_term(t, source, x); },
            plan, spec};
}

inline EnergyObjective make_higher_cell_objective(const NetArch& arch, const Rect& cell, int a1,
                                                  int a2, const HardConstrainedNet& frozen_lower,
                                                  const HomogenizedTensor& a0,
                                                  const Microstructure& micro,
                                                  const SamplingPlan& plan,
                                                  const LossSpec& spec) {
    std::optional<Rect> hard;
    if (spec.mode == ConstraintMode::kHardConstraint) hard = cell;
    return {arch, hard, cell, higher_cell_builder(micro, a1, a2, a0, frozen_lower), plan, spec};
}

}  // namespace ritzhom
