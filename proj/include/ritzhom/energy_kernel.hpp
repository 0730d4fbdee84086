#pragma once

#include <cassert>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "ritzhom/common.hpp"
#include "ritzhom/network.hpp"

// Fused per-point kernel for energy functionals of the form
//     l(theta; y) = 1/2 g^T A g + c . g + s * v,
// where v is the (optionally hard-constrained) net output at y and g its
// input gradient. One forward pass carries the value plus both coordinate
// tangents; the parameter gradient needs
//     dl/dtheta = p dF/dtheta + q d(w . grad F)/dtheta,
// with w = A g + c, q = m(y), p = w . grad m + s m, which a single adjoint
// sweep over the stored tangents delivers. This is the trainer's hot path;
// it must agree with the autodiff route (tested to ~1e-12) but runs ~50x
// faster, which is what makes the 30,000-epoch schedules tractable on CPU.

namespace ritzhom {

struct EnergyTerm {
    Vec2 y;
    Mat2 A;
    Vec2 c;
    double s = 0.0;
};

class EnergyKernel {
  public:
    EnergyKernel(const NetArch& arch, std::optional<Rect> hard_domain)
        : arch_(arch), layout_(arch), hard_(hard_domain) {
        const auto w = static_cast<std::size_t>(arch.width);
        const std::size_t n_sigma = 2 + 2 * static_cast<std::size_t>(arch.blocks);
        layers_.resize(n_sigma);
        for (auto& l : layers_) {
            l.z_in.resize(w);
            l.t1_in.resize(w);
            l.t2_in.resize(w);
            l.u1.resize(w);
            l.u2.resize(w);
            l.d.resize(w);
            l.dd.resize(w);
        }
        head_in_.resize(w);
        head_t1_.resize(w);
        head_t2_.resize(w);
        z_.resize(w);
        t1_.resize(w);
        t2_.resize(w);
        zbar_.resize(w);
        tbar_.resize(w);
        ubar_.resize(w);
        udotbar_.resize(w);
        zbar_next_.resize(w);
        tbar_next_.resize(w);
        skip_zbar_.resize(w);
        skip_tbar_.resize(w);
    }

    // Net value and input gradient (hard-constraint multiplier applied).
    ValueGrad value_grad(std::span<const double> params, Vec2 y) {
        run_forward(params, y);
        return wrap_constraint(y);
    }

    // Pointwise energy; d(energy)/d(params) is accumulated into grad_accum.
    double energy_with_param_grad(std::span<const double> params, const EnergyTerm& t,
                                  std::span<double> grad_accum) {
        run_forward(params, t.y);
        const auto [m, gm] = constraint(t.y);
        const double v = m * F_;
        const Vec2 g{F_ * gm[0] + m * gF_[0], F_ * gm[1] + m * gF_[1]};
        const Vec2 w = t.A * g + t.c;
        const double energy = 0.5 * dot(g, t.A * g) + dot(t.c, g) + t.s * v;
        const double p = dot(w, gm) + t.s * m;
        run_backward(params, p, m, w, grad_accum);
        return energy;
    }

    // weight * v^2 (soft boundary penalty) with parameter gradient.
    double square_with_param_grad(std::span<const double> params, Vec2 y, double weight,
                                  std::span<double> grad_accum) {
        run_forward(params, y);
        const auto [m, gm] = constraint(y);
        const double v = m * F_;
        // d(weight v^2)/dtheta = 2 weight v m dF/dtheta
        run_backward(params, 2.0 * weight * v * m, 0.0, Vec2{0.0, 0.0}, grad_accum);
        return weight * v * v;
    }

  private:
    struct LayerCache {
        std::vector<double> z_in, t1_in, t2_in;  // layer input and its tangents
        std::vector<double> u1, u2;              // pre-activation tangents
        std::vector<double> d, dd;               // act' , act'' at pre-activation
    };

    std::pair<double, Vec2> constraint(Vec2 y) const {
        if (!hard_) return {1.0, Vec2{0.0, 0.0}};
        const Rect& r = *hard_;
        const double m1 = (y[0] - r.lo[0]) * (r.hi[0] - y[0]);
        const double m2 = (y[1] - r.lo[1]) * (r.hi[1] - y[1]);
        return {m1 * m2,
                Vec2{(r.lo[0] + r.hi[0] - 2.0 * y[0]) * m2, (r.lo[1] + r.hi[1] - 2.0 * y[1]) * m1}};
    }

    ValueGrad wrap_constraint(Vec2 y) const {
        const auto [m, gm] = constraint(y);
        return {m * F_, {F_ * gm[0] + m * gF_[0], F_ * gm[1] + m * gF_[1]}};
    }

    // forward with value + two coordinate tangents; caches per-layer state
    void run_forward(std::span<const double> params, Vec2 y) {
        const int w = arch_.width;
        const Activation act = arch_.activation;
        const double* p = params.data();
        std::size_t li = 0;

        {  // entry layer: input dim 2, tangents are the unit directions
            LayerCache& L = layers_[li++];
            L.z_in.assign({y[0], y[1]});
            L.t1_in.assign({1.0, 0.0});
            L.t2_in.assign({0.0, 1.0});
            const double* We = p + layout_.entry_W();
            const double* be = p + layout_.entry_b();
            for (int i = 0; i < w; ++i) {
                const double u = We[2 * i] * y[0] + We[2 * i + 1] * y[1] + be[i];
                L.u1[i] = We[2 * i];
                L.u2[i] = We[2 * i + 1];
                const double a = act_value(act, u);
                L.d[i] = act_deriv(act, u, a);
                L.dd[i] = act_deriv2(act, u, a);
                z_[i] = a;
                t1_[i] = L.d[i] * L.u1[i];
                t2_[i] = L.d[i] * L.u2[i];
            }
        }

        auto fc = [&](std::size_t base, LayerCache& L) {
            const double* W = p + base;
            const double* b = W + static_cast<std::ptrdiff_t>(w) * w;
            L.z_in.swap(z_);
            L.t1_in.swap(t1_);
            L.t2_in.swap(t2_);
            for (int i = 0; i < w; ++i) {
                const double* row = W + static_cast<std::ptrdiff_t>(i) * w;
                double u = b[i], u1 = 0.0, u2 = 0.0;
                for (int j = 0; j < w; ++j) {
                    u += row[j] * L.z_in[j];
                    u1 += row[j] * L.t1_in[j];
                    u2 += row[j] * L.t2_in[j];
                }
                L.u1[i] = u1;
                L.u2[i] = u2;
                const double a = act_value(act, u);
                L.d[i] = act_deriv(act, u, a);
                L.dd[i] = act_deriv2(act, u, a);
                z_[i] = a;
                t1_[i] = L.d[i] * u1;
                t2_[i] = L.d[i] * u2;
            }
        };

        for (int k = 0; k < arch_.blocks; ++k) {
            fc(layout_.block(k, 0), layers_[li++]);
            LayerCache& outer = layers_[li++];
            fc(layout_.block(k, 1), outer);
            // residual skip: block input is the inner layer's cached input
            const LayerCache& in = layers_[li - 2];
            for (int i = 0; i < w; ++i) {
                z_[i] += in.z_in[i];
                t1_[i] += in.t1_in[i];
                t2_[i] += in.t2_in[i];
            }
        }
        fc(layout_.exit_W(), layers_[li++]);
        head_in_ = z_;
        head_t1_ = t1_;
        head_t2_ = t2_;

        const double* wh = p + layout_.head_w();
        F_ = wh[w];
        double f1 = 0.0, f2 = 0.0;
        for (int i = 0; i < w; ++i) {
            F_ += wh[i] * head_in_[i];
            f1 += wh[i] * head_t1_[i];
            f2 += wh[i] * head_t2_[i];
        }
        gF_ = {f1, f2};
    }

    // adjoint sweep for p*F + q*(w . grad F); accumulates into grad
    void run_backward(std::span<const double> params, double p, double q, Vec2 wdir,
                      std::span<double> grad) {
        const int w = arch_.width;
        const double* pp = params.data();
        const double w1 = wdir[0], w2 = wdir[1];

        {  // head
            const double* wh = pp + layout_.head_w();
            double* gh = grad.data() + layout_.head_w();
            for (int i = 0; i < w; ++i) {
                const double tw = w1 * head_t1_[i] + w2 * head_t2_[i];
                gh[i] += p * head_in_[i] + q * tw;
                zbar_[i] = p * wh[i];
                tbar_[i] = q * wh[i];
            }
            gh[w] += p;
        }

        std::size_t li = layers_.size();

        // one fully connected sigma-layer; consumes (zbar_, tbar_) for its
        // output, produces (zbar_next_, tbar_next_) for its input
        auto fc_back = [&](std::size_t base, const LayerCache& L, std::size_t in_dim) {
            const double* W = pp + base;
            double* gW = grad.data() + base;
            double* gb = gW + static_cast<std::ptrdiff_t>(w) * in_dim;
            for (int i = 0; i < w; ++i) {
                const double uw = w1 * L.u1[i] + w2 * L.u2[i];
                ubar_[i] = L.d[i] * zbar_[i] + L.dd[i] * uw * tbar_[i];
                udotbar_[i] = L.d[i] * tbar_[i];
                gb[i] += ubar_[i];
            }
            for (std::size_t j = 0; j < in_dim; ++j) {
                zbar_next_[j] = 0.0;
                tbar_next_[j] = 0.0;
            }
            for (int i = 0; i < w; ++i) {
                const double ub = ubar_[i];
                const double udb = udotbar_[i];
                const double* row = W + static_cast<std::ptrdiff_t>(i) * in_dim;
                double* grow = gW + static_cast<std::ptrdiff_t>(i) * in_dim;
                for (std::size_t j = 0; j < in_dim; ++j) {
                    const double twj = w1 * L.t1_in[j] + w2 * L.t2_in[j];
                    grow[j] += ub * L.z_in[j] + udb * twj;
                    zbar_next_[j] += row[j] * ub;
                    tbar_next_[j] += row[j] * udb;
                }
            }
        };

        // exit layer
        fc_back(layout_.exit_W(), layers_[--li], static_cast<std::size_t>(w));
        zbar_.swap(zbar_next_);
        tbar_.swap(tbar_next_);

        for (int k = arch_.blocks - 1; k >= 0; --k) {
            // skip path: block output adjoint flows directly to block input
            for (int i = 0; i < w; ++i) {
                skip_zbar_[i] = zbar_[i];
                skip_tbar_[i] = tbar_[i];
            }
            fc_back(layout_.block(k, 1), layers_[--li], static_cast<std::size_t>(w));
            zbar_.swap(zbar_next_);
            tbar_.swap(tbar_next_);
            fc_back(layout_.block(k, 0), layers_[--li], static_cast<std::size_t>(w));
            for (int i = 0; i < w; ++i) {
                zbar_[i] = zbar_next_[i] + skip_zbar_[i];
                tbar_[i] = tbar_next_[i] + skip_tbar_[i];
            }
        }

        // entry layer: input is y (constant w.r.t. theta), tangent of the
        // w-direction channel at the input is wdir itself
        {
            const LayerCache& L = layers_[0];
            double* gW = grad.data() + layout_.entry_W();
            double* gb = grad.data() + layout_.entry_b();
            for (int i = 0; i < w; ++i) {
                const double uw = w1 * L.u1[i] + w2 * L.u2[i];
                const double ub = L.d[i] * zbar_[i] + L.dd[i] * uw * tbar_[i];
                const double udb = L.d[i] * tbar_[i];
                gb[i] += ub;
                gW[2 * i] += ub * L.z_in[0] + udb * w1;
                gW[2 * i + 1] += ub * L.z_in[1] + udb * w2;
            }
        }
    }

    NetArch arch_;
    detail::ParamLayout layout_;
    std::optional<Rect> hard_;

    std::vector<LayerCache> layers_;
    std::vector<double> head_in_, head_t1_, head_t2_;
    double F_ = 0.0;
    Vec2 gF_;

    // scratch (sized to width on construction)
    std::vector<double> z_, t1_, t2_;
    std::vector<double> zbar_, tbar_, ubar_, udotbar_, zbar_next_, tbar_next_;
    std::vector<double> skip_zbar_, skip_tbar_;
};

}  // namespace ritzhom
