#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ritzhom/autodiff.hpp"
#include "ritzhom/common.hpp"
#include "ritzhom/rng.hpp"

// Residual multilayer perceptron: entry layer (2 -> w), B residual blocks of
// two width-w layers each (z_out = z_in + act(W2 act(W1 z_in + b1) + b2)),
// activated exit layer (w -> w), linear head (w -> 1). An optional
// hard-constraint wrapper multiplies the output by
// m(y) = prod_d (y_d - lo_d)(hi_d - y_d), which vanishes on the rectangle
// boundary exactly.

namespace ritzhom {

enum class Activation { kTanh, kRelu, kSigmoid, kRelu3, kSRelu };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::kTanh: return "tanh";
        case Activation::kRelu: return "relu";
        case Activation::kSigmoid: return "sigmoid";
        case Activation::kRelu3: return "relu3";
        case Activation::kSRelu: return "srelu";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::kTanh;
    if (s == "relu") return Activation::kRelu;
    if (s == "sigmoid") return Activation::kSigmoid;
    if (s == "relu3") return Activation::kRelu3;
    if (s == "srelu") return Activation::kSRelu;
    throw std::invalid_argument("unknown activation: " + s);
}

// value / first / second derivative of the activation at z.
// Non-smooth kinks use the zero subgradient (relu'(0) = 0).
inline double act_value(Activation a, double z) {
    switch (a) {
        case Activation::kTanh: return std::tanh(z);
        case Activation::kRelu: return z > 0.0 ? z : 0.0;
        case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::kRelu3: return z > 0.0 ? z * z * z : 0.0;
        case Activation::kSRelu: return (z > 0.0 && z < 1.0) ? z * (1.0 - z) : 0.0;
    }
    return 0.0;
}

inline double act_deriv(Activation a, double z, double v) {
    switch (a) {
        case Activation::kTanh: return 1.0 - v * v;
        case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::kSigmoid: return v * (1.0 - v);
        case Activation::kRelu3: return z > 0.0 ? 3.0 * z * z : 0.0;
        case Activation::kSRelu: return (z > 0.0 && z < 1.0) ? 1.0 - 2.0 * z : 0.0;
    }
    return 0.0;
}

inline double act_deriv2(Activation a, double z, double v) {
    switch (a) {
        case Activation::kTanh: return -2.0 * v * (1.0 - v * v);
        case Activation::kRelu: return 0.0;
        case Activation::kSigmoid: return v * (1.0 - v) * (1.0 - 2.0 * v);
        case Activation::kRelu3: return z > 0.0 ? 6.0 * z : 0.0;
        case Activation::kSRelu: return (z > 0.0 && z < 1.0) ? -2.0 : 0.0;
    }
    return 0.0;
}

constexpr int kInputDim = 2;

struct NetArch {
    int width = 10;
    int blocks = 4;
    Activation activation = Activation::kTanh;

    bool operator==(const NetArch&) const = default;
};

// Flat parameter layout (row-major weight matrices):
//   entry W (w x 2), entry b (w),
//   per block: W1 (w x w), b1 (w), W2 (w x w), b2 (w),
//   exit W (w x w), exit b (w),
//   head w (1 x w), head b (1).
inline std::size_t param_count(const NetArch& arch) {
    const std::size_t w = static_cast<std::size_t>(arch.width);
    const std::size_t B = static_cast<std::size_t>(arch.blocks);
    return (kInputDim * w + w) + B * 2 * (w * w + w) + (w * w + w) + (w + 1);
}

struct ResidualNet {
    NetArch arch;
    std::vector<double> params;
};

struct HardConstrainedNet {
    ResidualNet base;
    Rect domain;

    double multiplier(Vec2 y) const {
        return (y[0] - domain.lo[0]) * (domain.hi[0] - y[0]) * (y[1] - domain.lo[1]) *
               (domain.hi[1] - y[1]);
    }
    Vec2 multiplier_grad(Vec2 y) const {
        const double m1 = (y[0] - domain.lo[0]) * (domain.hi[0] - y[0]);
        const double m2 = (y[1] - domain.lo[1]) * (domain.hi[1] - y[1]);
        return {(domain.lo[0] + domain.hi[0] - 2.0 * y[0]) * m2,
                (domain.lo[1] + domain.hi[1] - 2.0 * y[1]) * m1};
    }
};

// Glorot-uniform weights, zero biases; weights drawn in layout order so the
// parameter vector is a pure function of (width, blocks, seed).
inline ResidualNet init_params(int width, int blocks, Activation activation,
                               std::uint64_t seed) {
    if (width < 1) throw std::invalid_argument("width must be >= 1");
    if (blocks < 0) throw std::invalid_argument("blocks must be >= 0");
    ResidualNet net{{width, blocks, activation}, {}};
    net.params.assign(param_count(net.arch), 0.0);
    Rng rng(seed);
    std::size_t pos = 0;
    auto fill_layer = [&](int fan_in, int fan_out) {
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < fan_out * fan_in; ++i) net.params[pos++] = rng.uniform(-bound, bound);
        pos += static_cast<std::size_t>(fan_out);  // biases stay zero
    };
    fill_layer(kInputDim, width);
    for (int b = 0; b < blocks; ++b) {
        fill_layer(width, width);
        fill_layer(width, width);
    }
    fill_layer(width, width);
    fill_layer(width, 1);
    return net;
}

namespace detail {

// Offsets into the flat parameter vector.
struct ParamLayout {
    int w, B;
    explicit ParamLayout(const NetArch& a) : w(a.width), B(a.blocks) {}

    std::size_t entry_W() const { return 0; }
    std::size_t entry_b() const { return static_cast<std::size_t>(kInputDim * w); }
    std::size_t block(int k, int layer) const {  // layer 0 -> W1/b1, 1 -> W2/b2
        return static_cast<std::size_t>(3 * w) +
               static_cast<std::size_t>(k) * 2 * layer_size() +
               static_cast<std::size_t>(layer) * layer_size();
    }
    std::size_t exit_W() const { return static_cast<std::size_t>(3 * w) + 2 * B * layer_size(); }
    std::size_t head_w() const { return exit_W() + layer_size(); }
    std::size_t layer_size() const { return static_cast<std::size_t>(w) * w + w; }
};

}  // namespace detail

// Plain forward pass.
inline double forward(const ResidualNet& net, Vec2 y) {
    const int w = net.arch.width;
    const Activation act = net.arch.activation;
    const detail::ParamLayout L(net.arch);
    const double* p = net.params.data();
    std::vector<double> z(static_cast<std::size_t>(w)), tmp(static_cast<std::size_t>(w));

    const double* We = p + L.entry_W();
    const double* be = p + L.entry_b();
    for (int i = 0; i < w; ++i)
        z[i] = act_value(act, We[2 * i] * y[0] + We[2 * i + 1] * y[1] + be[i]);

    auto fc = [&](const double* base, const std::vector<double>& in, std::vector<double>& out) {
        const double* W = base;
        const double* b = base + static_cast<std::ptrdiff_t>(w) * w;
        for (int i = 0; i < w; ++i) {
            double u = b[i];
            const double* row = W + static_cast<std::ptrdiff_t>(i) * w;
            for (int j = 0; j < w; ++j) u += row[j] * in[j];
            out[i] = act_value(act, u);
        }
    };

    std::vector<double> inner(static_cast<std::size_t>(w));
    for (int k = 0; k < net.arch.blocks; ++k) {
        fc(p + L.block(k, 0), z, inner);
        fc(p + L.block(k, 1), inner, tmp);
        for (int i = 0; i < w; ++i) z[i] += tmp[i];
    }
    fc(p + L.exit_W(), z, tmp);

    const double* wh = p + L.head_w();
    double out = wh[w];
    for (int i = 0; i < w; ++i) out += wh[i] * tmp[i];
    return out;
}

inline double forward(const HardConstrainedNet& net, Vec2 y) {
    return net.multiplier(y) * forward(net.base, y);
}

struct ValueGrad {
    double value = 0.0;
    Vec2 grad;
};

struct ValueGradHess {
    double value = 0.0;
    Vec2 grad;
    Mat2 hess;
};

namespace detail {

inline ad::Expr act_expr(Activation a, ad::Expr x) {
    switch (a) {
        case Activation::kTanh: return tanh(x);
        case Activation::kRelu: return max(x, 0.0);
        case Activation::kSigmoid: return 1.0 / (1.0 + exp(-x));
        case Activation::kRelu3: return max(pow(x, 3.0), 0.0);
        case Activation::kSRelu: return max(x, 0.0) * max(1.0 - x, 0.0);
    }
    throw std::logic_error("unreachable");
}

// Records the net as an autodiff expression over (y, params) leaves.
inline ad::Expr build_net_expr(ad::Graph& g, const NetArch& arch,
                               std::span<const ad::Expr> params, ad::Expr y1, ad::Expr y2,
                               const Rect* hard_domain) {
    const int w = arch.width;
    const ParamLayout L(arch);
    std::vector<ad::Expr> z(static_cast<std::size_t>(w)), nxt(static_cast<std::size_t>(w));

    for (int i = 0; i < w; ++i) {
        ad::Expr u = params[L.entry_W() + 2 * i] * y1 + params[L.entry_W() + 2 * i + 1] * y2 +
                     params[L.entry_b() + i];
        z[i] = act_expr(arch.activation, u);
    }
    auto fc = [&](std::size_t base, const std::vector<ad::Expr>& in, std::vector<ad::Expr>& out) {
        const std::size_t bias = base + static_cast<std::size_t>(w) * w;
        for (int i = 0; i < w; ++i) {
            ad::Expr u = params[bias + i];
            for (int j = 0; j < w; ++j)
                u = u + params[base + static_cast<std::size_t>(i) * w + j] * in[j];
            out[i] = act_expr(arch.activation, u);
        }
    };
    std::vector<ad::Expr> inner(static_cast<std::size_t>(w));
    for (int k = 0; k < arch.blocks; ++k) {
        fc(L.block(k, 0), z, inner);
        fc(L.block(k, 1), inner, nxt);
        for (int i = 0; i < w; ++i) z[i] = z[i] + nxt[i];
    }
    fc(L.exit_W(), z, nxt);
    ad::Expr out = params[L.head_w() + w];
    for (int i = 0; i < w; ++i) out = out + params[L.head_w() + i] * nxt[i];

    if (hard_domain) {
        ad::Expr m = (y1 - hard_domain->lo[0]) * (hard_domain->hi[0] - y1) *
                     (y2 - hard_domain->lo[1]) * (hard_domain->hi[1] - y2);
        out = m * out;
    }
    return out;
}

}  // namespace detail

// Reusable autodiff evaluator for one net: the graph is recorded once and
// re-swept per query point. Input gradients come from a numeric reverse
// sweep; the Hessian differentiates through emitted gradient nodes (one
// grad_of_grad sweep per row) and is symmetrized as (H + H^T)/2.
// Not thread-safe; use one evaluator per thread.
class NetEvaluator {
  public:
    explicit NetEvaluator(const ResidualNet& net, const Rect* hard_domain = nullptr)
        : arch_(net.arch) {
        y_[0] = graph_.leaf(0.5);
        y_[1] = graph_.leaf(0.5);
        param_ids_.reserve(net.params.size());
        std::vector<ad::Expr> pe;
        pe.reserve(net.params.size());
        for (double v : net.params) {
            ad::NodeId id = graph_.leaf(v);
            param_ids_.push_back(id);
            pe.emplace_back(graph_, id);
        }
        out_ = detail::build_net_expr(graph_, arch_, pe, {graph_, y_[0]}, {graph_, y_[1]},
                                      hard_domain)
                   .id();
    }

    explicit NetEvaluator(const HardConstrainedNet& net) : NetEvaluator(net.base, &net.domain) {}

    void set_params(std::span<const double> params) {
        for (std::size_t i = 0; i < param_ids_.size(); ++i)
            graph_.set_leaf(param_ids_[i], params[i]);
    }

    double value(Vec2 y) {
        bind(y);
        return graph_.value(out_);
    }

    ValueGrad value_grad(Vec2 y) {
        bind(y);
        graph_.backward(out_);
        return {graph_.value(out_), {graph_.adjoint(y_[0]), graph_.adjoint(y_[1])}};
    }

    ValueGradHess value_grad_hess(Vec2 y) {
        ensure_gradient_nodes();
        bind(y);
        ValueGradHess r;
        r.value = graph_.value(out_);
        r.grad = {graph_.value(grad_nodes_[0]), graph_.value(grad_nodes_[1])};
        double h[2][2];
        for (int row = 0; row < 2; ++row) {
            graph_.backward(grad_nodes_[row]);
            h[row][0] = graph_.adjoint(y_[0]);
            h[row][1] = graph_.adjoint(y_[1]);
        }
        const double off = 0.5 * (h[0][1] + h[1][0]);
        r.hess = {h[0][0], off, off, h[1][1]};
        return r;
    }

    std::size_t graph_size() const { return graph_.size(); }

  private:
    void bind(Vec2 y) {
        graph_.set_leaf(y_[0], y[0]);
        graph_.set_leaf(y_[1], y[1]);
        graph_.refresh();
    }

    void ensure_gradient_nodes() {
        if (grad_nodes_[0] >= 0) return;
        auto gn = graph_.derive(out_, std::span<const ad::NodeId>(y_, 2));
        grad_nodes_[0] = gn[0];
        grad_nodes_[1] = gn[1];
    }

    NetArch arch_;
    ad::Graph graph_;
    ad::NodeId y_[2];
    std::vector<ad::NodeId> param_ids_;
    ad::NodeId out_ = -1;
    ad::NodeId grad_nodes_[2] = {-1, -1};
};

inline ValueGrad forward_with_input_grad(const ResidualNet& net, Vec2 y) {
    return NetEvaluator(net).value_grad(y);
}
inline ValueGrad forward_with_input_grad(const HardConstrainedNet& net, Vec2 y) {
    return NetEvaluator(net).value_grad(y);
}
inline ValueGradHess forward_with_input_hessian(const ResidualNet& net, Vec2 y) {
    return NetEvaluator(net).value_grad_hess(y);
}
inline ValueGradHess forward_with_input_hessian(const HardConstrainedNet& net, Vec2 y) {
    return NetEvaluator(net).value_grad_hess(y);
}

}  // namespace ritzhom
