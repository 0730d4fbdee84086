#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Scalar reverse-mode automatic differentiation on an explicit graph.
//
// Two reverse sweeps are provided:
//   * Graph::backward     — numeric adjoint accumulation (fast, one pass);
//   * Graph::derive       — emits the adjoint computation as new graph
//                           nodes, so the gradient is itself differentiable.
// Second derivatives are obtained by running backward() on a node produced
// by derive() (differentiate-through-gradient).

namespace ritzhom::ad {

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
    kLeaf,
    kConst,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kNeg,
    kExp,
    kTanh,
    kPowc,   // x^c, real constant exponent in aux
    kMax,    // ties route the adjoint to the second argument
    kSelect  // cond > 0 ? t : f; no adjoint into cond
};

inline const char* op_name(Op op) {
    switch (op) {
        case Op::kLeaf: return "leaf";
        case Op::kConst: return "const";
        case Op::kAdd: return "add";
        case Op::kSub: return "sub";
        case Op::kMul: return "mul";
        case Op::kDiv: return "div";
        case Op::kNeg: return "neg";
        case Op::kExp: return "exp";
        case Op::kTanh: return "tanh";
        case Op::kPowc: return "pow";
        case Op::kMax: return "max";
        case Op::kSelect: return "select";
    }
    return "?";
}

class EvalError : public std::runtime_error {
  public:
    EvalError(NodeId node, Op op, double value)
        : std::runtime_error("non-finite value at node " + std::to_string(node) + " (" +
                             op_name(op) + "): " + std::to_string(value)),
          node(node) {}
    NodeId node;
};

struct Node {
    Op op;
    NodeId a = -1;
    NodeId b = -1;
    NodeId c = -1;      // kSelect false-branch
    double aux = 0.0;   // kPowc exponent
};

class Graph {
  public:
    NodeId leaf(double v) {
        NodeId id = push_meta({Op::kLeaf});
        values_.push_back(v);
        leaves_.push_back(id);
        check_finite(id);
        return id;
    }

    NodeId constant(double v) {
        NodeId id = push_meta({Op::kConst});
        values_.push_back(v);
        check_finite(id);
        return id;
    }

    NodeId add(NodeId a, NodeId b) { return push(Op::kAdd, a, b); }
    NodeId sub(NodeId a, NodeId b) { return push(Op::kSub, a, b); }
    NodeId mul(NodeId a, NodeId b) { return push(Op::kMul, a, b); }
    NodeId div(NodeId a, NodeId b) { return push(Op::kDiv, a, b); }
    NodeId neg(NodeId a) { return push(Op::kNeg, a); }
    NodeId exp(NodeId a) { return push(Op::kExp, a); }
    NodeId tanh(NodeId a) { return push(Op::kTanh, a); }
    NodeId pow(NodeId a, double c) { return push(Op::kPowc, a, -1, -1, c); }
    NodeId max(NodeId a, NodeId b) { return push(Op::kMax, a, b); }
    NodeId select(NodeId cond, NodeId t, NodeId f) { return push(Op::kSelect, cond, t, f); }

    std::size_t size() const { return nodes_.size(); }
    double value(NodeId id) const { return values_[static_cast<std::size_t>(id)]; }
    const std::vector<NodeId>& leaves() const { return leaves_; }

    void set_leaf(NodeId id, double v) {
        if (nodes_[static_cast<std::size_t>(id)].op != Op::kLeaf)
            throw std::logic_error("set_leaf on non-leaf node");
        values_[static_cast<std::size_t>(id)] = v;
    }

    // Re-evaluates every node in topological (=index) order. Identical leaf
    // values reproduce bit-identical node values.
    void refresh() {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& n = nodes_[i];
            if (n.op == Op::kLeaf || n.op == Op::kConst) continue;
            values_[i] = eval(n);
            if (!std::isfinite(values_[i]))
                throw EvalError(static_cast<NodeId>(i), n.op, values_[i]);
        }
    }

    // Numeric reverse sweep from `out`; adjoints readable via adjoint().
    void backward(NodeId out) {
        adjoint_.assign(nodes_.size(), 0.0);
        adjoint_[static_cast<std::size_t>(out)] = 1.0;
        for (NodeId i = out; i >= 0; --i) {
            const double zb = adjoint_[static_cast<std::size_t>(i)];
            if (zb == 0.0) continue;
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            switch (n.op) {
                case Op::kLeaf:
                case Op::kConst: break;
                case Op::kAdd:
                    adjoint_[n.a] += zb;
                    adjoint_[n.b] += zb;
                    break;
                case Op::kSub:
                    adjoint_[n.a] += zb;
                    adjoint_[n.b] -= zb;
                    break;
                case Op::kMul:
                    adjoint_[n.a] += zb * values_[n.b];
                    adjoint_[n.b] += zb * values_[n.a];
                    break;
                case Op::kDiv:
                    adjoint_[n.a] += zb / values_[n.b];
                    adjoint_[n.b] -= zb * values_[static_cast<std::size_t>(i)] / values_[n.b];
                    break;
                case Op::kNeg: adjoint_[n.a] -= zb; break;
                case Op::kExp: adjoint_[n.a] += zb * values_[static_cast<std::size_t>(i)]; break;
                case Op::kTanh: {
                    const double t = values_[static_cast<std::size_t>(i)];
                    adjoint_[n.a] += zb * (1.0 - t * t);
                    break;
                }
                case Op::kPowc:
                    adjoint_[n.a] += zb * (n.aux * std::pow(values_[n.a], n.aux - 1.0));
                    break;
                case Op::kMax:
                    if (values_[n.a] > values_[n.b])
                        adjoint_[n.a] += zb;
                    else
                        adjoint_[n.b] += zb;
                    break;
                case Op::kSelect:
                    if (values_[n.a] > 0.0)
                        adjoint_[n.b] += zb;
                    else
                        adjoint_[n.c] += zb;
                    break;
            }
        }
    }

    double adjoint(NodeId id) const { return adjoint_[static_cast<std::size_t>(id)]; }

    // Symbolic reverse sweep: appends nodes computing d(out)/d(wrt[k]) and
    // returns their ids. The emitted subgraph uses only differentiable ops,
    // so backward() on a returned node yields second derivatives.
    std::vector<NodeId> derive(NodeId out, std::span<const NodeId> wrt) {
        std::vector<NodeId> adj(static_cast<std::size_t>(out) + 1, NodeId{-1});
        adj[static_cast<std::size_t>(out)] = constant(1.0);
        NodeId zero = -1;  // created lazily
        auto zero_node = [&]() {
            if (zero < 0) zero = constant(0.0);
            return zero;
        };
        auto accumulate = [&](NodeId target, NodeId term) {
            auto t = static_cast<std::size_t>(target);
            adj[t] = adj[t] < 0 ? term : add(adj[t], term);
        };
        for (NodeId i = out; i >= 0; --i) {
            const NodeId zb = adj[static_cast<std::size_t>(i)];
            if (zb < 0) continue;
            const Node n = nodes_[static_cast<std::size_t>(i)];  // copy: nodes_ may grow
            switch (n.op) {
                case Op::kLeaf:
                case Op::kConst: break;
                case Op::kAdd:
                    accumulate(n.a, zb);
                    accumulate(n.b, zb);
                    break;
                case Op::kSub:
                    accumulate(n.a, zb);
                    accumulate(n.b, neg(zb));
                    break;
                case Op::kMul:
                    accumulate(n.a, mul(zb, n.b));
                    accumulate(n.b, mul(zb, n.a));
                    break;
                case Op::kDiv: {
                    const NodeId da = div(zb, n.b);
                    accumulate(n.a, da);
                    accumulate(n.b, neg(mul(da, i)));
                    break;
                }
                case Op::kNeg: accumulate(n.a, neg(zb)); break;
                case Op::kExp: accumulate(n.a, mul(zb, i)); break;
                case Op::kTanh:
                    accumulate(n.a, mul(zb, sub(constant(1.0), mul(i, i))));
                    break;
                case Op::kPowc:
                    accumulate(n.a, mul(zb, mul(constant(n.aux), pow(n.a, n.aux - 1.0))));
                    break;
                case Op::kMax: {
                    const NodeId gate = sub(n.a, n.b);
                    accumulate(n.a, select(gate, zb, zero_node()));
                    accumulate(n.b, select(gate, zero_node(), zb));
                    break;
                }
                case Op::kSelect:
                    accumulate(n.b, select(n.a, zb, zero_node()));
                    accumulate(n.c, select(n.a, zero_node(), zb));
                    break;
            }
        }
        std::vector<NodeId> result(wrt.size());
        for (std::size_t k = 0; k < wrt.size(); ++k) {
            NodeId g = adj[static_cast<std::size_t>(wrt[k])];
            result[k] = g < 0 ? zero_node() : g;
        }
        return result;
    }

  private:
    NodeId push_meta(Node n) {
        nodes_.push_back(n);
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    double eval(const Node& n) const {
        switch (n.op) {
            case Op::kAdd: return values_[n.a] + values_[n.b];
            case Op::kSub: return values_[n.a] - values_[n.b];
            case Op::kMul: return values_[n.a] * values_[n.b];
            case Op::kDiv: return values_[n.a] / values_[n.b];
            case Op::kNeg: return -values_[n.a];
            case Op::kExp: return std::exp(values_[n.a]);
            case Op::kTanh: return std::tanh(values_[n.a]);
            case Op::kPowc: return std::pow(values_[n.a], n.aux);
            case Op::kMax: return values_[n.a] > values_[n.b] ? values_[n.a] : values_[n.b];
            case Op::kSelect: return values_[n.a] > 0.0 ? values_[n.b] : values_[n.c];
            default: return 0.0;
        }
    }

    NodeId push(Op op, NodeId a, NodeId b = -1, NodeId c = -1, double aux = 0.0) {
        NodeId id = push_meta({op, a, b, c, aux});
        values_.push_back(eval(nodes_.back()));
        check_finite(id);
        return id;
    }

    void check_finite(NodeId id) const {
        const double v = values_[static_cast<std::size_t>(id)];
        if (!std::isfinite(v)) throw EvalError(id, nodes_[static_cast<std::size_t>(id)].op, v);
    }

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> adjoint_;
    std::vector<NodeId> leaves_;
};

// Thin value-semantic handle for expression building.
class Expr {
  public:
    Expr() = default;
    Expr(Graph& g, NodeId id) : g_(&g), id_(id) {}

    NodeId id() const { return id_; }
    Graph& graph() const { return *g_; }
    double value() const { return g_->value(id_); }

    friend Expr operator+(Expr a, Expr b) { return {*a.g_, a.g_->add(a.id_, b.id_)}; }
    friend Expr operator-(Expr a, Expr b) { return {*a.g_, a.g_->sub(a.id_, b.id_)}; }
    friend Expr operator*(Expr a, Expr b) { return {*a.g_, a.g_->mul(a.id_, b.id_)}; }
    friend Expr operator/(Expr a, Expr b) { return {*a.g_, a.g_->div(a.id_, b.id_)}; }
    friend Expr operator-(Expr a) { return {*a.g_, a.g_->neg(a.id_)}; }

    friend Expr operator+(Expr a, double s) { return a + a.wrap(s); }
    friend Expr operator+(double s, Expr a) { return a.wrap(s) + a; }
    friend Expr operator-(Expr a, double s) { return a - a.wrap(s); }
    friend Expr operator-(double s, Expr a) { return a.wrap(s) - a; }
    friend Expr operator*(Expr a, double s) { return a * a.wrap(s); }
    friend Expr operator*(double s, Expr a) { return a.wrap(s) * a; }
    friend Expr operator/(Expr a, double s) { return a / a.wrap(s); }
    friend Expr operator/(double s, Expr a) { return a.wrap(s) / a; }

    friend Expr exp(Expr a) { return {*a.g_, a.g_->exp(a.id_)}; }
    friend Expr tanh(Expr a) { return {*a.g_, a.g_->tanh(a.id_)}; }
    friend Expr pow(Expr a, double c) { return {*a.g_, a.g_->pow(a.id_, c)}; }
    friend Expr max(Expr a, Expr b) { return {*a.g_, a.g_->max(a.id_, b.id_)}; }
    friend Expr max(Expr a, double s) { return max(a, a.wrap(s)); }
    friend Expr select(Expr cond, Expr t, Expr f) {
        return {*cond.g_, cond.g_->select(cond.id_, t.id_, f.id_)};
    }

  private:
    Expr wrap(double s) const { return {*g_, g_->constant(s)}; }

    Graph* g_ = nullptr;
    NodeId id_ = -1;
};

// Differentiable gradient of `out` with respect to `wrt` (emits graph nodes).
inline std::vector<Expr> gradient(Expr out, std::span<const Expr> wrt) {
    Graph& g = out.graph();
    std::vector<NodeId> ids;
    ids.reserve(wrt.size());
    for (const Expr& e : wrt) ids.push_back(e.id());
    std::vector<NodeId> gn = g.derive(out.id(), ids);
    std::vector<Expr> result;
    result.reserve(gn.size());
    for (NodeId id : gn) result.emplace_back(g, id);
    return result;
}

struct GradResult {
    double value = 0.0;
    std::vector<double> gradient;
};

// f : span<const Expr> -> Expr over a fresh graph; returns f(x) and grad f(x).
template <class F>
GradResult grad(F&& f, std::span<const double> x) {
    Graph g;
    std::vector<Expr> vars;
    vars.reserve(x.size());
    for (double v : x) vars.emplace_back(g, g.leaf(v));
    Expr out = f(std::span<const Expr>(vars));
    g.backward(out.id());
    GradResult r;
    r.value = out.value();
    r.gradient.reserve(x.size());
    for (const Expr& v : vars) r.gradient.push_back(g.adjoint(v.id()));
    return r;
}

// One Hessian row: grad of (grad f . direction). The first-order sweep is
// emitted as graph nodes, then swept numerically.
template <class F>
std::vector<double> grad_of_grad(F&& f, std::span<const double> x,
                                 std::span<const double> direction) {
    Graph g;
    std::vector<Expr> vars;
    vars.reserve(x.size());
    for (double v : x) vars.emplace_back(g, g.leaf(v));
    Expr out = f(std::span<const Expr>(vars));
    std::vector<Expr> gn = gradient(out, vars);
    Expr h = gn[0] * direction[0];
    for (std::size_t i = 1; i < gn.size(); ++i) h = h + gn[i] * direction[i];
    g.backward(h.id());
    std::vector<double> row;
    row.reserve(x.size());
    for (const Expr& v : vars) row.push_back(g.adjoint(v.id()));
    return row;
}

// Gradient of a loss with respect to parameter leaves. The loss builder may
// call gradient() to embed input-derivative subgraphs; those stay
// differentiable, so one numeric sweep yields d(loss)/d(theta).
template <class F>
std::vector<double> param_grad(F&& loss_fn, std::span<const double> theta) {
    Graph g;
    std::vector<Expr> vars;
    vars.reserve(theta.size());
    for (double v : theta) vars.emplace_back(g, g.leaf(v));
    Expr loss = loss_fn(g, std::span<const Expr>(vars));
    g.backward(loss.id());
    std::vector<double> result;
    result.reserve(theta.size());
    for (const Expr& v : vars) result.push_back(g.adjoint(v.id()));
    return result;
}

}  // namespace ritzhom::ad
