#pragma once

#include <cassert>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

#include "pfnn2/dual.hpp"

namespace pfnn2 {

// Reverse-mode tape whose recorded scalars are truncated-Taylor values
// (see LaneDesc): every node carries a value plus optional input-derivative
// lanes, so losses may freely mix network outputs with their input
// derivatives and one reverse sweep yields exact parameter gradients,
// including mixed d/dparam-of-d/dinput paths.
//
// Usage is record-once / replay-many: leaves (trainable parameters) are
// registered first, the loss graph is recorded once per phase, then each
// optimizer step overwrites leaf values, calls forward(), and reads
// gradients back from reverse().
template <class Real>
class Tape {
  public:
    enum class Op : std::uint8_t {
        Const, Leaf, Add, Sub, Neg, Mul, Recip, Sin, Cos, Tanh, Exp, Log,
        PowInt, Relu, Square, Affine, LinC, SumN, Extract
    };

    struct Expr {
        Tape* tape = nullptr;
        std::int32_t node = -1;
        bool valid() const { return tape != nullptr && node >= 0; }
    };

    explicit Tape(const LaneDesc& d) : desc_(d), L_(d.lanes()) {}

    const LaneDesc& desc() const { return desc_; }
    std::size_t size() const { return nodes_.size(); }
    int leaf_count() const { return n_leaves_; }

    // --- leaves -----------------------------------------------------------

    int add_leaf() {
        if (ops_started_) throw std::logic_error("tape: leaves must be registered before ops");
        const int id = new_node(Op::Leaf, -1, -1, 0);
        ++n_leaves_;
        return id;
    }

    void set_leaf(int leaf, Real v) { val_[static_cast<std::size_t>(leaf) * L_] = v; }

    void set_leaves(std::span<const Real> v) {
        assert(static_cast<int>(v.size()) == n_leaves_);
        for (int i = 0; i < n_leaves_; ++i) set_leaf(i, v[i]);
    }

    Expr leaf_expr(int leaf) { return Expr{this, leaf}; }

    // --- recording --------------------------------------------------------

    Expr constant(Real v) {
        const int id = new_node(Op::Const, -1, -1, 0);
        val_[static_cast<std::size_t>(id) * L_] = v;
        return Expr{this, id};
    }

    Expr constant(const Dual<Real>& d) {
        assert(d.desc == desc_ || d.desc.lanes() == 1);
        const int id = new_node(Op::Const, -1, -1, 0);
        Real* v = value_ptr(id);
        const int n = d.desc.lanes();
        for (int l = 0; l < n && l < L_; ++l) v[l] = d.a[l];
        return Expr{this, id};
    }

    Expr binary(Op op, Expr a, Expr b) {
        check(a); check(b);
        return Expr{this, new_node(op, a.node, b.node, 0)};
    }
    Expr unary(Op op, Expr a, std::int32_t aux = 0) {
        check(a);
        return Expr{this, new_node(op, a.node, -1, aux)};
    }

    // sum_i coef_i * x_i + bias; coefficients and bias must be lane-free
    // nodes (leaves or plain constants). This is the network-layer primitive.
    Expr affine(std::span<const Expr> coefs, std::span<const Expr> xs, Expr bias) {
        assert(coefs.size() == xs.size());
        const auto off = static_cast<std::int32_t>(argpool_.size());
        for (std::size_t i = 0; i < coefs.size(); ++i) {
            check(coefs[i]); check(xs[i]);
            argpool_.push_back(coefs[i].node);
            argpool_.push_back(xs[i].node);
        }
        check(bias);
        const int id = new_node(Op::Affine, off, static_cast<std::int32_t>(coefs.size()),
                                bias.node);
        return Expr{this, id};
    }

    // c0 + sum_i k_i * x_i with plain-real coefficients.
    Expr linear_comb(Real c0, std::span<const Real> ks, std::span<const Expr> xs) {
        assert(ks.size() == xs.size());
        const auto aoff = static_cast<std::int32_t>(argpool_.size());
        for (auto& x : xs) { check(x); argpool_.push_back(x.node); }
        const auto coff = static_cast<std::int32_t>(constpool_.size());
        constpool_.push_back(c0);
        constpool_.insert(constpool_.end(), ks.begin(), ks.end());
        const int id = new_node(Op::LinC, aoff, static_cast<std::int32_t>(ks.size()), coff);
        return Expr{this, id};
    }

    Expr sum(std::span<const Expr> xs) {
        const auto off = static_cast<std::int32_t>(argpool_.size());
        for (auto& x : xs) { check(x); argpool_.push_back(x.node); }
        return Expr{this, new_node(Op::SumN, off, static_cast<std::int32_t>(xs.size()), 0)};
    }

    // Value <- tangent lane `dir` of the argument; first-order lanes of the
    // result are filled from the second-order block when present.
    Expr extract(Expr a, int dir) {
        assert(dir >= 0 && dir < desc_.dirs);
        return unary(Op::Extract, a, dir);
    }

    // --- evaluation -------------------------------------------------------

    // Recompute values of all non-leaf, non-const nodes in record order.
    void forward() {
        const int n = static_cast<int>(nodes_.size());
        for (int i = 0; i < n; ++i) forward_node(i);
    }

    Real value(Expr e) const { return val_[static_cast<std::size_t>(e.node) * L_]; }

    Dual<Real> dual(Expr e) const {
        Dual<Real> d(desc_, 0);
        const Real* v = &val_[static_cast<std::size_t>(e.node) * L_];
        for (int l = 0; l < L_; ++l) d.a[l] = v[l];
        return d;
    }

    // Reverse sweep from `root` (seeded on the value lane); writes
    // d(root.value)/d(leaf) for every registered leaf.
    void reverse(Expr root, std::span<Real> leaf_grad) {
        check(root);
        if (nodes_.empty() || nodes_.size() == static_cast<std::size_t>(n_leaves_))
            throw std::logic_error("tape: reverse on empty tape");
        assert(static_cast<int>(leaf_grad.size()) == n_leaves_);
        adj_.assign(val_.size(), Real(0));
        adj_[static_cast<std::size_t>(root.node) * L_] = Real(1);
        for (int i = static_cast<int>(nodes_.size()) - 1; i >= n_leaves_; --i)
            reverse_node(i);
        for (int i = 0; i < n_leaves_; ++i)
            leaf_grad[i] = adj_[static_cast<std::size_t>(i) * L_];
    }

    std::vector<Real> gradient(Expr root) {
        std::vector<Real> g(static_cast<std::size_t>(n_leaves_));
        reverse(root, g);
        return g;
    }

    // --- structure management ----------------------------------------------

    std::size_t watermark() const { return nodes_.size(); }

    // Drop everything recorded after `mark` (leaves always survive).
    void rewind(std::size_t mark) {
        assert(mark >= static_cast<std::size_t>(n_leaves_));
        if (mark >= nodes_.size()) return;
        const Node& first = nodes_[mark];
        // arg/const pools only ever grow with the node list, so truncating at
        // the first dropped node's offsets is safe.
        std::size_t amark = argpool_.size(), cmark = constpool_.size();
        for (std::size_t i = mark; i < nodes_.size(); ++i) {
            const Node& nd = nodes_[i];
            if (nd.op == Op::Affine || nd.op == Op::LinC || nd.op == Op::SumN)
                amark = std::min(amark, static_cast<std::size_t>(nd.a));
            if (nd.op == Op::LinC)
                cmark = std::min(cmark, static_cast<std::size_t>(nd.c));
        }
        (void)first;
        nodes_.resize(mark);
        val_.resize(mark * L_);
        argpool_.resize(amark);
        constpool_.resize(cmark);
        if (mark == static_cast<std::size_t>(n_leaves_)) ops_started_ = false;
    }

  private:
    struct Node {
        Op op;
        std::int32_t a, b, c;
    };

    LaneDesc desc_;
    int L_;
    int n_leaves_ = 0;
    bool ops_started_ = false;
    std::vector<Node> nodes_;
    std::vector<Real> val_;
    std::vector<Real> adj_;
    std::vector<std::int32_t> argpool_;
    std::vector<Real> constpool_;

    void check(Expr e) const {
        assert(e.tape == this && e.node >= 0 &&
               e.node < static_cast<std::int32_t>(nodes_.size()));
        (void)e;
    }

    int new_node(Op op, std::int32_t a, std::int32_t b, std::int32_t c) {
        if (op != Op::Leaf) ops_started_ = true;
        nodes_.push_back(Node{op, a, b, c});
        val_.resize(val_.size() + static_cast<std::size_t>(L_), Real(0));
        return static_cast<int>(nodes_.size()) - 1;
    }

    Real* value_ptr(int i) { return &val_[static_cast<std::size_t>(i) * L_]; }
    const Real* value_ptr(int i) const { return &val_[static_cast<std::size_t>(i) * L_]; }
    Real* adj_ptr(int i) { return &adj_[static_cast<std::size_t>(i) * L_]; }

    struct D3 { Real f0, f1, f2, f3; };

    // Scalar derivatives up to third order for unary ops; av is the stored
    // argument value, cv the stored result value (reused where convenient).
    D3 derivs(Op op, Real av, Real cv, std::int32_t aux) const {
        switch (op) {
            case Op::Sin: {
                const Real s = cv, c = std::cos(av);
                return {s, c, -s, -c};
            }
            case Op::Cos: {
                const Real c = cv, s = std::sin(av);
                return {c, -s, -c, s};
            }
            case Op::Tanh: {
                const Real th = cv, g = Real(1) - th * th;
                return {th, g, Real(-2) * th * g, g * (Real(6) * th * th - Real(2))};
            }
            case Op::Exp:
                return {cv, cv, cv, cv};
            case Op::Log: {
                const Real r = Real(1) / av;
                return {cv, r, -r * r, Real(2) * r * r * r};
            }
            case Op::Recip: {
                const Real r = cv;
                return {r, -r * r, Real(2) * r * r * r, Real(-6) * r * r * r * r};
            }
            case Op::Square:
                return {av * av, Real(2) * av, Real(2), Real(0)};
            case Op::Relu: {
                const Real g = av > Real(0) ? Real(1) : Real(0);
                return {g * av, g, Real(0), Real(0)};
            }
            case Op::PowInt: {
                const int n = aux;
                auto ip = [](Real b, int e) {
                    Real r = Real(1);
                    for (int i = 0; i < e; ++i) r *= b;
                    return r;
                };
                return {ip(av, n),
                        n >= 1 ? Real(n) * ip(av, n - 1) : Real(0),
                        n >= 2 ? Real(n) * Real(n - 1) * ip(av, n - 2) : Real(0),
                        n >= 3 ? Real(n) * Real(n - 1) * Real(n - 2) * ip(av, n - 3) : Real(0)};
            }
            default:
                assert(false);
                return {0, 0, 0, 0};
        }
    }

    void forward_node(int i) {
        const Node& nd = nodes_[i];
        Real* c = value_ptr(i);
        const int k = desc_.dirs;
        switch (nd.op) {
            case Op::Const:
            case Op::Leaf:
                return;
            case Op::Add:
                lanes::add(desc_, c, value_ptr(nd.a), value_ptr(nd.b));
                return;
            case Op::Sub:
                lanes::sub(desc_, c, value_ptr(nd.a), value_ptr(nd.b));
                return;
            case Op::Neg:
                lanes::neg(desc_, c, value_ptr(nd.a));
                return;
            case Op::Mul:
                lanes::mul(desc_, c, value_ptr(nd.a), value_ptr(nd.b));
                return;
            case Op::Affine: {
                // Accumulate in double: layer sums feed f32 losses otherwise.
                double acc[LaneDesc::kMaxLanes] = {};
                const std::int32_t* args = &argpool_[static_cast<std::size_t>(nd.a)];
                for (std::int32_t m = 0; m < nd.b; ++m) {
                    const Real w = val_[static_cast<std::size_t>(args[2 * m]) * L_];
                    const Real* x = value_ptr(args[2 * m + 1]);
                    for (int l = 0; l < L_; ++l) acc[l] += static_cast<double>(w) * x[l];
                }
                if (nd.c >= 0) acc[0] += val_[static_cast<std::size_t>(nd.c) * L_];
                for (int l = 0; l < L_; ++l) c[l] = static_cast<Real>(acc[l]);
                return;
            }
            case Op::LinC: {
                double acc[LaneDesc::kMaxLanes] = {};
                const std::int32_t* args = &argpool_[static_cast<std::size_t>(nd.a)];
                const Real* ks = &constpool_[static_cast<std::size_t>(nd.c)];
                acc[0] = static_cast<double>(ks[0]);
                for (std::int32_t m = 0; m < nd.b; ++m) {
                    const Real* x = value_ptr(args[m]);
                    for (int l = 0; l < L_; ++l)
                        acc[l] += static_cast<double>(ks[m + 1]) * x[l];
                }
                for (int l = 0; l < L_; ++l) c[l] = static_cast<Real>(acc[l]);
                return;
            }
            case Op::SumN: {
                double acc[LaneDesc::kMaxLanes] = {};
                const std::int32_t* args = &argpool_[static_cast<std::size_t>(nd.a)];
                for (std::int32_t m = 0; m < nd.b; ++m) {
                    const Real* x = value_ptr(args[m]);
                    for (int l = 0; l < L_; ++l) acc[l] += static_cast<double>(x[l]);
                }
                for (int l = 0; l < L_; ++l) c[l] = static_cast<Real>(acc[l]);
                return;
            }
            case Op::Extract: {
                const Real* a = value_ptr(nd.a);
                const int dir = nd.c;
                for (int l = 0; l < L_; ++l) c[l] = Real(0);
                if (desc_.order >= 1) c[0] = a[desc_.t(dir)];
                if (desc_.order >= 2)
                    for (int j = 0; j < k; ++j) c[desc_.t(j)] = a[desc_.hsym(j, dir)];
                return;
            }
            default: {  // unary family
                const Real* a = value_ptr(nd.a);
                const D3 f = derivs(nd.op, a[0], raw_unary_value(nd.op, a[0], nd.c), nd.c);
                lanes::unary(desc_, c, a, f.f0, f.f1, f.f2);
                return;
            }
        }
    }

    static Real raw_unary_value(Op op, Real av, std::int32_t aux) {
        switch (op) {
            case Op::Sin: return std::sin(av);
            case Op::Cos: return std::cos(av);
            case Op::Tanh: return std::tanh(av);
            case Op::Exp: return std::exp(av);
            case Op::Log: return std::log(av);
            case Op::Recip: return Real(1) / av;
            case Op::Square: return av * av;
            case Op::Relu: return av > Real(0) ? av : Real(0);
            case Op::PowInt: {
                Real r = Real(1);
                for (int i = 0; i < aux; ++i) r *= av;
                return r;
            }
            default: return av;
        }
    }

    void reverse_node(int i) {
        const Node& nd = nodes_[i];
        const Real* cb = adj_ptr(i);  // adjoint of this node, all lanes
        const int k = desc_.dirs;
        const int ord = desc_.order;
        switch (nd.op) {
            case Op::Const:
            case Op::Leaf:
                return;
            case Op::Add: {
                Real* aa = adj_ptr(nd.a);
                Real* ba = adj_ptr(nd.b);
                for (int l = 0; l < L_; ++l) { aa[l] += cb[l]; ba[l] += cb[l]; }
                return;
            }
            case Op::Sub: {
                Real* aa = adj_ptr(nd.a);
                Real* ba = adj_ptr(nd.b);
                for (int l = 0; l < L_; ++l) { aa[l] += cb[l]; ba[l] -= cb[l]; }
                return;
            }
            case Op::Neg: {
                Real* aa = adj_ptr(nd.a);
                for (int l = 0; l < L_; ++l) aa[l] -= cb[l];
                return;
            }
            case Op::Mul: {
                const Real* a = value_ptr(nd.a);
                const Real* b = value_ptr(nd.b);
                Real* aa = adj_ptr(nd.a);
                Real* ba = adj_ptr(nd.b);
                aa[0] += cb[0] * b[0];
                ba[0] += cb[0] * a[0];
                if (ord >= 1) {
                    for (int i1 = 0; i1 < k; ++i1) {
                        const int ti = desc_.t(i1);
                        aa[0] += cb[ti] * b[ti];
                        ba[ti] += cb[ti] * a[0];
                        aa[ti] += cb[ti] * b[0];
                        ba[0] += cb[ti] * a[ti];
                    }
                }
                if (ord >= 2) {
                    for (int i1 = 0; i1 < k; ++i1)
                        for (int j1 = i1; j1 < k; ++j1) {
                            const int ij = desc_.h(i1, j1);
                            const int ti = desc_.t(i1), tj = desc_.t(j1);
                            const Real w = cb[ij];
                            aa[0] += w * b[ij];
                            ba[ij] += w * a[0];
                            aa[ij] += w * b[0];
                            ba[0] += w * a[ij];
                            aa[ti] += w * b[tj];
                            ba[tj] += w * a[ti];
                            aa[tj] += w * b[ti];
                            ba[ti] += w * a[tj];
                        }
                }
                return;
            }
            case Op::Affine: {
                const std::int32_t* args = &argpool_[static_cast<std::size_t>(nd.a)];
                for (std::int32_t m = 0; m < nd.b; ++m) {
                    const int wi = args[2 * m], xi = args[2 * m + 1];
                    const Real w = val_[static_cast<std::size_t>(wi) * L_];
                    const Real* x = value_ptr(xi);
                    Real* wa = adj_ptr(wi);
                    Real* xa = adj_ptr(xi);
                    double wacc = 0;
                    for (int l = 0; l < L_; ++l) {
                        wacc += static_cast<double>(cb[l]) * x[l];
                        xa[l] += cb[l] * w;
                    }
                    wa[0] += static_cast<Real>(wacc);
                }
                if (nd.c >= 0) adj_[static_cast<std::size_t>(nd.c) * L_] += cb[0];
                return;
            }
            case Op::LinC: {
                const std::int32_t* args = &argpool_[static_cast<std::size_t>(nd.a)];
                const Real* ks = &constpool_[static_cast<std::size_t>(nd.c)];
                for (std::int32_t m = 0; m < nd.b; ++m) {
                    Real* xa = adj_ptr(args[m]);
                    const Real km = ks[m + 1];
                    for (int l = 0; l < L_; ++l) xa[l] += km * cb[l];
                }
                return;
            }
            case Op::SumN: {
                const std::int32_t* args = &argpool_[static_cast<std::size_t>(nd.a)];
                for (std::int32_t m = 0; m < nd.b; ++m) {
                    Real* xa = adj_ptr(args[m]);
                    for (int l = 0; l < L_; ++l) xa[l] += cb[l];
                }
                return;
            }
            case Op::Extract: {
                Real* aa = adj_ptr(nd.a);
                const int dir = nd.c;
                if (ord >= 1) aa[desc_.t(dir)] += cb[0];
                if (ord >= 2)
                    for (int j = 0; j < k; ++j) aa[desc_.hsym(j, dir)] += cb[desc_.t(j)];
                return;
            }
            default: {  // unary family
                const Real* a = value_ptr(nd.a);
                const Real* cv = value_ptr(i);
                Real* aa = adj_ptr(nd.a);
                const D3 f = derivs(nd.op, a[0], cv[0], nd.c);
                aa[0] += cb[0] * f.f1;
                if (ord >= 1) {
                    for (int i1 = 0; i1 < k; ++i1) {
                        const int ti = desc_.t(i1);
                        aa[ti] += cb[ti] * f.f1;
                        aa[0] += cb[ti] * f.f2 * a[ti];
                    }
                }
                if (ord >= 2) {
                    for (int i1 = 0; i1 < k; ++i1)
                        for (int j1 = i1; j1 < k; ++j1) {
                            const int ij = desc_.h(i1, j1);
                            const int ti = desc_.t(i1), tj = desc_.t(j1);
                            const Real w = cb[ij];
                            aa[ij] += w * f.f1;
                            aa[ti] += w * f.f2 * a[tj];
                            aa[tj] += w * f.f2 * a[ti];
                            aa[0] += w * (f.f2 * a[ij] + f.f3 * a[ti] * a[tj]);
                        }
                }
                return;
            }
        }
    }
};

// Expression helpers so recorded math reads like plain arithmetic.
template <class Real> using TapeExpr = typename Tape<Real>::Expr;

template <class Real>
TapeExpr<Real> operator+(TapeExpr<Real> a, TapeExpr<Real> b) {
    return a.tape->binary(Tape<Real>::Op::Add, a, b);
}
template <class Real>
TapeExpr<Real> operator-(TapeExpr<Real> a, TapeExpr<Real> b) {
    return a.tape->binary(Tape<Real>::Op::Sub, a, b);
}
template <class Real>
TapeExpr<Real> operator*(TapeExpr<Real> a, TapeExpr<Real> b) {
    return a.tape->binary(Tape<Real>::Op::Mul, a, b);
}
template <class Real>
TapeExpr<Real> operator/(TapeExpr<Real> a, TapeExpr<Real> b) {
    return a * a.tape->unary(Tape<Real>::Op::Recip, b);
}
template <class Real>
TapeExpr<Real> operator-(TapeExpr<Real> a) {
    return a.tape->unary(Tape<Real>::Op::Neg, a);
}

template <class Real> TapeExpr<Real> operator+(TapeExpr<Real> a, double s) { return a + a.tape->constant(static_cast<Real>(s)); }
template <class Real> TapeExpr<Real> operator+(double s, TapeExpr<Real> a) { return a + s; }
template <class Real> TapeExpr<Real> operator-(TapeExpr<Real> a, double s) { return a - a.tape->constant(static_cast<Real>(s)); }
template <class Real> TapeExpr<Real> operator-(double s, TapeExpr<Real> a) { return a.tape->constant(static_cast<Real>(s)) - a; }
template <class Real> TapeExpr<Real> operator*(TapeExpr<Real> a, double s) { return a * a.tape->constant(static_cast<Real>(s)); }
template <class Real> TapeExpr<Real> operator*(double s, TapeExpr<Real> a) { return a * s; }

template <class Real> TapeExpr<Real> sin(TapeExpr<Real> a) { return a.tape->unary(Tape<Real>::Op::Sin, a); }
template <class Real> TapeExpr<Real> cos(TapeExpr<Real> a) { return a.tape->unary(Tape<Real>::Op::Cos, a); }
template <class Real> TapeExpr<Real> tanh(TapeExpr<Real> a) { return a.tape->unary(Tape<Real>::Op::Tanh, a); }
template <class Real> TapeExpr<Real> exp(TapeExpr<Real> a) { return a.tape->unary(Tape<Real>::Op::Exp, a); }
template <class Real> TapeExpr<Real> log(TapeExpr<Real> a) { return a.tape->unary(Tape<Real>::Op::Log, a); }
template <class Real> TapeExpr<Real> relu(TapeExpr<Real> a) { return a.tape->unary(Tape<Real>::Op::Relu, a); }
template <class Real> TapeExpr<Real> square(TapeExpr<Real> a) { return a.tape->unary(Tape<Real>::Op::Square, a); }
template <class Real> TapeExpr<Real> pow_int(TapeExpr<Real> a, int n) {
    return a.tape->unary(Tape<Real>::Op::PowInt, a, n);
}

}  // namespace pfnn2
