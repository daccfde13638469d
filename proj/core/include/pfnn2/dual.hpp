#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>

namespace pfnn2 {

// Lane layout of a truncated Taylor value: [value | k tangents | upper-tri
// second-order block]. `dirs` is the number of active input directions
// (spatial dims plus time), `order` the derivative order carried along.
struct LaneDesc {
    int dirs = 0;
    int order = 0;

    static constexpr int kMaxDirs = 4;
    static constexpr int kMaxLanes = 1 + kMaxDirs + kMaxDirs * (kMaxDirs + 1) / 2;

    constexpr int lanes() const {
        int n = 1;
        if (order >= 1) n += dirs;
        if (order >= 2) n += dirs * (dirs + 1) / 2;
        return n;
    }
    constexpr int t(int i) const { return 1 + i; }
    // Index of the (i,j) second-order lane, i <= j required.
    constexpr int h(int i, int j) const {
        return 1 + dirs + i * dirs - i * (i - 1) / 2 + (j - i);
    }
    constexpr int hsym(int i, int j) const { return i <= j ? h(i, j) : h(j, i); }

    friend constexpr bool operator==(const LaneDesc& a, const LaneDesc& b) {
        return a.dirs == b.dirs && a.order == b.order;
    }
};

namespace lanes {

// c = a + b
template <class Real>
inline void add(const LaneDesc& d, Real* c, const Real* a, const Real* b) {
    for (int l = 0, L = d.lanes(); l < L; ++l) c[l] = a[l] + b[l];
}

template <class Real>
inline void sub(const LaneDesc& d, Real* c, const Real* a, const Real* b) {
    for (int l = 0, L = d.lanes(); l < L; ++l) c[l] = a[l] - b[l];
}

template <class Real>
inline void neg(const LaneDesc& d, Real* c, const Real* a) {
    for (int l = 0, L = d.lanes(); l < L; ++l) c[l] = -a[l];
}

template <class Real>
inline void scale(const LaneDesc& d, Real* c, Real s, const Real* a) {
    for (int l = 0, L = d.lanes(); l < L; ++l) c[l] = s * a[l];
}

// c += s * a over all lanes (s carries no lanes).
template <class Real>
inline void axpy(const LaneDesc& d, Real* c, Real s, const Real* a) {
    for (int l = 0, L = d.lanes(); l < L; ++l) c[l] += s * a[l];
}

// Full product rule, both operands carrying lanes.
template <class Real>
inline void mul(const LaneDesc& d, Real* c, const Real* a, const Real* b) {
    const int k = d.dirs;
    if (d.order >= 2) {
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j) {
                const int ij = d.h(i, j);
                c[ij] = a[0] * b[ij] + a[ij] * b[0] +
                        a[d.t(i)] * b[d.t(j)] + a[d.t(j)] * b[d.t(i)];
            }
    }
    if (d.order >= 1) {
        for (int i = 0; i < k; ++i) {
            const int ti = d.t(i);
            c[ti] = a[0] * b[ti] + a[ti] * b[0];
        }
    }
    c[0] = a[0] * b[0];
}

// Unary chain rule; f0 = f(a0), f1 = f'(a0), f2 = f''(a0).
template <class Real>
inline void unary(const LaneDesc& d, Real* c, const Real* a, Real f0, Real f1, Real f2) {
    const int k = d.dirs;
    if (d.order >= 2) {
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j) {
                const int ij = d.h(i, j);
                c[ij] = f1 * a[ij] + f2 * a[d.t(i)] * a[d.t(j)];
            }
    }
    if (d.order >= 1)
        for (int i = 0; i < k; ++i) c[d.t(i)] = f1 * a[d.t(i)];
    c[0] = f0;
}

}  // namespace lanes

// Plain (untaped) truncated-Taylor scalar. Used for input-derivative
// evaluation of networks, length factors, data functions and test oracles.
template <class Real>
struct Dual {
    LaneDesc desc{};
    std::array<Real, LaneDesc::kMaxLanes> a{};

    Dual() = default;
    Dual(const LaneDesc& d, Real v) : desc(d) { a[0] = v; }

    static Dual constant(const LaneDesc& d, Real v) { return Dual(d, v); }
    // Seed an input variable: value v, unit tangent along `dir`.
    static Dual var(const LaneDesc& d, Real v, int dir) {
        Dual r(d, v);
        if (d.order >= 1) r.a[d.t(dir)] = Real(1);
        return r;
    }

    Real value() const { return a[0]; }
    Real t(int i) const { return desc.order >= 1 ? a[desc.t(i)] : Real(0); }
    Real h(int i, int j) const { return desc.order >= 2 ? a[desc.hsym(i, j)] : Real(0); }

    Real& value() { return a[0]; }

    friend Dual operator+(const Dual& x, const Dual& y) {
        Dual r(x.desc, 0);
        lanes::add(x.desc, r.a.data(), x.a.data(), y.a.data());
        return r;
    }
    friend Dual operator-(const Dual& x, const Dual& y) {
        Dual r(x.desc, 0);
        lanes::sub(x.desc, r.a.data(), x.a.data(), y.a.data());
        return r;
    }
    friend Dual operator-(const Dual& x) {
        Dual r(x.desc, 0);
        lanes::neg(x.desc, r.a.data(), x.a.data());
        return r;
    }
    friend Dual operator*(const Dual& x, const Dual& y) {
        Dual r(x.desc, 0);
        lanes::mul(x.desc, r.a.data(), x.a.data(), y.a.data());
        return r;
    }
    friend Dual operator/(const Dual& x, const Dual& y) { return x * recip(y); }

    friend Dual operator+(const Dual& x, Real s) { Dual r = x; r.a[0] += s; return r; }
    friend Dual operator+(Real s, const Dual& x) { return x + s; }
    friend Dual operator-(const Dual& x, Real s) { Dual r = x; r.a[0] -= s; return r; }
    friend Dual operator-(Real s, const Dual& x) { return -(x - s); }
    friend Dual operator*(const Dual& x, Real s) {
        Dual r(x.desc, 0);
        lanes::scale(x.desc, r.a.data(), s, x.a.data());
        return r;
    }
    friend Dual operator*(Real s, const Dual& x) { return x * s; }
    friend Dual operator/(const Dual& x, Real s) { return x * (Real(1) / s); }
    friend Dual operator/(Real s, const Dual& x) { return recip(x) * s; }

    Dual& operator+=(const Dual& y) { *this = *this + y; return *this; }
    Dual& operator-=(const Dual& y) { *this = *this - y; return *this; }
    Dual& operator*=(const Dual& y) { *this = *this * y; return *this; }

    friend Dual unary_of(const Dual& x, Real f0, Real f1, Real f2) {
        Dual r(x.desc, 0);
        lanes::unary(x.desc, r.a.data(), x.a.data(), f0, f1, f2);
        return r;
    }

    friend Dual sin(const Dual& x) {
        const Real s = std::sin(x.a[0]), c = std::cos(x.a[0]);
        return unary_of(x, s, c, -s);
    }
    friend Dual cos(const Dual& x) {
        const Real s = std::sin(x.a[0]), c = std::cos(x.a[0]);
        return unary_of(x, c, -s, -c);
    }
    friend Dual tanh(const Dual& x) {
        const Real th = std::tanh(x.a[0]), g = Real(1) - th * th;
        return unary_of(x, th, g, Real(-2) * th * g);
    }
    friend Dual exp(const Dual& x) {
        const Real e = std::exp(x.a[0]);
        return unary_of(x, e, e, e);
    }
    friend Dual log(const Dual& x) {
        const Real v = x.a[0];
        return unary_of(x, std::log(v), Real(1) / v, Real(-1) / (v * v));
    }
    friend Dual recip(const Dual& x) {
        const Real r = Real(1) / x.a[0];
        return unary_of(x, r, -r * r, Real(2) * r * r * r);
    }
    friend Dual sqrt(const Dual& x) {
        const Real s = std::sqrt(x.a[0]);
        if (s == Real(0)) return unary_of(x, s, Real(0), Real(0));  // kink convention
        const Real h = Real(0.5) / s;
        return unary_of(x, s, h, Real(-0.5) * h / x.a[0]);
    }
    friend Dual pow_int(const Dual& x, int n) {
        assert(n >= 0);
        const Real v = x.a[0];
        auto ipow = [](Real b, int e) {
            Real r = Real(1);
            for (int i = 0; i < e; ++i) r *= b;
            return r;
        };
        const Real f0 = ipow(v, n);
        const Real f1 = n >= 1 ? Real(n) * ipow(v, n - 1) : Real(0);
        const Real f2 = n >= 2 ? Real(n) * Real(n - 1) * ipow(v, n - 2) : Real(0);
        return unary_of(x, f0, f1, f2);
    }
    friend Dual relu(const Dual& x) {
        const Real g = x.a[0] > Real(0) ? Real(1) : Real(0);
        return unary_of(x, g * x.a[0], g, Real(0));
    }
    friend Dual abs(const Dual& x) {
        const Real g = x.a[0] > Real(0) ? Real(1) : (x.a[0] < Real(0) ? Real(-1) : Real(0));
        return unary_of(x, std::abs(x.a[0]), g, Real(0));
    }
    friend const Dual& min_by_value(const Dual& x, const Dual& y) {
        return x.a[0] <= y.a[0] ? x : y;
    }
    friend const Dual& max_by_value(const Dual& x, const Dual& y) {
        return x.a[0] >= y.a[0] ? x : y;
    }
};

using Dual64 = Dual<double>;

}  // namespace pfnn2
