#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfnn2/dual.hpp"
#include "pfnn2/rng.hpp"
#include "pfnn2/tape.hpp"
#include "pfnn2/types.hpp"

namespace pfnn2 {

// Residual-block network: affine input projection, n_blocks blocks of two
// affine layers with sinusoid activation and an identity shortcut, affine
// output layer. Periodic spatial axes are fed as (cos, sin) pairs so the
// network is periodic by construction.
struct Architecture {
    int spatial_dim = 1;
    bool has_time = false;
    int output_dim = 1;
    int n_blocks = 1;
    int width = 10;
    std::vector<double> periods;  // per spatial axis; 0 or empty = not periodic

    int input_dim() const {
        int n = 0;
        for (int j = 0; j < spatial_dim; ++j) n += period(j) > 0.0 ? 2 : 1;
        return n + (has_time ? 1 : 0);
    }
    double period(int axis) const {
        return axis < static_cast<int>(periods.size()) ? periods[axis] : 0.0;
    }
    // Number of active derivative directions (spatial dims plus time).
    int n_dirs() const { return spatial_dim + (has_time ? 1 : 0); }

    std::size_t param_count() const {
        const std::size_t in = static_cast<std::size_t>(input_dim());
        const std::size_t w = static_cast<std::size_t>(width);
        const std::size_t out = static_cast<std::size_t>(output_dim);
        return (in * w + w) + static_cast<std::size_t>(n_blocks) * 2 * (w * w + w) +
               (w * out + out);
    }

    void validate() const {
        if (n_blocks < 1 || width < 1 || spatial_dim < 1 || spatial_dim > 3 ||
            output_dim < 1)
            throw std::invalid_argument("network: invalid architecture");
    }
};

// Glorot-uniform weights, zero biases; values drawn in double then cast so a
// given (arch, seed) pair always describes the same network.
template <class Real>
std::vector<Real> init_params(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    std::vector<Real> p(arch.param_count());
    rng::Stream rs(rng::derive(seed, 0x9e7));
    std::size_t at = 0;
    auto layer = [&](int fan_in, int fan_out) {
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < fan_out * fan_in; ++i)
            p[at++] = static_cast<Real>(rs.uniform(-bound, bound));
        for (int i = 0; i < fan_out; ++i) p[at++] = Real(0);
    };
    layer(arch.input_dim(), arch.width);
    for (int b = 0; b < arch.n_blocks; ++b) {
        layer(arch.width, arch.width);
        layer(arch.width, arch.width);
    }
    layer(arch.width, arch.output_dim);
    return p;
}

// Seeded input duals for a point: one derivative direction per raw spatial
// axis plus one for time; periodic axes expand to (cos, sin) features whose
// lanes already carry the chain rule through the embedding.
template <class Real>
std::vector<Dual<Real>> make_input_duals(const Architecture& arch, const Point& p,
                                         const LaneDesc& desc) {
    std::vector<Dual<Real>> in;
    in.reserve(static_cast<std::size_t>(arch.input_dim()));
    for (int j = 0; j < arch.spatial_dim; ++j) {
        const Dual<Real> xj = Dual<Real>::var(desc, static_cast<Real>(p.x[j]), j);
        const double P = arch.period(j);
        if (P > 0.0) {
            const Dual<Real> ang = xj * static_cast<Real>(2.0 * std::numbers::pi / P);
            in.push_back(cos(ang));
            in.push_back(sin(ang));
        } else {
            in.push_back(xj);
        }
    }
    if (arch.has_time)
        in.push_back(Dual<Real>::var(desc, static_cast<Real>(p.t), arch.spatial_dim));
    return in;
}

// --- forward backends -------------------------------------------------------

// Evaluates with plain truncated-Taylor scalars; no tape involved.
template <class Real>
struct PlainBackend {
    using Scalar = Dual<Real>;
    std::span<const Real> params;
    LaneDesc desc;

    Scalar affine(std::size_t w_off, int n, std::span<const Scalar> xs, std::size_t b_off) const {
        double acc[LaneDesc::kMaxLanes] = {};
        const int L = desc.lanes();
        for (int m = 0; m < n; ++m) {
            const double w = static_cast<double>(params[w_off + static_cast<std::size_t>(m)]);
            for (int l = 0; l < L; ++l) acc[l] += w * static_cast<double>(xs[m].a[l]);
        }
        acc[0] += static_cast<double>(params[b_off]);
        Scalar r(desc, 0);
        for (int l = 0; l < L; ++l) r.a[l] = static_cast<Real>(acc[l]);
        return r;
    }
    Scalar activate(const Scalar& x) const { return sin(x); }
    Scalar add(const Scalar& x, const Scalar& y) const { return x + y; }
};

// Records the forward pass on a tape whose leaves are the parameters.
template <class Real>
struct TapedBackend {
    using Scalar = TapeExpr<Real>;
    Tape<Real>* tape;
    std::span<const Scalar> leaves;  // one per parameter, in layout order
    mutable std::vector<Scalar> coef_scratch;

    Scalar affine(std::size_t w_off, int n, std::span<const Scalar> xs, std::size_t b_off) const {
        coef_scratch.resize(static_cast<std::size_t>(n));
        for (int m = 0; m < n; ++m)
            coef_scratch[static_cast<std::size_t>(m)] = leaves[w_off + static_cast<std::size_t>(m)];
        return tape->affine(coef_scratch, xs.first(static_cast<std::size_t>(n)),
                            leaves[b_off]);
    }
    Scalar activate(const Scalar& x) const { return sin(x); }
    Scalar add(const Scalar& x, const Scalar& y) const {
        return tape->binary(Tape<Real>::Op::Add, x, y);
    }
};

// Shared structural forward pass; both backends execute the same op sequence.
template <class Backend>
void net_forward(const Backend& be, const Architecture& arch,
                 std::span<const typename Backend::Scalar> input,
                 std::span<typename Backend::Scalar> out) {
    using S = typename Backend::Scalar;
    const int w = arch.width;
    const int in = arch.input_dim();
    std::size_t at = 0;
    std::vector<S> h(static_cast<std::size_t>(w)), z(static_cast<std::size_t>(w));

    const std::size_t proj_w = at;
    const std::size_t proj_b = at + static_cast<std::size_t>(w) * in;
    for (int i = 0; i < w; ++i)
        h[static_cast<std::size_t>(i)] =
            be.affine(proj_w + static_cast<std::size_t>(i) * in, in, input,
                      proj_b + static_cast<std::size_t>(i));
    at = proj_b + static_cast<std::size_t>(w);

    for (int b = 0; b < arch.n_blocks; ++b) {
        const std::size_t w1 = at, b1 = at + static_cast<std::size_t>(w) * w;
        at = b1 + static_cast<std::size_t>(w);
        const std::size_t w2 = at, b2 = at + static_cast<std::size_t>(w) * w;
        at = b2 + static_cast<std::size_t>(w);
        for (int i = 0; i < w; ++i)
            z[static_cast<std::size_t>(i)] = be.activate(
                be.affine(w1 + static_cast<std::size_t>(i) * w, w, std::span<const S>(h),
                          b1 + static_cast<std::size_t>(i)));
        for (int i = 0; i < w; ++i)
            h[static_cast<std::size_t>(i)] = be.add(
                h[static_cast<std::size_t>(i)],
                be.affine(w2 + static_cast<std::size_t>(i) * w, w, std::span<const S>(z),
                          b2 + static_cast<std::size_t>(i)));
    }

    const std::size_t ow = at, ob = at + static_cast<std::size_t>(w) * arch.output_dim;
    for (int o = 0; o < arch.output_dim; ++o)
        out[static_cast<std::size_t>(o)] =
            be.affine(ow + static_cast<std::size_t>(o) * w, w, std::span<const S>(h),
                      ob + static_cast<std::size_t>(o));
}

// Plain evaluation of a single network at a point; `desc` chooses how many
// derivative lanes to carry (use {0,0} for values only).
template <class Real>
void forward_plain(std::span<const Real> params, const Architecture& arch, const Point& p,
                   const LaneDesc& desc, std::span<Dual<Real>> out) {
    if (params.size() != arch.param_count())
        throw std::invalid_argument("network: parameter vector does not match architecture");
    const auto in = make_input_duals<Real>(arch, p, desc);
    PlainBackend<Real> be{params, desc};
    net_forward(be, arch, std::span<const Dual<Real>>(in), out);
}

// Exact first derivatives of every output with respect to the raw inputs
// (d spatial axes, then time when present).
template <class Real>
struct ValueAndJacobian {
    std::vector<Real> value;                // output_dim
    std::vector<std::array<Real, 4>> jac;   // output_dim x n_dirs
};

template <class Real>
ValueAndJacobian<Real> forward_with_input_grad(std::span<const Real> params,
                                               const Architecture& arch, const Point& p) {
    const LaneDesc desc{arch.n_dirs(), 1};
    std::vector<Dual<Real>> out(static_cast<std::size_t>(arch.output_dim), Dual<Real>(desc, 0));
    forward_plain<Real>(params, arch, p, desc, out);
    ValueAndJacobian<Real> r;
    r.value.resize(out.size());
    r.jac.resize(out.size());
    for (std::size_t o = 0; o < out.size(); ++o) {
        r.value[o] = out[o].value();
        for (int j = 0; j < desc.dirs; ++j) r.jac[o][static_cast<std::size_t>(j)] = out[o].t(j);
    }
    return r;
}

// --- checkpoints -------------------------------------------------------------

void write_checkpoint(const std::string& path, const Architecture& arch, Precision prec,
                      std::span<const float> params_f32, std::span<const double> params_f64);

struct Checkpoint {
    Architecture arch;
    Precision prec;
    std::vector<double> params;  // widened for inspection regardless of file precision
};

Checkpoint read_checkpoint(const std::string& path);

}  // namespace pfnn2
