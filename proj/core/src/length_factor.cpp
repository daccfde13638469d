#include "pfnn2/length_factor.hpp"

#include <cmath>
#include <stdexcept>

namespace pfnn2 {

namespace {

constexpr double kAdjacencyTol = 1e-9;

Dual64 smoothstep(const Dual64& s) { return s * s * (3.0 - 2.0 * s); }

}  // namespace

int auto_companion(const BoundarySegment& target, std::span<const BoundarySegment> pool,
                   int dim, int self_index) {
    int best = -1;
    double best_gap = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (static_cast<int>(i) == self_index) continue;
        const double gap = segment_gap(target, pool[i], dim);
        if (gap <= kAdjacencyTol) continue;  // adjacent: shares points with the target
        if (gap > best_gap) {
            best_gap = gap;
            best = static_cast<int>(i);
        }
    }
    if (best < 0)
        throw std::runtime_error(
            "length_factor: no non-adjacent companion available for segment '" + target.label +
            "'");
    return best;
}

LengthFactor LengthFactor::build(const Geometry& geom, double T, double mu_override) {
    LengthFactor lf;
    lf.dim_ = geom.dim();
    lf.T_ = T;
    const auto& segs = geom.segments();
    for (std::size_t j = 0; j < segs.size(); ++j) {
        if (segs[j].kind != BcKind::Dirichlet) continue;
        SegmentFactor f;
        f.segment = segs[j];
        int comp = segs[j].companion;
        if (comp >= 0) {
            if (segment_gap(segs[j], segs[static_cast<std::size_t>(comp)], geom.dim()) <=
                kAdjacencyTol)
                throw std::runtime_error("length_factor: companion adjacent to segment '" +
                                         segs[j].label + "'");
        } else {
            comp = auto_companion(segs[j], segs, geom.dim(), static_cast<int>(j));
        }
        f.companion = segs[static_cast<std::size_t>(comp)];
        lf.factors_.push_back(std::move(f));
    }
    if (lf.factors_.empty() && T <= 0)
        throw std::runtime_error(
            "length_factor: no essential boundary and no time gate; factor would be constant");
    lf.mu_ = mu_override > 0 ? mu_override
                             : std::max<double>(1.0, static_cast<double>(lf.factors_.size()));
    lf.normalize(geom, nullptr, 0x917u);
    return lf;
}

LengthFactor LengthFactor::build_local(int dim, std::vector<BoundarySegment> essential,
                                       std::vector<BoundarySegment> companions_pool,
                                       const Box& region, const Geometry& geom, double T,
                                       double mu_override) {
    LengthFactor lf;
    lf.dim_ = dim;
    lf.T_ = T;
    // the pool holds every local segment; essentials may pair with any
    // non-adjacent member, mirroring companions taken from the natural
    // boundary in the global construction
    for (auto& seg : essential) {
        SegmentFactor f;
        f.segment = seg;
        const int comp = auto_companion(seg, companions_pool, dim, -1);
        f.companion = companions_pool[static_cast<std::size_t>(comp)];
        lf.factors_.push_back(std::move(f));
    }
    if (lf.factors_.empty() && T <= 0)
        throw std::runtime_error(
            "length_factor: local problem has no essential data and no time gate");
    lf.mu_ = mu_override > 0 ? mu_override
                             : std::max<double>(1.0, static_cast<double>(lf.factors_.size()));
    lf.normalize(geom, &region, 0x11b7u);
    return lf;
}

double LengthFactor::factor_value(int j, const Vec3& x) const {
    const auto& f = factors_[static_cast<std::size_t>(j)];
    const double dj = segment_distance(f.segment, dim_, x);
    const double dc = segment_distance(f.companion, dim_, x);
    const double denom = dj + dc;
    if (denom <= 0) return 0.0;
    const double s = dj / denom;
    return s * s * (3.0 - 2.0 * s);
}

Dual64 LengthFactor::raw_dual(const Point& p, const LaneDesc& desc) const {
    Dual64 x[3];
    for (int j = 0; j < dim_; ++j) x[j] = Dual64::var(desc, p.x[j], j);

    Dual64 prod = Dual64::constant(desc, 1.0);
    for (const auto& f : factors_) {
        const Dual64 dj = segment_distance_dual(f.segment, dim_, x);
        const Dual64 dc = segment_distance_dual(f.companion, dim_, x);
        // On the essential piece d_j = 0 exactly, the smoothstep has zero
        // slope there, and every derivative lane of the product vanishes:
        // returning an exact zero is exact, not an approximation.
        if (dj.value() == 0.0) return Dual64::constant(desc, 0.0);
        const Dual64 lj = smoothstep(dj / (dj + dc));
        // 1 - (1 - l_j)^mu, with an integer fast path for the default mu
        const Dual64 one_m = 1.0 - lj;
        Dual64 powd(desc, 0.0);
        if (mu_ == std::floor(mu_) && mu_ >= 1 && mu_ <= 16) {
            powd = pow_int(one_m, static_cast<int>(mu_));
        } else {
            powd = one_m.value() > 0 ? exp(mu_ * log(one_m)) : Dual64::constant(desc, 0.0);
        }
        prod = prod * (1.0 - powd);
    }

    if (T_ > 0) {
        // multiplying by t/T is exact at t = 0: the value lane becomes an
        // exact zero and the time lane keeps the correct slope prod/T
        const Dual64 tt = Dual64::var(desc, p.t, dim_) * (1.0 / T_);
        prod = prod * tt;
    }
    return prod;
}

double LengthFactor::operator()(const Point& p) const {
    if (T_ > 0 && p.t == 0.0) return 0.0;
    LaneDesc d0{0, 0};
    const Dual64 v = raw_dual(p, d0);
    return v.value() / norm_;
}

Dual64 LengthFactor::eval_dual(const Point& p, const LaneDesc& desc) const {
    Dual64 v = raw_dual(p, desc);
    return v * (1.0 / norm_);
}

void LengthFactor::normalize(const Geometry& geom, const Box* region, std::uint64_t tag) {
    norm_ = 1.0;
    rng::Stream rs(rng::derive(0x1f5ull, tag));
    const int n = 100000;
    double mx = 0;
    const Box bb = region ? *region : geom.bbox();
    LaneDesc d0{0, 0};
    int found = 0;
    for (int i = 0; i < n; ++i) {
        Point p;
        for (int j = 0; j < dim_; ++j) p.x[j] = rs.uniform(bb.lo[j], bb.hi[j]);
        if (!geom.contains(p.x)) continue;
        ++found;
        if (T_ > 0) p.t = T_ * (1.0 - rs.u01());
        const double v = raw_dual(p, d0).value();
        if (v > mx) mx = v;
    }
    if (found == 0 || mx <= 0)
        throw std::runtime_error("length_factor: normalization sample found no positive values");
    norm_ = mx;
}

}  // namespace pfnn2
