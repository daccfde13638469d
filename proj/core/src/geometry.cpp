#include "pfnn2/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pfnn2 {

namespace {

double sq(double v) { return v * v; }

// Interval gap: 0 inside [lo,hi], distance to the nearest end otherwise.
double interval_gap(double x, double lo, double hi) {
    if (x < lo) return lo - x;
    if (x > hi) return x - hi;
    return 0.0;
}

double dist_point_segment2(const std::array<double, 2>& p, const std::array<double, 2>& a,
                           const std::array<double, 2>& b) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double ux = p[0] - a[0], uy = p[1] - a[1];
    const double vv = vx * vx + vy * vy;
    double t = vv > 0 ? (ux * vx + uy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::sqrt(sq(ux - t * vx) + sq(uy - t * vy));
}

double dist_segment_segment2(const std::array<double, 2>& a0, const std::array<double, 2>& a1,
                             const std::array<double, 2>& b0, const std::array<double, 2>& b1) {
    auto orient = [](const std::array<double, 2>& p, const std::array<double, 2>& q,
                     const std::array<double, 2>& r) {
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    };
    const double o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
    const double o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
    if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0))) return 0.0;  // proper crossing
    return std::min(std::min(dist_point_segment2(a0, b0, b1), dist_point_segment2(a1, b0, b1)),
                    std::min(dist_point_segment2(b0, a0, a1), dist_point_segment2(b1, a0, a1)));
}

// min over t in [0,1] of max(|u1 - t v1|, |u2 - t v2|): candidates are the
// endpoints, each term's zero, and the crossings of the two terms.
double cheb_point_segment2(const std::array<double, 2>& p, const std::array<double, 2>& a,
                           const std::array<double, 2>& b) {
    const double v1 = b[0] - a[0], v2 = b[1] - a[1];
    const double u1 = p[0] - a[0], u2 = p[1] - a[1];
    double cand[6];
    int nc = 0;
    cand[nc++] = 0.0;
    cand[nc++] = 1.0;
    if (v1 != 0.0) cand[nc++] = u1 / v1;
    if (v2 != 0.0) cand[nc++] = u2 / v2;
    if (v1 - v2 != 0.0) cand[nc++] = (u1 - u2) / (v1 - v2);
    if (v1 + v2 != 0.0) cand[nc++] = (u1 + u2) / (v1 + v2);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nc; ++i) {
        const double t = std::clamp(cand[i], 0.0, 1.0);
        best = std::min(best, std::max(std::abs(u1 - t * v1), std::abs(u2 - t * v2)));
    }
    return best;
}

bool polygon_contains(const std::vector<std::array<double, 2>>& v, double x, double y) {
    // crossing-number test
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const bool above_i = v[i][1] > y, above_j = v[j][1] > y;
        if (above_i != above_j) {
            const double xc =
                v[j][0] + (y - v[j][1]) / (v[i][1] - v[j][1]) * (v[i][0] - v[j][0]);
            if (x < xc) inside = !inside;
        }
    }
    return inside;
}

double polygon_area(const std::vector<std::array<double, 2>>& v) {
    double a = 0;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        a += v[j][0] * v[i][1] - v[i][0] * v[j][1];
    return 0.5 * a;
}

std::vector<std::array<double, 2>> face_as_segment(const AxisFace& f) {
    const int o = 1 - f.axis;  // 2D only
    std::array<double, 2> p0{}, p1{};
    p0[static_cast<std::size_t>(f.axis)] = f.coord;
    p1[static_cast<std::size_t>(f.axis)] = f.coord;
    p0[static_cast<std::size_t>(o)] = f.bounds.lo[o];
    p1[static_cast<std::size_t>(o)] = f.bounds.hi[o];
    return {p0, p1};
}

}  // namespace

// --- segment-level queries -----------------------------------------------------

double segment_measure(const BoundarySegment& seg, int dim) {
    if (const auto* f = std::get_if<AxisFace>(&seg.support)) {
        if (dim == 1) return 1.0;  // point boundary: counting measure
        double m = 1;
        for (int j = 0; j < dim; ++j)
            if (j != f->axis) m *= f->bounds.hi[j] - f->bounds.lo[j];
        return m;
    }
    const auto& pl = std::get<Polyline>(seg.support);
    double len = 0;
    for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k)
        len += std::hypot(pl.pts[k + 1][0] - pl.pts[k][0], pl.pts[k + 1][1] - pl.pts[k][1]);
    return len;
}

double segment_distance(const BoundarySegment& seg, int dim, const Vec3& x) {
    if (const auto* f = std::get_if<AxisFace>(&seg.support)) {
        double d2 = sq(x[f->axis] - f->coord);
        bool single = true;
        for (int j = 0; j < dim; ++j) {
            if (j == f->axis) continue;
            const double g = interval_gap(x[j], f->bounds.lo[j], f->bounds.hi[j]);
            if (g > 0) { d2 += sq(g); single = false; }
        }
        return single ? std::abs(x[f->axis] - f->coord) : std::sqrt(d2);
    }
    const auto& pl = std::get<Polyline>(seg.support);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k)
        best = std::min(best, dist_point_segment2({x[0], x[1]}, pl.pts[k], pl.pts[k + 1]));
    return best;
}

double segment_cheb_distance(const BoundarySegment& seg, int dim, const Vec3& x) {
    if (const auto* f = std::get_if<AxisFace>(&seg.support)) {
        double m = std::abs(x[f->axis] - f->coord);
        for (int j = 0; j < dim; ++j)
            if (j != f->axis)
                m = std::max(m, interval_gap(x[j], f->bounds.lo[j], f->bounds.hi[j]));
        return m;
    }
    const auto& pl = std::get<Polyline>(seg.support);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k)
        best = std::min(best, cheb_point_segment2({x[0], x[1]}, pl.pts[k], pl.pts[k + 1]));
    return best;
}

Dual64 segment_distance_dual(const BoundarySegment& seg, int dim, const Dual64* x) {
    const LaneDesc d = x[0].desc;
    if (const auto* f = std::get_if<AxisFace>(&seg.support)) {
        const Dual64 ga = x[f->axis] - f->coord;
        Dual64 d2 = Dual64::constant(d, 0.0);
        bool single = true;
        for (int j = 0; j < dim; ++j) {
            if (j == f->axis) continue;
            if (x[j].value() < f->bounds.lo[j]) {
                const Dual64 g = f->bounds.lo[j] - x[j];
                d2 += g * g;
                single = false;
            } else if (x[j].value() > f->bounds.hi[j]) {
                const Dual64 g = x[j] - f->bounds.hi[j];
                d2 += g * g;
                single = false;
            }
        }
        if (single) return abs(ga);
        d2 += ga * ga;
        return sqrt(d2);
    }
    const auto& pl = std::get<Polyline>(seg.support);
    // pick the nearest edge by plain values, then redo that edge with lanes
    std::size_t bk = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k) {
        const double dd =
            dist_point_segment2({x[0].value(), x[1].value()}, pl.pts[k], pl.pts[k + 1]);
        if (dd < best) { best = dd; bk = k; }
    }
    const auto& a = pl.pts[bk];
    const auto& b = pl.pts[bk + 1];
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double vv = vx * vx + vy * vy;
    const Dual64 ux = x[0] - a[0], uy = x[1] - a[1];
    const double tplain =
        vv > 0 ? ((x[0].value() - a[0]) * vx + (x[1].value() - a[1]) * vy) / vv : 0.0;
    Dual64 rx(d, 0), ry(d, 0);
    if (tplain <= 0.0 || tplain >= 1.0 || vv == 0.0) {
        const double t = std::clamp(tplain, 0.0, 1.0);
        rx = ux - t * vx;
        ry = uy - t * vy;
    } else {
        const Dual64 t = (ux * vx + uy * vy) * (1.0 / vv);
        rx = ux - t * vx;
        ry = uy - t * vy;
    }
    return sqrt(rx * rx + ry * ry);
}

double segment_gap(const BoundarySegment& a, const BoundarySegment& b, int dim) {
    const auto* fa = std::get_if<AxisFace>(&a.support);
    const auto* fb = std::get_if<AxisFace>(&b.support);
    if (fa && fb) {
        if (dim == 1) return std::abs(fa->coord - fb->coord);
        double d2 = 0;
        for (int ax = 0; ax < dim; ++ax) {
            const double lo_a = ax == fa->axis ? fa->coord : fa->bounds.lo[ax];
            const double hi_a = ax == fa->axis ? fa->coord : fa->bounds.hi[ax];
            const double lo_b = ax == fb->axis ? fb->coord : fb->bounds.lo[ax];
            const double hi_b = ax == fb->axis ? fb->coord : fb->bounds.hi[ax];
            d2 += sq(std::max({lo_b - hi_a, lo_a - hi_b, 0.0}));
        }
        return std::sqrt(d2);
    }
    auto edges = [&](const BoundarySegment& s) {
        std::vector<std::array<std::array<double, 2>, 2>> e;
        if (const auto* f = std::get_if<AxisFace>(&s.support)) {
            auto seg2 = face_as_segment(*f);
            e.push_back({seg2[0], seg2[1]});
        } else {
            const auto& pl = std::get<Polyline>(s.support);
            for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k)
                e.push_back({pl.pts[k], pl.pts[k + 1]});
        }
        return e;
    };
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ea : edges(a))
        for (const auto& eb : edges(b))
            best = std::min(best, dist_segment_segment2(ea[0], ea[1], eb[0], eb[1]));
    return best;
}

std::vector<BoundarySample> sample_on_segment(const BoundarySegment& seg, int dim, int n,
                                              double T, rng::Stream& rs) {
    std::vector<BoundarySample> out;
    out.reserve(static_cast<std::size_t>(n));
    if (const auto* f = std::get_if<AxisFace>(&seg.support)) {
        for (int i = 0; i < n; ++i) {
            BoundarySample bs;
            bs.p.x[f->axis] = f->coord;
            for (int j = 0; j < dim; ++j)
                if (j != f->axis) bs.p.x[j] = rs.uniform(f->bounds.lo[j], f->bounds.hi[j]);
            if (T > 0) bs.p.t = T * rs.u01_open_low();
            bs.normal[f->axis] = f->sign;
            out.push_back(bs);
        }
        return out;
    }
    const auto& pl = std::get<Polyline>(seg.support);
    std::vector<double> cum{0.0};
    for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k)
        cum.push_back(cum.back() + std::hypot(pl.pts[k + 1][0] - pl.pts[k][0],
                                              pl.pts[k + 1][1] - pl.pts[k][1]));
    const double total = cum.back();
    for (int i = 0; i < n; ++i) {
        const double a = rs.u01() * total;
        std::size_t k = 0;
        while (k + 2 < cum.size() && a >= cum[k + 1]) ++k;
        const double seg_len = cum[k + 1] - cum[k];
        const double t = seg_len > 0 ? (a - cum[k]) / seg_len : 0.0;
        const double ex = pl.pts[k + 1][0] - pl.pts[k][0];
        const double ey = pl.pts[k + 1][1] - pl.pts[k][1];
        BoundarySample bs;
        bs.p.x[0] = pl.pts[k][0] + t * ex;
        bs.p.x[1] = pl.pts[k][1] + t * ey;
        if (T > 0) bs.p.t = T * rs.u01_open_low();
        const double el = std::hypot(ex, ey);
        bs.normal[0] = pl.outward * (ey / el);
        bs.normal[1] = pl.outward * (-ex / el);
        out.push_back(bs);
    }
    return out;
}

std::vector<BoundarySegment> clip_segment_to_box(const BoundarySegment& seg, int dim,
                                                 const Box& box) {
    std::vector<BoundarySegment> out;
    if (const auto* f = std::get_if<AxisFace>(&seg.support)) {
        if (f->coord < box.lo[f->axis] || f->coord > box.hi[f->axis]) return out;
        AxisFace cf = *f;
        for (int j = 0; j < dim; ++j) {
            if (j == f->axis) continue;
            cf.bounds.lo[j] = std::max(f->bounds.lo[j], box.lo[j]);
            cf.bounds.hi[j] = std::min(f->bounds.hi[j], box.hi[j]);
            if (dim > 1 && cf.bounds.lo[j] >= cf.bounds.hi[j]) return out;
        }
        BoundarySegment c = seg;
        c.support = cf;
        out.push_back(std::move(c));
        return out;
    }
    // Liang-Barsky per edge; chain surviving pieces into polylines.
    const auto& pl = std::get<Polyline>(seg.support);
    Polyline cur;
    cur.outward = pl.outward;
    auto flush = [&]() {
        if (cur.pts.size() >= 2) {
            BoundarySegment c = seg;
            c.support = cur;
            out.push_back(std::move(c));
        }
        cur.pts.clear();
    };
    for (std::size_t k = 0; k + 1 < pl.pts.size(); ++k) {
        const auto& a = pl.pts[k];
        const auto& b = pl.pts[k + 1];
        double t0 = 0, t1 = 1;
        bool keep = true;
        for (int j = 0; j < 2 && keep; ++j) {
            const double d = b[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j)];
            const double lo = box.lo[j], hi = box.hi[j];
            const double aj = a[static_cast<std::size_t>(j)];
            if (d == 0) {
                if (aj < lo || aj > hi) keep = false;
            } else {
                double ta = (lo - aj) / d, tb = (hi - aj) / d;
                if (ta > tb) std::swap(ta, tb);
                t0 = std::max(t0, ta);
                t1 = std::min(t1, tb);
                if (t0 > t1) keep = false;
            }
        }
        if (!keep) { flush(); continue; }
        const std::array<double, 2> pa{a[0] + t0 * (b[0] - a[0]), a[1] + t0 * (b[1] - a[1])};
        const std::array<double, 2> pb{a[0] + t1 * (b[0] - a[0]), a[1] + t1 * (b[1] - a[1])};
        if (cur.pts.empty()) {
            cur.pts.push_back(pa);
        } else {
            const auto& last = cur.pts.back();
            if (std::hypot(last[0] - pa[0], last[1] - pa[1]) > 1e-12) {
                flush();
                cur.pts.push_back(pa);
            }
        }
        cur.pts.push_back(pb);
    }
    flush();
    return out;
}

// --- Geometry ----------------------------------------------------------------

Geometry::Geometry(int dim, Shape shape, std::vector<BoundarySegment> segments)
    : dim_(dim), shape_(std::move(shape)), segments_(std::move(segments)) {
    compute_bbox_volume();
}

void Geometry::compute_bbox_volume() {
    if (const auto* b = std::get_if<BoxShape>(&shape_)) {
        bbox_ = b->box;
        volume_ = b->box.volume(dim_);
    } else if (const auto* bb = std::get_if<BoxMinusBox>(&shape_)) {
        bbox_ = bb->outer;
        double inner = 0;
        if (auto isect = bb->outer.intersect(bb->inner, dim_)) inner = isect->volume(dim_);
        volume_ = bb->outer.volume(dim_) - inner;
    } else if (const auto* pg = std::get_if<PolygonShape>(&shape_)) {
        bbox_.lo = {std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), 0};
        bbox_.hi = {-std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(), 0};
        for (const auto& v : pg->vertices) {
            bbox_.lo[0] = std::min(bbox_.lo[0], v[0]);
            bbox_.lo[1] = std::min(bbox_.lo[1], v[1]);
            bbox_.hi[0] = std::max(bbox_.hi[0], v[0]);
            bbox_.hi[1] = std::max(bbox_.hi[1], v[1]);
        }
        volume_ = std::abs(polygon_area(pg->vertices));
    } else {
        const auto& p = std::get<PeriodicShape>(shape_);
        bbox_ = p.box;
        volume_ = p.box.volume(dim_);
    }
}

bool Geometry::contains(const Vec3& x) const {
    if (const auto* b = std::get_if<BoxShape>(&shape_)) return b->box.contains(x, dim_);
    if (const auto* bb = std::get_if<BoxMinusBox>(&shape_))
        return bb->outer.contains(x, dim_) && !bb->inner.contains_strict(x, dim_);
    if (const auto* pg = std::get_if<PolygonShape>(&shape_))
        return polygon_contains(pg->vertices, x[0], x[1]);
    return std::get<PeriodicShape>(shape_).box.contains(x, dim_);
}

double Geometry::segment_length(int i) const {
    return segment_measure(segments_[static_cast<std::size_t>(i)], dim_);
}

double Geometry::boundary_measure(BcKind kind) const {
    double m = 0;
    for (std::size_t i = 0; i < segments_.size(); ++i)
        if (segments_[i].kind == kind) m += segment_length(static_cast<int>(i));
    return m;
}

bool Geometry::has_dirichlet() const {
    for (const auto& s : segments_)
        if (s.kind == BcKind::Dirichlet) return true;
    return false;
}

double Geometry::distance_to_segment(const Vec3& x, int seg) const {
    return segment_distance(segments_[static_cast<std::size_t>(seg)], dim_, x);
}

double Geometry::distance_to_dirichlet(const Vec3& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < segments_.size(); ++i)
        if (segments_[i].kind == BcKind::Dirichlet)
            best = std::min(best, distance_to_segment(x, static_cast<int>(i)));
    return best;
}

double Geometry::cheb_distance_to_segment(const Vec3& x, int seg) const {
    return segment_cheb_distance(segments_[static_cast<std::size_t>(seg)], dim_, x);
}

Dual64 Geometry::distance_to_segment_dual(const Dual64* x, int seg) const {
    return segment_distance_dual(segments_[static_cast<std::size_t>(seg)], dim_, x);
}

double Geometry::segment_gap(int i, int j) const {
    return pfnn2::segment_gap(segments_[static_cast<std::size_t>(i)],
                              segments_[static_cast<std::size_t>(j)], dim_);
}

std::vector<Point> Geometry::sample_interior(int n, double T, rng::Stream& rs) const {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(n));
    long attempts = 0;
    while (static_cast<int>(out.size()) < n) {
        ++attempts;
        Point p;
        for (int j = 0; j < dim_; ++j) p.x[j] = rs.uniform(bbox_.lo[j], bbox_.hi[j]);
        if (contains(p.x)) {
            if (T > 0) p.t = T * rs.u01_open_low();
            out.push_back(p);
        }
        if (attempts >= 1000 && static_cast<double>(out.size()) < 0.01 * attempts)
            throw std::runtime_error(
                "geometry: interior rejection acceptance rate below 1%; check the shape");
    }
    return out;
}

std::vector<BoundarySample> Geometry::sample_segment(int seg, int n, double T,
                                                     rng::Stream& rs) const {
    auto out = sample_on_segment(segments_[static_cast<std::size_t>(seg)], dim_, n, T, rs);
    for (auto& bs : out) bs.segment = seg;
    return out;
}

std::vector<BoundarySample> Geometry::sample_boundary(BcKind kind, int n, double T,
                                                      rng::Stream& rs) const {
    std::vector<int> segs;
    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i < segments_.size(); ++i)
        if (segments_[i].kind == kind) {
            segs.push_back(static_cast<int>(i));
            cum.push_back(cum.back() + segment_length(static_cast<int>(i)));
        }
    std::vector<BoundarySample> out;
    if (segs.empty() || cum.back() <= 0) return out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double a = rs.u01() * cum.back();
        std::size_t k = 0;
        while (k + 2 < cum.size() && a >= cum[k + 1]) ++k;
        auto one = sample_segment(segs[k], 1, T, rs);
        out.push_back(one[0]);
    }
    return out;
}

Geometry Geometry::unit_box(int dim) {
    Box b;
    for (int j = 0; j < dim; ++j) { b.lo[j] = 0; b.hi[j] = 1; }
    std::vector<BoundarySegment> segs;
    for (int ax = 0; ax < dim; ++ax)
        for (int side = 0; side < 2; ++side) {
            AxisFace f;
            f.axis = ax;
            f.coord = side == 0 ? b.lo[ax] : b.hi[ax];
            f.sign = side == 0 ? -1 : 1;
            f.bounds = b;
            segs.push_back({BcKind::Dirichlet, f, -1,
                            "face_ax" + std::to_string(ax) + (side ? "_hi" : "_lo")});
        }
    return Geometry(dim, BoxShape{b}, std::move(segs));
}

Geometry Geometry::interval(double a, double b) {
    Box bx;
    bx.lo[0] = a;
    bx.hi[0] = b;
    AxisFace fa{0, a, bx, -1}, fb{0, b, bx, 1};
    std::vector<BoundarySegment> segs{{BcKind::Dirichlet, fa, 1, "left"},
                                      {BcKind::Dirichlet, fb, 0, "right"}};
    return Geometry(1, BoxShape{bx}, std::move(segs));
}

Geometry Geometry::lshape() {
    Box outer, inner;
    outer.lo = {-2, -2, 0};
    outer.hi = {2, 2, 0};
    inner.lo = {0, 0, 0};
    inner.hi = {2, 2, 0};
    auto face = [](int axis, double coord, double lo0, double hi0, double lo1, double hi1,
                   double sign) {
        AxisFace f;
        f.axis = axis;
        f.coord = coord;
        f.bounds.lo = {lo0, lo1, 0};
        f.bounds.hi = {hi0, hi1, 0};
        f.sign = sign;
        return f;
    };
    std::vector<BoundarySegment> segs;
    segs.push_back({BcKind::Neumann, face(0, -2, -2, 2, -2, 2, -1), -1, "left"});
    segs.push_back({BcKind::Neumann, face(1, -2, -2, 2, -2, 2, -1), -1, "bottom"});
    segs.push_back({BcKind::Dirichlet, face(0, 2, -2, 2, -2, 0, 1), -1, "right"});
    segs.push_back({BcKind::Dirichlet, face(1, 2, -2, 0, -2, 2, 1), -1, "top"});
    segs.push_back({BcKind::Dirichlet, face(0, 0, -2, 2, 0, 2, 1), -1, "inner_left"});
    segs.push_back({BcKind::Dirichlet, face(1, 0, 0, 2, -2, 2, 1), -1, "inner_bottom"});
    return Geometry(2, BoxMinusBox{outer, inner}, std::move(segs));
}

Geometry Geometry::periodic_box(int dim, double lo, double hi) {
    Box b;
    for (int j = 0; j < dim; ++j) { b.lo[j] = lo; b.hi[j] = hi; }
    return Geometry(dim, PeriodicShape{b}, {});
}

Geometry Geometry::polygon(std::vector<std::array<double, 2>> vertices, int n_dirichlet_arcs) {
    if (vertices.size() < 3) throw std::invalid_argument("geometry: polygon needs >= 3 vertices");
    if (polygon_area(vertices) < 0) std::reverse(vertices.begin(), vertices.end());
    const std::size_t n = vertices.size();
    const int m = std::max(1, n_dirichlet_arcs);
    if (static_cast<int>(n) < 2 * m)
        throw std::invalid_argument("geometry: polygon needs at least 2 vertices per arc");
    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = vertices[i];
        const auto& b = vertices[(i + 1) % n];
        cum.push_back(cum.back() + std::hypot(b[0] - a[0], b[1] - a[1]));
    }
    const double total = cum.back();
    std::vector<BoundarySegment> segs;
    std::size_t vi = 0;
    for (int arc = 0; arc < m; ++arc) {
        const double target = total * (arc + 1) / m;
        Polyline pl;
        pl.pts.push_back(vertices[vi % n]);
        while (vi < n && cum[vi + 1] <= target + 1e-12) {
            ++vi;
            pl.pts.push_back(vertices[vi % n]);
        }
        if (pl.pts.size() < 2) continue;
        segs.push_back({BcKind::Dirichlet, pl, -1, "arc" + std::to_string(arc)});
    }
    return Geometry(2, PolygonShape{std::move(vertices)}, std::move(segs));
}

Geometry Geometry::box_burgers3d() {
    Box b;
    b.lo = {0, 0, 0};
    b.hi = {1, 1, 1};
    std::vector<BoundarySegment> segs;
    for (int ax = 0; ax < 3; ++ax)
        for (int side = 0; side < 2; ++side) {
            AxisFace f;
            f.axis = ax;
            f.coord = side == 0 ? 0.0 : 1.0;
            f.sign = side == 0 ? -1 : 1;
            f.bounds = b;
            const BcKind kind = ax == 2 ? BcKind::Dirichlet : BcKind::Neumann;
            segs.push_back({kind, f, -1,
                            "face_ax" + std::to_string(ax) + (side ? "_hi" : "_lo")});
        }
    return Geometry(3, BoxShape{b}, std::move(segs));
}

std::vector<std::array<double, 2>> Geometry::load_polygon_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("geometry: cannot open polygon file " + path);
    std::vector<std::array<double, 2>> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double x, y;
        if (ss >> x >> y) pts.push_back({x, y});
    }
    if (pts.size() < 3) throw std::runtime_error("geometry: polygon file has fewer than 3 vertices");
    return pts;
}

// --- layout ------------------------------------------------------------------

namespace {

double region_measure(const Geometry& geom, const Box& cell, std::uint64_t tag) {
    const int d = geom.dim();
    if (std::holds_alternative<Geometry::BoxShape>(geom.shape()) ||
        std::holds_alternative<Geometry::PeriodicShape>(geom.shape()))
        return cell.volume(d);
    if (const auto* bb = std::get_if<Geometry::BoxMinusBox>(&geom.shape())) {
        double inner = 0;
        if (auto isect = cell.intersect(bb->inner, d)) inner = isect->volume(d);
        return cell.volume(d) - inner;
    }
    // polygon: Monte Carlo with a fixed derived stream, deterministic per cell
    rng::Stream rs(rng::derive(0xA11C0DE5ull, tag));
    const int n = 4096;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        Vec3 x{};
        for (int j = 0; j < d; ++j) x[j] = rs.uniform(cell.lo[j], cell.hi[j]);
        if (geom.contains(x)) ++hits;
    }
    return cell.volume(d) * hits / n;
}

bool face_touches_interior(const Geometry& geom, const AxisFace& f, int dim) {
    std::uint64_t coord_bits;
    std::memcpy(&coord_bits, &f.coord, sizeof coord_bits);
    rng::Stream rs(rng::derive(0xFACE5ull, static_cast<std::uint64_t>(f.axis), coord_bits));
    const int probes = dim == 3 ? 81 : 33;
    for (int i = 0; i < probes; ++i) {
        Vec3 x{};
        x[f.axis] = f.coord;
        for (int j = 0; j < dim; ++j)
            if (j != f.axis) x[j] = rs.uniform(f.bounds.lo[j], f.bounds.hi[j]);
        if (geom.contains(x)) return true;
    }
    return false;
}

}  // namespace

SubdomainLayout build_layout(const Geometry& geom, std::array<int, 3> grid,
                             double overlap_fraction) {
    const int d = geom.dim();
    for (int j = 0; j < d; ++j)
        if (grid[j] < 1) throw std::invalid_argument("layout: grid counts must be >= 1");
    for (int j = d; j < 3; ++j) grid[j] = 1;
    if (overlap_fraction <= 0 || overlap_fraction >= 0.5)
        throw std::invalid_argument("layout: overlap fraction must be in (0, 0.5)");

    SubdomainLayout lay;
    lay.dim = d;
    lay.grid = grid;
    lay.domain_bbox = geom.bbox();
    for (int j = 0; j < d; ++j) {
        lay.cell_width[j] = (lay.domain_bbox.hi[j] - lay.domain_bbox.lo[j]) / grid[j];
        lay.overlap[j] = overlap_fraction * lay.cell_width[j];
    }

    const int total = grid[0] * grid[1] * grid[2];
    lay.grid_to_cell.assign(static_cast<std::size_t>(total), -1);

    for (int k = 0; k < grid[2]; ++k)
        for (int jy = 0; jy < grid[1]; ++jy)
            for (int ix = 0; ix < grid[0]; ++ix) {
                const int flat = ix + grid[0] * (jy + grid[1] * k);
                SubdomainLayout::Cell cell;
                cell.gidx = {ix, jy, k};
                for (int a = 0; a < d; ++a) {
                    const int g = cell.gidx[a];
                    cell.owner.lo[a] = lay.domain_bbox.lo[a] + g * lay.cell_width[a];
                    cell.owner.hi[a] = g + 1 == grid[a]
                                           ? lay.domain_bbox.hi[a]
                                           : lay.domain_bbox.lo[a] + (g + 1) * lay.cell_width[a];
                    cell.extended.lo[a] =
                        std::max(lay.domain_bbox.lo[a], cell.owner.lo[a] - lay.overlap[a]);
                    cell.extended.hi[a] =
                        std::min(lay.domain_bbox.hi[a], cell.owner.hi[a] + lay.overlap[a]);
                }
                cell.owner_measure =
                    region_measure(geom, cell.owner, static_cast<std::uint64_t>(flat));
                if (cell.owner_measure <= 0) continue;  // empty after clipping: dropped
                cell.extended_measure = region_measure(
                    geom, cell.extended, static_cast<std::uint64_t>(flat) + 0x10000u);
                lay.grid_to_cell[static_cast<std::size_t>(flat)] =
                    static_cast<int>(lay.cells.size());
                lay.cells.push_back(std::move(cell));
            }

    if (lay.cells.empty()) throw std::runtime_error("layout: all cells empty after clipping");

    for (std::size_t i = 0; i < lay.cells.size(); ++i)
        for (std::size_t j = 0; j < lay.cells.size(); ++j) {
            if (i == j) continue;
            if (lay.cells[i].extended.intersect(lay.cells[j].owner, d))
                lay.cells[i].neighbors.push_back(static_cast<int>(j));
        }

    for (auto& cell : lay.cells)
        for (int a = 0; a < d; ++a)
            for (int side = 0; side < 2; ++side) {
                const double coord = side == 0 ? cell.extended.lo[a] : cell.extended.hi[a];
                if (coord <= lay.domain_bbox.lo[a] + 1e-14 ||
                    coord >= lay.domain_bbox.hi[a] - 1e-14)
                    continue;
                AxisFace f;
                f.axis = a;
                f.coord = coord;
                f.bounds = cell.extended;
                f.sign = side == 0 ? -1 : 1;
                if (!face_touches_interior(geom, f, d)) continue;
                cell.interfaces.push_back({f});
            }

    return lay;
}

int SubdomainLayout::owner_of(const Vec3& x) const {
    std::array<int, 3> gi{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        int idx = static_cast<int>(std::floor((x[a] - domain_bbox.lo[a]) / cell_width[a]));
        idx = std::clamp(idx, 0, grid[a] - 1);
        // tie on a shared face goes to the lower cell
        if (idx > 0 && x[a] == domain_bbox.lo[a] + idx * cell_width[a]) --idx;
        gi[a] = idx;
    }
    const int flat = gi[0] + grid[0] * (gi[1] + grid[1] * gi[2]);
    const int kept = grid_to_cell[static_cast<std::size_t>(flat)];
    if (kept >= 0) return kept;
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        double d2 = 0;
        for (int a = 0; a < dim; ++a) {
            const double cc = 0.5 * (cells[c].owner.lo[a] + cells[c].owner.hi[a]);
            d2 += sq(x[a] - cc);
        }
        if (d2 < best) { best = d2; arg = static_cast<int>(c); }
    }
    return arg;
}

}  // namespace pfnn2
