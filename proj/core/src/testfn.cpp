#include "pfnn2/testfn.hpp"

#include <cmath>
#include <stdexcept>

namespace pfnn2 {

TestEval eval_test(const TestFunction& v, const Point& p, int dim, bool has_time) {
    TestEval out;
    const double h = v.h;
    double factors[4];
    double slopes[4];
    int n = 0;
    for (int j = 0; j < dim; ++j) {
        const double d = p.x[j] - v.center.x[j];
        const double u = 1.0 - std::abs(d) / h;
        if (u <= 0.0) return out;  // outside the support: value 0, gradient 0
        factors[n] = u;
        slopes[n] = d > 0 ? -1.0 / h : (d < 0 ? 1.0 / h : 0.0);
        ++n;
    }
    double tfac = 1.0;
    if (has_time) {
        const double dt = p.t - v.center.t;
        tfac = 1.0 - std::abs(dt) / h;
        if (tfac <= 0.0) return out;
    }
    double prod = tfac;
    for (int j = 0; j < n; ++j) prod *= factors[j];
    out.value = prod;
    for (int j = 0; j < dim; ++j) {
        double g = slopes[j] * tfac;
        for (int k = 0; k < n; ++k)
            if (k != j) g *= factors[k];
        out.grad[j] = g;
    }
    return out;
}

TestFunctionSet generate_test_set(const Geometry& geom, const TestSetSpec& spec,
                                  std::span<const BoundarySegment> essential,
                                  std::span<const BoundarySegment> neumann,
                                  rng::Stream& rs) {
    const int n_v = spec.n_interior + spec.n_neumann;
    if (n_v < 1) throw std::invalid_argument("testfn: need at least one test function");
    const int dim = geom.dim();
    const bool has_time = spec.T > 0;
    const double measure = spec.region_measure > 0 ? spec.region_measure : geom.volume();
    const double st_measure = has_time ? measure * spec.T : measure;
    TestFunctionSet set;
    set.hbar = std::pow(st_measure / n_v, 1.0 / (dim + (has_time ? 1 : 0)));

    const Box box = spec.region ? *spec.region : geom.bbox();

    auto ess_cheb = [&](const Vec3& x) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& seg : essential) d = std::min(d, segment_cheb_distance(seg, dim, x));
        return d;
    };

    auto radius = [&](const Point& c) {
        double h = std::min(set.hbar, ess_cheb(c.x));
        if (has_time) h = std::min({h, c.t, spec.T - c.t});
        return h;
    };

    // Neumann centers are drawn per segment proportionally to its measure.
    std::vector<double> ncum{0.0};
    for (const auto& seg : neumann) ncum.push_back(ncum.back() + segment_measure(seg, dim));

    set.fns.reserve(static_cast<std::size_t>(n_v));
    int zero_streak = 0;
    for (int i = 0; i < n_v;) {
        Point c;
        const bool on_neumann = i >= spec.n_interior && !neumann.empty() && ncum.back() > 0;
        if (on_neumann) {
            const double a = rs.u01() * ncum.back();
            std::size_t k = 0;
            while (k + 2 < ncum.size() && a >= ncum[k + 1]) ++k;
            auto s = sample_on_segment(neumann[k], dim, 1, 0.0, rs);
            c = s[0].p;
        } else {
            bool ok = false;
            for (int tries = 0; tries < 10000 && !ok; ++tries) {
                for (int j = 0; j < dim; ++j) c.x[j] = rs.uniform(box.lo[j], box.hi[j]);
                ok = geom.contains(c.x);
            }
            if (!ok)
                throw std::runtime_error("testfn: could not sample interior centers in region");
        }
        if (has_time) c.t = spec.T * rs.u01();

        const double h = radius(c);
        if (h <= 0.0) {
            if (++zero_streak > 100)
                throw std::runtime_error(
                    "testfn: repeated zero-radius centers; essential boundary covers the "
                    "sampling region");
            continue;  // resample
        }
        zero_streak = 0;
        set.fns.push_back(TestFunction{c, h});
        ++i;
    }
    return set;
}

}  // namespace pfnn2
