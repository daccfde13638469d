#pragma once

#include <functional>
#include <vector>

#include "pfnn2/geometry.hpp"
#include "pfnn2/rng.hpp"
#include "pfnn2/types.hpp"

namespace pfnn2 {

// Compactly supported hat product: a tent in every spatial axis (and in time
// for evolution problems), all sharing one half-width h.
struct TestFunction {
    Point center;
    double h = 0;
};

struct TestFunctionSet {
    std::vector<TestFunction> fns;
    double hbar = 0;  // common upper bound used by the radius rule
};

struct TestEval {
    double value = 0;
    Vec3 grad{0, 0, 0};  // spatial gradient only; time never appears differentiated
};

// Value and spatial gradient of the hat product. The gradient is the
// piecewise-constant slope times the remaining factors; at the kink planes
// (center and support edge) the convention is zero.
TestEval eval_test(const TestFunction& v, const Point& p, int dim, bool has_time);

struct TestSetSpec {
    int n_interior = 0;           // centers sampled in the region interior
    int n_neumann = 0;            // centers sampled on the natural boundary
    double T = 0;                 // 0 = steady
    double region_measure = 0;    // |Omega_i| entering the radius upper bound
    const Box* region = nullptr;  // nullptr = whole domain
};

// Radius rule: h = min over {Chebyshev distance to the essential pieces,
// t, T - t, hbar} with hbar = (|Omega| T / n_v)^(1/(d+1)); centers drawing a
// zero radius are resampled. Chebyshev distance guarantees the box support
// never touches the essential set, so every member vanishes there.
TestFunctionSet generate_test_set(const Geometry& geom, const TestSetSpec& spec,
                                  std::span<const BoundarySegment> essential,
                                  std::span<const BoundarySegment> neumann,
                                  rng::Stream& rs);

}  // namespace pfnn2
