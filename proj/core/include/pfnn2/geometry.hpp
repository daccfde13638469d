#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pfnn2/dual.hpp"
#include "pfnn2/rng.hpp"
#include "pfnn2/types.hpp"

namespace pfnn2 {

using Vec3 = std::array<double, 3>;

struct Box {
    Vec3 lo{0, 0, 0};
    Vec3 hi{0, 0, 0};

    bool contains(const Vec3& x, int dim) const {
        for (int j = 0; j < dim; ++j)
            if (x[j] < lo[j] || x[j] > hi[j]) return false;
        return true;
    }
    bool contains_strict(const Vec3& x, int dim) const {
        for (int j = 0; j < dim; ++j)
            if (x[j] <= lo[j] || x[j] >= hi[j]) return false;
        return true;
    }
    double volume(int dim) const {
        double v = 1;
        for (int j = 0; j < dim; ++j) v *= hi[j] - lo[j];
        return v;
    }
    std::optional<Box> intersect(const Box& o, int dim) const {
        Box r;
        for (int j = 0; j < dim; ++j) {
            r.lo[j] = std::max(lo[j], o.lo[j]);
            r.hi[j] = std::min(hi[j], o.hi[j]);
            if (r.lo[j] >= r.hi[j]) return std::nullopt;
        }
        return r;
    }
};

enum class BcKind { Dirichlet, Neumann };

// Axis-aligned boundary piece. In 1D a face is a point, in 2D a segment, in
// 3D a rectangle. Coordinates on `axis` equal `coord` exactly, so distance
// queries for on-face points return an exact zero.
struct AxisFace {
    int axis = 0;
    double coord = 0;
    Box bounds;       // extent along the other axes (axis entry ignored)
    double sign = 1;  // outward normal = sign * e_axis
};

// Open polyline (chain of 2D vertices) lying on a polygon boundary.
struct Polyline {
    std::vector<std::array<double, 2>> pts;
    double outward = 1;  // +1: outward normal is the CCW right-hand normal
};

struct BoundarySegment {
    BcKind kind = BcKind::Dirichlet;
    std::variant<AxisFace, Polyline> support;
    int companion = -1;  // index of companion segment; -1 = auto-select
    std::string label;
};

struct BoundarySample {
    Point p;
    Vec3 normal{0, 0, 0};
    int segment = -1;
};

// Segment-level queries; usable both for a geometry's own segments and for
// subdomain-local clipped segments.
double segment_measure(const BoundarySegment& seg, int dim);
double segment_distance(const BoundarySegment& seg, int dim, const Vec3& x);
double segment_cheb_distance(const BoundarySegment& seg, int dim, const Vec3& x);
Dual64 segment_distance_dual(const BoundarySegment& seg, int dim, const Dual64* x);
double segment_gap(const BoundarySegment& a, const BoundarySegment& b, int dim);
std::vector<BoundarySample> sample_on_segment(const BoundarySegment& seg, int dim, int n,
                                              double T, rng::Stream& rs);
// Restrict a segment to a box; polylines may split into several pieces.
std::vector<BoundarySegment> clip_segment_to_box(const BoundarySegment& seg, int dim,
                                                 const Box& box);

// Computing domain with a segmented boundary. Shapes cover the benchmark
// geometries: boxes, box-minus-box (L-shape), simple polygons, periodic
// boxes (no boundary segments at all).
class Geometry {
  public:
    struct BoxShape { Box box; };
    struct BoxMinusBox { Box outer; Box inner; };
    struct PolygonShape { std::vector<std::array<double, 2>> vertices; };  // CCW
    struct PeriodicShape { Box box; };

    using Shape = std::variant<BoxShape, BoxMinusBox, PolygonShape, PeriodicShape>;

    Geometry(int dim, Shape shape, std::vector<BoundarySegment> segments);

    int dim() const { return dim_; }
    const Shape& shape() const { return shape_; }
    bool periodic() const { return std::holds_alternative<PeriodicShape>(shape_); }
    const Box& bbox() const { return bbox_; }
    double volume() const { return volume_; }

    bool contains(const Vec3& x) const;
    bool contains(const Point& p) const { return contains(p.x); }

    const std::vector<BoundarySegment>& segments() const { return segments_; }
    double segment_length(int i) const;  // measure of the piece (length/area)
    double boundary_measure(BcKind kind) const;
    bool has_dirichlet() const;

    // Exact Euclidean distance to one segment / to the whole Dirichlet set
    // (+inf when there is none, e.g. periodic domains).
    double distance_to_segment(const Vec3& x, int seg) const;
    double distance_to_dirichlet(const Vec3& x) const;

    // Chebyshev (max-norm) set distance; a hat support of half-width h
    // centered at x avoids the segment iff h <= this.
    double cheb_distance_to_segment(const Vec3& x, int seg) const;

    // Distance with first-derivative lanes for length-factor evaluation.
    Dual64 distance_to_segment_dual(const Dual64* x, int seg) const;

    // Minimum distance between two segment supports (adjacency test).
    double segment_gap(int i, int j) const;

    // n points uniform over Omega x (0,T]; T = 0 keeps t = 0 (steady).
    // Rejection sampling inside the bounding box; throws if the acceptance
    // rate drops below 1%.
    std::vector<Point> sample_interior(int n, double T, rng::Stream& rs) const;

    std::vector<BoundarySample> sample_segment(int seg, int n, double T,
                                               rng::Stream& rs) const;
    // Uniform over all segments of `kind`, proportional to their measure.
    std::vector<BoundarySample> sample_boundary(BcKind kind, int n, double T,
                                                rng::Stream& rs) const;

    // Ready-made benchmark domains.
    static Geometry unit_box(int dim);
    static Geometry interval(double a, double b);                   // 1D, two Dirichlet endpoints
    static Geometry lshape();                                        // [-2,2]^2 \ [0,2]^2
    static Geometry periodic_box(int dim, double lo, double hi);
    static Geometry polygon(std::vector<std::array<double, 2>> vertices,
                            int n_dirichlet_arcs);
    static Geometry box_burgers3d();                                 // [0,1]^3, Dirichlet z-faces

    static std::vector<std::array<double, 2>> load_polygon_file(const std::string& path);

  private:
    int dim_;
    Shape shape_;
    std::vector<BoundarySegment> segments_;
    Box bbox_;
    double volume_;

    void compute_bbox_volume();
};

// Overlapping decomposition: a tensor grid of owner cells clipped to the
// domain, each extended by an overlap margin. Interfaces are the parts of an
// extended cell's boundary that cut through the domain interior.
struct SubdomainLayout {
    struct InterfaceFace {
        AxisFace face;  // sign points out of the extended cell
    };
    struct Cell {
        std::array<int, 3> gidx{0, 0, 0};
        Box owner;
        Box extended;
        double owner_measure = 0;
        double extended_measure = 0;
        std::vector<int> neighbors;           // kept-cell indices
        std::vector<InterfaceFace> interfaces;
    };

    int dim = 1;
    std::array<int, 3> grid{1, 1, 1};
    Box domain_bbox;
    std::array<double, 3> cell_width{0, 0, 0};
    std::array<double, 3> overlap{0, 0, 0};
    std::vector<Cell> cells;
    std::vector<int> grid_to_cell;  // flat grid index -> kept index or -1

    int size() const { return static_cast<int>(cells.size()); }

    // Owner routing: half-open cells, ties on shared faces go to the lower
    // index; points in dropped cells fall back to the nearest kept owner.
    int owner_of(const Vec3& x) const;
};

SubdomainLayout build_layout(const Geometry& geom, std::array<int, 3> grid,
                             double overlap_fraction);

}  // namespace pfnn2
