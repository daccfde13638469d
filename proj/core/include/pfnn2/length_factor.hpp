#pragma once

#include <memory>
#include <vector>

#include "pfnn2/dual.hpp"
#include "pfnn2/geometry.hpp"
#include "pfnn2/rng.hpp"
#include "pfnn2/types.hpp"

namespace pfnn2 {

// One essential boundary piece with its companion: l_j vanishes on the piece,
// equals one on the companion, and lies strictly between elsewhere. Built
// from the distance ratio d_j / (d_j + d_companion) pushed through a
// smoothstep profile, which satisfies those conditions on any shape that
// supports distance queries.
struct SegmentFactor {
    BoundarySegment segment;
    BoundarySegment companion;
};

// The factor that multiplies the free network: zero exactly on the essential
// data sets (initial slice and essential boundary pieces), positive
// elsewhere, normalized so its maximum over a fixed sample is one.
class LengthFactor {
  public:
    // Global-problem build: essential pieces are the geometry's Dirichlet
    // segments; companions honor explicit indices and are auto-selected
    // otherwise (farthest non-adjacent segment).
    static LengthFactor build(const Geometry& geom, double T,
                              double mu_override = 0.0);

    // Sub-domain build: essential pieces are the given local segments
    // (clipped Dirichlet pieces plus interface faces); companions are
    // auto-selected among all local segments.
    static LengthFactor build_local(int dim, std::vector<BoundarySegment> essential,
                                    std::vector<BoundarySegment> companions_pool,
                                    const Box& region, const Geometry& geom, double T,
                                    double mu_override = 0.0);

    double operator()(const Point& p) const;
    // Value plus derivative lanes (same layout as network input directions).
    Dual64 eval_dual(const Point& p, const LaneDesc& desc) const;

    int n_factors() const { return static_cast<int>(factors_.size()); }
    double mu() const { return mu_; }
    double normalization() const { return norm_; }
    double horizon() const { return T_; }

    double factor_value(int j, const Vec3& x) const;  // l_j(x)

  private:
    int dim_ = 1;
    double T_ = 0;  // 0 = steady (no time gate)
    double mu_ = 1;
    double norm_ = 1;
    std::vector<SegmentFactor> factors_;

    Dual64 raw_dual(const Point& p, const LaneDesc& desc) const;
    void normalize(const Geometry& geom, const Box* region, std::uint64_t tag);
};

// Pick the companion for `target`: the candidate maximizing the gap to the
// target, skipping adjacent candidates (segments that touch it).
int auto_companion(const BoundarySegment& target, std::span<const BoundarySegment> pool,
                   int dim, int self_index = -1);

}  // namespace pfnn2
