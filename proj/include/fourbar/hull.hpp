#pragma once

#include <Eigen/Core>
#include <vector>

#include "fourbar/blended.hpp"

namespace fourbar {

// Andrew monotone-chain convex hull; returns CCW vertices without the
// closing repeat. Collinear inputs collapse to their extreme segment.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

// Inside-or-on test against a CCW hull (degenerate hulls of one or two
// vertices are treated as point / segment).
bool point_in_hull(const std::vector<Vec2>& hull, const Vec2& p, double tol = 1e-9);

// Region of design space where the blended model is trusted: the prism over
// the anchor hull in the normal plane, bounded along the sampling direction
// by the sampled parameter range.
struct TrustRegion {
  Eigen::MatrixX2d anchors;   // (p_line, q_line) per line
  std::vector<Vec2> hull;     // CCW
  double p_min = 0.0;
  double p_max = 0.0;
  // frame needed to map a design point into hull coordinates
  Vec3 delta = Vec3::Zero();
  Vec3 origin_shift = Vec3::Zero();
  CharPair which_pair = CharPair::c12;

  double hull_area() const;
};

TrustRegion make_trust_region(const BlendedModel& model);

bool hull_membership(const TrustRegion& region, const Vec3& u, double tol = 1e-9);

// Axis-aligned bounding box of the trust-region prism in design space.
std::pair<Vec3, Vec3> trust_region_bounds(const TrustRegion& region);

}  // namespace fourbar
