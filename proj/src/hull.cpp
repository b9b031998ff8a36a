#include "fourbar/hull.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fourbar/errors.hpp"

namespace fourbar {

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) { return a.x() == b.x() && a.y() == b.y(); }),
               points.end());
  const size_t n = points.size();
  if (n <= 2) return points;

  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper chain
    while (k >= t && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_hull(const std::vector<Vec2>& hull, const Vec2& p, double tol) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return (p - hull[0]).norm() <= tol;
  if (hull.size() == 2) {
    const Vec2 d = hull[1] - hull[0];
    const double len2 = d.squaredNorm();
    const double t = std::clamp(d.dot(p - hull[0]) / len2, 0.0, 1.0);
    return (p - (hull[0] + t * d)).norm() <= tol;
  }
  for (size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    if (cross2(a, b, p) < -tol) return false;
  }
  return true;
}

double TrustRegion::hull_area() const {
  double a = 0.0;
  for (size_t i = 0; i < hull.size(); ++i) {
    const Vec2& u = hull[i];
    const Vec2& v = hull[(i + 1) % hull.size()];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * a;
}

TrustRegion make_trust_region(const BlendedModel& model) {
  TrustRegion region;
  region.anchors = model.anchors;
  region.delta = model.plan.delta;
  region.origin_shift = model.plan.origin_shift;
  region.which_pair = model.which_pair;

  std::vector<Vec2> pts;
  pts.reserve(model.anchors.rows());
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i)
    pts.emplace_back(model.anchors(i, 0), model.anchors(i, 1));
  region.hull = convex_hull(pts);

  region.p_min = model.anchor_p.minCoeff();
  region.p_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.plan.lines(); ++i)
    region.p_max = std::max(region.p_max, model.anchor_p[i] + model.plan.counts[i] - 1);
  return region;
}

bool hull_membership(const TrustRegion& region, const Vec3& u, double tol) {
  const Vec3 x = u - region.origin_shift;
  const double p = normal_projection(region.delta, x).first;
  if (p < region.p_min - tol || p > region.p_max + tol) return false;
  return point_in_hull(region.hull, line_coordinates(region.delta, x, region.which_pair), tol);
}

std::pair<Vec3, Vec3> trust_region_bounds(const TrustRegion& region) {
  // invert (p_line, q_line, p) -> X for every hull-vertex x p-extreme corner
  Eigen::Matrix3d m;
  m.topRows<2>() = char_pair_forms(region.delta, region.which_pair);
  m.row(2) = region.delta.transpose() / region.delta.squaredNorm();
  const Eigen::Matrix3d inv = m.inverse();

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec2& v : region.hull) {
    for (double p : {region.p_min, region.p_max}) {
      const Vec3 x = inv * Vec3(v.x(), v.y(), p);
      const Vec3 u = x + region.origin_shift;
      lo = lo.cwiseMin(u);
      hi = hi.cwiseMax(u);
    }
  }
  return {lo, hi};
}

}  // namespace fourbar
