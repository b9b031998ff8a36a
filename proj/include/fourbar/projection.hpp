#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <utility>

#include "fourbar/errors.hpp"
#include "fourbar/geometry.hpp"

namespace fourbar {

// Signed position of U along delta (in multiples of |delta|^... of delta
// itself) and the intersection R of the normal plane through U with the
// direction line: U = p*delta + R with <delta, R> = 0.
template <class S>
std::pair<S, Vec3T<S>> normal_projection(const Vec3T<S>& delta, const Vec3T<S>& u) {
  const S p = delta.dot(u) / delta.squaredNorm();
  return {p, u - p * delta};
}

// The three linear forms that are constant on every line parallel to delta:
//   c1 = delta_v u - delta_u v, c2 = delta_w u - delta_u w, c3 = delta_w v - delta_v w.
// Any independent pair characterizes the line.
enum class CharPair { c12, c13, c23 };

inline const char* char_pair_name(CharPair p) {
  switch (p) {
    case CharPair::c12: return "c12";
    case CharPair::c13: return "c13";
    default: return "c23";
  }
}

template <class S>
Eigen::Matrix<S, 2, 3> char_pair_forms(const Vec3T<S>& delta, CharPair pair) {
  const Vec3T<S> c1(delta.y(), -delta.x(), S(0));
  const Vec3T<S> c2(delta.z(), S(0), -delta.x());
  const Vec3T<S> c3(S(0), delta.z(), -delta.y());
  Eigen::Matrix<S, 2, 3> forms;
  switch (pair) {
    case CharPair::c12: forms.row(0) = c1; forms.row(1) = c2; break;
    case CharPair::c13: forms.row(0) = c1; forms.row(1) = c3; break;
    case CharPair::c23: forms.row(0) = c2; forms.row(1) = c3; break;
  }
  return forms;
}

// Picks an independent pair, preferring the first (c1, c2) and falling back
// by largest normalized cross product when that pair degenerates (which
// happens exactly when delta_u = 0).
template <class S>
CharPair select_char_pair(const Vec3T<S>& delta) {
  const Vec3T<S> c1(delta.y(), -delta.x(), S(0));
  const Vec3T<S> c2(delta.z(), S(0), -delta.x());
  const Vec3T<S> c3(S(0), delta.z(), -delta.y());
  const auto indep = [](const Vec3T<S>& a, const Vec3T<S>& b) -> S {
    const S denom = a.norm() * b.norm();
    return denom > S(0) ? a.cross(b).norm() / denom : S(0);
  };
  const S s12 = indep(c1, c2), s13 = indep(c1, c3), s23 = indep(c2, c3);
  const S tol = S(1e-9);
  if (s12 > tol) return CharPair::c12;
  if (s13 < tol && s23 < tol)
    throw DegeneratePairError("all line-characteristic pairs dependent for this direction");
  return s23 >= s13 ? CharPair::c23 : CharPair::c13;
}

template <class S>
Vec2T<S> line_coordinates(const Vec3T<S>& delta, const Vec3T<S>& u, CharPair pair) {
  return char_pair_forms(delta, pair) * u;
}

}  // namespace fourbar
