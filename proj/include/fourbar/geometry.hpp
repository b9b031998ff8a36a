#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <utility>

#include "fourbar/errors.hpp"

namespace fourbar {

template <class S>
using Vec2T = Eigen::Matrix<S, 2, 1>;
template <class S>
using Vec3T = Eigen::Matrix<S, 3, 1>;
using Vec2 = Vec2T<double>;
using Vec3 = Vec3T<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Wraps an angle to the interval (-pi, pi].
template <class S>
S wrap_angle(S a) {
  S x = std::remainder(a, S(2) * S(kPi));
  if (x <= S(-kPi)) x += S(2) * S(kPi);
  return x;
}

enum class Elbow { up, down };

// The three free link lengths plus the fixed frame data. O is the driven
// ground pivot at the origin; C is the other ground pivot.
template <class S>
struct FourBarDesignT {
  S oa_len;  // input link |OA|, mm
  S ab_len;  // coupler |AB|, mm
  S bc_len;  // output link |BC|, mm
  Vec2T<S> pivot_c;
  Elbow elbow = Elbow::up;

  bool valid() const {
    return oa_len > S(0) && ab_len > S(0) && bc_len > S(0) &&
           (pivot_c.x() != S(0) || pivot_c.y() != S(0));
  }
};
using FourBarDesign = FourBarDesignT<double>;

// Conversion between the end-effector beam angle delta and the output link
// angle psi: the beam of length b is driven through a fixed offset k.
template <class S>
struct EndEffectorMapT {
  S k;  // fixed offset, mm
  S b;  // output beam length, mm

  bool valid() const { return b > S(0) && std::abs(k) <= b; }
};
using EndEffectorMap = EndEffectorMapT<double>;

template <class S>
struct LinkagePoseT {
  S theta;         // input link angle vs x-axis
  S psi;           // output link angle vs x-axis
  Vec2T<S> a_pt;   // moving pivot on the input link
  Vec2T<S> b_pt;   // moving pivot on the output link
  bool degenerate = false;  // set when the two assembly branches coincide
};
using LinkagePose = LinkagePoseT<double>;

// psi = asin( sin(delta) (k/tan(delta) + sqrt(b^2-k^2)) / b ), evaluated in
// the algebraically equivalent form (k cos(delta) + sqrt(b^2-k^2) sin(delta))/b
// which stays finite at tan(delta) = 0.
template <class S>
S end_effector_to_output(S delta, const EndEffectorMapT<S>& map) {
  if (!map.valid()) throw DomainError("end-effector map invalid: need b > 0 and |k| <= b");
  const S root = std::sqrt(map.b * map.b - map.k * map.k);
  const S arg = (map.k * std::cos(delta) + root * std::sin(delta)) / map.b;
  if (!(arg >= S(-1) && arg <= S(1)))
    throw DomainError("end-effector conversion: arcsine argument " + std::to_string(double(arg)) +
                      " outside [-1, 1]");
  return std::asin(arg);
}

// Coefficients of U cos(theta) + V sin(theta) + W = 0, the loop-closure
// constraint |B - A|^2 = |AB|^2 reduced to the input angle.
template <class S>
struct AngleEquation {
  S u, v, w;
  S radius() const { return std::hypot(u, v); }
};

template <class S>
AngleEquation<S> angle_equation(const FourBarDesignT<S>& d, S psi) {
  const S xc = d.pivot_c.x(), yc = d.pivot_c.y();
  const S cp = std::cos(psi), sp = std::sin(psi);
  AngleEquation<S> eq;
  eq.u = S(-2) * xc * d.oa_len - S(2) * d.oa_len * d.bc_len * cp;
  eq.v = S(-2) * yc * d.oa_len - S(2) * d.oa_len * d.bc_len * sp;
  eq.w = xc * xc + yc * yc + d.oa_len * d.oa_len + d.bc_len * d.bc_len - d.ab_len * d.ab_len +
         S(2) * xc * d.bc_len * cp + S(2) * yc * d.bc_len * sp;
  return eq;
}

// Both input-angle roots for the given output angle, normalized to (-pi, pi].
// First element is the branch obtained by subtracting the arccos term.
// Empty when the linkage cannot be assembled at this psi.
template <class S>
std::optional<std::pair<S, S>> output_to_input_angles(const FourBarDesignT<S>& d, S psi) {
  if (!std::isfinite(psi) || !std::isfinite(d.oa_len) || !std::isfinite(d.ab_len) ||
      !std::isfinite(d.bc_len) || !d.pivot_c.allFinite())
    return std::nullopt;
  const AngleEquation<S> eq = angle_equation(d, psi);
  const S r = eq.radius();
  const S arg = eq.w / r;
  if (!(arg >= S(-1) && arg <= S(1))) return std::nullopt;
  const S base = std::atan2(eq.v, eq.u) + S(kPi);
  const S phi = std::acos(arg);
  return std::make_pair(wrap_angle(base - phi), wrap_angle(base + phi));
}

template <class S>
Vec2T<S> input_pivot_point(const FourBarDesignT<S>& d, S theta) {
  return d.oa_len * Vec2T<S>(std::cos(theta), std::sin(theta));
}

template <class S>
Vec2T<S> output_pivot_point(const FourBarDesignT<S>& d, S psi) {
  return d.pivot_c + d.bc_len * Vec2T<S>(std::cos(psi), std::sin(psi));
}

// Full pose for the design's elbow tag. Elbow-up is the branch with A on the
// positive side of diagonal OB (cross(O->B, O->A) > 0). When the branches
// coincide (fold configuration, A on the line OB) the unique boundary pose is
// returned with the degenerate flag set.
template <class S>
std::optional<LinkagePoseT<S>> pose_for_output(const FourBarDesignT<S>& d, S psi) {
  const auto roots = output_to_input_angles(d, psi);
  if (!roots) return std::nullopt;
  const Vec2T<S> b = output_pivot_point(d, psi);

  const auto make_pose = [&](S theta, bool degen) {
    LinkagePoseT<S> pose;
    pose.theta = theta;
    pose.psi = wrap_angle(psi);
    pose.a_pt = input_pivot_point(d, theta);
    pose.b_pt = b;
    pose.degenerate = degen;
    return pose;
  };

  if (roots->first == roots->second) return make_pose(roots->first, true);

  const Vec2T<S> a1 = input_pivot_point(d, roots->first);
  const S cross1 = b.x() * a1.y() - b.y() * a1.x();
  const bool first_is_up = cross1 > S(0);
  const S theta = (d.elbow == Elbow::up) == first_is_up ? roots->first : roots->second;
  return make_pose(theta, false);
}

}  // namespace fourbar
