#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "fourbar/geometry.hpp"

namespace fourbar {

// A rest-to-rest move of the output link between two prescribed angles.
template <class S>
struct PtpTaskT {
  S psi_i;
  S psi_e;

  bool valid() const {
    return psi_i != psi_e && psi_i > S(-kPi) && psi_i <= S(kPi) && psi_e > S(-kPi) &&
           psi_e <= S(kPi);
  }
};
using PtpTask = PtpTaskT<double>;

template <class S>
struct FeasibilityReportT {
  bool static_i = false;
  bool static_e = false;
  bool dynamic_ok = false;
  S margin_i = std::numeric_limits<S>::quiet_NaN();  // mm^4
  S margin_e = std::numeric_limits<S>::quiet_NaN();  // mm^4
  S rate_i = std::numeric_limits<S>::quiet_NaN();    // dtheta/dpsi
  S rate_e = std::numeric_limits<S>::quiet_NaN();
  std::string note;  // explanation when a rate probe failed

  bool feasible() const { return static_i && static_e && dynamic_ok; }
};
using FeasibilityReport = FeasibilityReportT<double>;

// Discriminant U^2 + V^2 - W^2 of the loop-closure equation; nonnegative
// exactly when the linkage assembles at this output angle. Units mm^4.
template <class S>
S static_margin(const FourBarDesignT<S>& d, S psi) {
  const AngleEquation<S> eq = angle_equation(d, psi);
  return eq.u * eq.u + eq.v * eq.v - eq.w * eq.w;
}

// Strict positivity at both endpoints: zero-margin (fold) configurations are
// treated as infeasible because they are singular for the dynamics.
template <class S>
bool is_static_feasible(const FourBarDesignT<S>& d, const PtpTaskT<S>& task) {
  return static_margin(d, task.psi_i) > S(0) && static_margin(d, task.psi_e) > S(0);
}

inline constexpr double kRateStep = 1e-6;        // rad, central-difference step
inline constexpr double kSingularMargin = 1e-12; // mm^4, below this the rate is unreliable

// dtheta/dpsi on the elbow-selected branch by central differences, with
// 2pi-unwrapping between the two probes.
template <class S>
S input_rate(const FourBarDesignT<S>& d, S psi) {
  const S h = S(kRateStep);
  const S probes[2] = {psi - h, psi + h};
  S theta[2];
  for (int i = 0; i < 2; ++i) {
    if (static_margin(d, probes[i]) < S(kSingularMargin))
      throw NearSingularError("margin below threshold at psi = " + std::to_string(double(probes[i])));
    const auto pose = pose_for_output(d, probes[i]);
    if (!pose)
      throw NearSingularError("unassemblable probe at psi = " + std::to_string(double(probes[i])));
    theta[i] = pose->theta;
  }
  return wrap_angle(theta[1] - theta[0]) / (S(2) * h);
}

// Sign condition on dtheta/dpsi at the two task endpoints; equal nonzero
// signs exclude branch and circuit defects for the monotone output sweep.
template <class S>
bool is_dynamic_feasible(const FourBarDesignT<S>& d, const PtpTaskT<S>& task) {
  try {
    const S ri = input_rate(d, task.psi_i);
    const S re = input_rate(d, task.psi_e);
    return ri * re > S(0);
  } catch (const NearSingularError&) {
    return false;
  }
}

template <class S>
FeasibilityReportT<S> classify(const FourBarDesignT<S>& d, const PtpTaskT<S>& task) {
  FeasibilityReportT<S> rep;
  rep.margin_i = static_margin(d, task.psi_i);
  rep.margin_e = static_margin(d, task.psi_e);
  rep.static_i = rep.margin_i > S(0);
  rep.static_e = rep.margin_e > S(0);
  if (!rep.static_i || !rep.static_e) return rep;  // dynamic test undefined without assembly
  try {
    rep.rate_i = input_rate(d, task.psi_i);
    rep.rate_e = input_rate(d, task.psi_e);
    rep.dynamic_ok = rep.rate_i * rep.rate_e > S(0);
  } catch (const NearSingularError& e) {
    rep.dynamic_ok = false;
    rep.note = e.what();
  }
  return rep;
}

}  // namespace fourbar
