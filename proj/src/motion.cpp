#include "fourbar/motion.hpp"

#include <cmath>

namespace fourbar {

namespace {

constexpr double kMmToM = 1e-3;
constexpr double kSecondDiffStep = 1e-4;  // rad; larger than kRateStep to control roundoff
constexpr double kMinRate = 1e-9;         // |dtheta/dpsi| below this counts as a fold

void stroke_shape(ProfileKind kind, double tau, double& s, double& sd, double& sdd) {
  switch (kind) {
    case ProfileKind::cubic:
      s = tau * tau * (3.0 - 2.0 * tau);
      sd = 6.0 * tau * (1.0 - tau);
      sdd = 6.0 - 12.0 * tau;
      break;
    case ProfileKind::quintic:
      s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
      sd = tau * tau * (30.0 + tau * (-60.0 + 30.0 * tau));
      sdd = tau * (60.0 + tau * (-180.0 + 120.0 * tau));
      break;
    case ProfileKind::cycloidal:
      s = tau - std::sin(2.0 * kPi * tau) / (2.0 * kPi);
      sd = 1.0 - std::cos(2.0 * kPi * tau);
      sdd = 2.0 * kPi * std::sin(2.0 * kPi * tau);
      break;
  }
}

// Pose-derived state packed for finite differencing:
// [0..5] link COM positions (m), [6..8] link angles (rad), [9..10] point B (m).
using GeomState = Eigen::Matrix<double, 11, 1>;

GeomState geom_state(const FourBarDesign& d, double psi) {
  const auto pose = pose_for_output(d, psi);
  if (!pose) throw NearSingularError("pose probe unassemblable at psi = " + std::to_string(psi));
  const Vec2 a = pose->a_pt * kMmToM;
  const Vec2 b = pose->b_pt * kMmToM;
  const Vec2 c = d.pivot_c * kMmToM;
  GeomState g;
  g.segment<2>(0) = 0.5 * a;        // OA midpoint
  g.segment<2>(2) = 0.5 * (a + b);  // AB midpoint
  g.segment<2>(4) = 0.5 * (c + b);  // BC midpoint
  g[6] = pose->theta;
  g[7] = std::atan2(b.y() - a.y(), b.x() - a.x());
  g[8] = wrap_angle(psi);
  g.segment<2>(9) = b;
  return g;
}

GeomState geom_diff(const FourBarDesign& d, double psi, double h) {
  GeomState hi = geom_state(d, psi + h);
  GeomState lo = geom_state(d, psi - h);
  GeomState r = hi - lo;
  for (int idx : {6, 7, 8}) r[idx] = wrap_angle(r[idx]);
  return r / (2.0 * h);
}

}  // namespace

ProfileTrace generate_profile(const MotionLaw& law) {
  const int n = law.n_samples;
  const double span = law.task.psi_e - law.task.psi_i;
  ProfileTrace out;
  out.t.resize(n);
  out.psi.resize(n);
  out.psi_dot.resize(n);
  out.psi_ddot.resize(n);
  out.forward_sign = span > 0.0 ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    const double tau = double(i) / double(n - 1);
    double s = 0.0, sd = 0.0, sdd = 0.0;
    stroke_shape(law.profile, tau, s, sd, sdd);
    out.t[i] = tau * law.period;
    out.psi[i] = law.task.psi_i + span * s;
    out.psi_dot[i] = span * sd / law.period;
    out.psi_ddot[i] = span * sdd / (law.period * law.period);
  }
  // pin the endpoints exactly
  out.psi[0] = law.task.psi_i;
  out.psi[n - 1] = law.task.psi_e;
  return out;
}

ProfileTrace generate_cycle(const MotionLaw& law) {
  ProfileTrace fwd = generate_profile(law);
  MotionLaw back = law;
  std::swap(back.task.psi_i, back.task.psi_e);
  ProfileTrace ret = generate_profile(back);

  const int n = law.n_samples;
  ProfileTrace out;
  out.t.resize(2 * n - 1);
  out.psi.resize(2 * n - 1);
  out.psi_dot.resize(2 * n - 1);
  out.psi_ddot.resize(2 * n - 1);
  out.forward_sign = fwd.forward_sign;
  out.t.head(n) = fwd.t;
  out.psi.head(n) = fwd.psi;
  out.psi_dot.head(n) = fwd.psi_dot;
  out.psi_ddot.head(n) = fwd.psi_ddot;
  out.t.tail(n - 1) = ret.t.tail(n - 1).array() + law.period;
  out.psi.tail(n - 1) = ret.psi.tail(n - 1);
  out.psi_dot.tail(n - 1) = ret.psi_dot.tail(n - 1);
  out.psi_ddot.tail(n - 1) = ret.psi_ddot.tail(n - 1);
  return out;
}

IkTrace inverse_kinematics_trace(const FourBarDesign& design, const ProfileTrace& motion) {
  const Eigen::Index n = motion.psi.size();
  IkTrace ik;
  ik.t = motion.t;
  ik.psi = motion.psi;
  ik.psi_dot = motion.psi_dot;
  ik.psi_ddot = motion.psi_ddot;
  ik.forward_sign = motion.forward_sign;
  ik.theta.resize(n);
  ik.theta_dot.resize(n);
  ik.theta_ddot.resize(n);
  ik.rate.resize(n);
  ik.rate_d.resize(n);

  for (Eigen::Index k = 0; k < n; ++k) {
    const double psi = motion.psi[k];
    const auto pose = pose_for_output(design, psi);
    if (!pose)
      throw BranchJumpError("unassemblable sample at psi = " + std::to_string(psi));
    double theta = pose->theta;
    ik.rate[k] = input_rate(design, psi);
    ik.rate_d[k] = (input_rate(design, psi + kSecondDiffStep) -
                    input_rate(design, psi - kSecondDiffStep)) /
                   (2.0 * kSecondDiffStep);
    if (k > 0) {
      const double step = wrap_angle(theta - ik.theta[k - 1]);
      const double dpsi = std::abs(psi - motion.psi[k - 1]);
      const double bound =
          10.0 * std::max(std::abs(ik.rate[k]), std::abs(ik.rate[k - 1])) * dpsi + 1e-12;
      if (std::abs(step) > bound)
        throw BranchJumpError("driver angle jumped " + std::to_string(step) + " rad over dpsi = " +
                              std::to_string(dpsi) + " (branch defect)");
      theta = ik.theta[k - 1] + step;  // continuous branch
    }
    ik.theta[k] = theta;
    ik.theta_dot[k] = ik.rate[k] * motion.psi_dot[k];
    ik.theta_ddot[k] = ik.rate_d[k] * motion.psi_dot[k] * motion.psi_dot[k] +
                       ik.rate[k] * motion.psi_ddot[k];
  }
  return ik;
}

TorqueTrace inverse_dynamics_torque(const FourBarDesign& design, const MassModel& mass,
                                    const IkTrace& ik) {
  const Eigen::Index n = ik.psi.size();
  TorqueTrace out;
  out.t = ik.t;
  out.theta = ik.theta;
  out.theta_dot = ik.theta_dot;
  out.theta_ddot = ik.theta_ddot;
  out.torque.resize(n);

  const double len[3] = {design.oa_len * kMmToM, design.ab_len * kMmToM, design.bc_len * kMmToM};
  double m[3], inertia[3];
  for (int i = 0; i < 3; ++i) {
    m[i] = mass.link_density[i] * len[i];
    inertia[i] = m[i] * len[i] * len[i] / 12.0;  // slender rod about COM
  }
  const double me = mass.end_effector_mass;
  const Vec2 g = mass.gravity;

  for (Eigen::Index k = 0; k < n; ++k) {
    const double psi = ik.psi[k];
    const double pd = ik.psi_dot[k];
    const double pdd = ik.psi_ddot[k];
    const double r = ik.rate[k];
    if (std::abs(r) < kMinRate)
      throw NearSingularError("|dpsi/dtheta| unbounded at psi = " + std::to_string(psi));

    const GeomState d1 = geom_diff(design, psi, kRateStep);
    const GeomState d2 = (geom_diff(design, psi + kSecondDiffStep, kRateStep) -
                          geom_diff(design, psi - kSecondDiffStep, kRateStep)) /
                         (2.0 * kSecondDiffStep);

    double tau = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Vec2 vel1 = d1.segment<2>(2 * i);
      const Vec2 acc = vel1 * pdd + d2.segment<2>(2 * i) * pd * pd;
      const Vec2 J = vel1 / r;  // COM sensitivity to theta
      const double alpha = d1[6 + i] * pdd + d2[6 + i] * pd * pd;
      const double j = d1[6 + i] / r;
      tau += m[i] * acc.dot(J) + inertia[i] * alpha * j;
      tau -= m[i] * g.dot(J);
    }
    if (me > 0.0) {
      const Vec2 vB1 = d1.segment<2>(9);
      const Vec2 aB = vB1 * pdd + d2.segment<2>(9) * pd * pd;
      const Vec2 JB = vB1 / r;
      tau += me * aB.dot(JB);
      tau -= me * g.dot(JB);
    }
    if (mass.joint_damping > 0.0) {
      const double j_ab = d1[7] / r;
      const double j_bc = d1[8] / r;
      const double s_sum = 1.0 + (j_ab - 1.0) * (j_ab - 1.0) +
                           (j_bc - j_ab) * (j_bc - j_ab) + j_bc * j_bc;
      tau += mass.joint_damping * ik.theta_dot[k] * s_sum;
    }
    if (mass.external_load_torque != 0.0 && pd * ik.forward_sign > 0.0)
      tau += mass.external_load_torque * ik.forward_sign / r;
    out.torque[k] = tau;
  }
  return out;
}

double rms_torque(const TorqueTrace& trace) {
  return std::sqrt(trace.torque.squaredNorm() / double(trace.torque.size()));
}

double max_torque(const TorqueTrace& trace) {
  return trace.torque.cwiseAbs().maxCoeff();
}

SimOutcome sample_objective(const FourBarDesign& design, const PtpTask& task,
                            const MotionLaw& law, const MassModel& mass) {
  SimOutcome res;
  const FeasibilityReport rep = classify(design, task);
  if (!rep.static_i || !rep.static_e) {
    res.reason = std::string("static-infeasible at psi_") + (!rep.static_i ? "i" : "e");
    return res;
  }
  if (!rep.dynamic_ok) {
    res.reason = "dynamic-infeasible";
    if (!rep.note.empty()) res.reason += ": " + rep.note;
    return res;
  }
  MotionLaw cycle_law = law;
  cycle_law.task = task;
  try {
    const ProfileTrace cycle = generate_cycle(cycle_law);
    const IkTrace ik = inverse_kinematics_trace(design, cycle);
    const TorqueTrace trace = inverse_dynamics_torque(design, mass, ik);
    res.ok = true;
    res.t_rms = rms_torque(trace);
    res.t_max = max_torque(trace);
  } catch (const Error& e) {
    res.reason = e.what();
  }
  return res;
}

}  // namespace fourbar
