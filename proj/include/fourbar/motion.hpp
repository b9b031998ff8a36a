#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>

#include "fourbar/feasibility.hpp"
#include "fourbar/geometry.hpp"

namespace fourbar {

enum class ProfileKind { cubic, quintic, cycloidal };

// One rest-to-rest stroke of the output link.
struct MotionLaw {
  PtpTask task;
  double period;  // s
  ProfileKind profile = ProfileKind::quintic;
  int n_samples = 501;

  bool valid() const { return task.valid() && period > 0.0 && n_samples >= 64; }
};

// Surrogate inertial model: uniform slender rods plus a lumped end-effector
// mass at joint B. Densities in kg/m, damping per revolute joint.
struct MassModel {
  std::array<double, 3> link_density = {0.8, 0.8, 0.8};  // OA, AB, BC
  double end_effector_mass = 0.0;                        // kg, at B
  Vec2 gravity = Vec2(0.0, -9.81);                       // m/s^2
  double joint_damping = 0.0;                            // N m s/rad, each joint
  double external_load_torque = 0.0;  // N m on BC, resisting the forward stroke

  bool valid() const {
    return link_density[0] >= 0 && link_density[1] >= 0 && link_density[2] >= 0 &&
           end_effector_mass >= 0 && joint_damping >= 0 && gravity.allFinite();
  }
};

// Time-sampled output motion with derivatives.
struct ProfileTrace {
  Eigen::VectorXd t;
  Eigen::VectorXd psi;
  Eigen::VectorXd psi_dot;
  Eigen::VectorXd psi_ddot;
  double forward_sign = 1.0;  // sign of psi_e - psi_i for the opening stroke
};

// Kinematic pass output: driver angle on a continuous branch plus the chain
// quantities needed by the dynamics pass.
struct IkTrace {
  Eigen::VectorXd t;
  Eigen::VectorXd psi, psi_dot, psi_ddot;
  Eigen::VectorXd theta, theta_dot, theta_ddot;
  Eigen::VectorXd rate;    // dtheta/dpsi
  Eigen::VectorXd rate_d;  // d(rate)/dpsi
  double forward_sign = 1.0;
};

struct TorqueTrace {
  Eigen::VectorXd t;
  Eigen::VectorXd theta, theta_dot, theta_ddot;
  Eigen::VectorXd torque;
};

// Result of the full two-pass simulation; `ok` false carries the reason.
struct SimOutcome {
  bool ok = false;
  double t_rms = 0.0;
  double t_max = 0.0;
  std::string reason;
};

// Samples one stroke: psi(0) = psi_i, psi(period) = psi_e, uniform in time.
ProfileTrace generate_profile(const MotionLaw& law);

// Forward stroke followed by the mirrored return stroke; the turning sample
// is shared, so the cycle holds 2 n_samples - 1 points over [0, 2 period].
ProfileTrace generate_cycle(const MotionLaw& law);

// Per-sample elbow-consistent driver angle, unwrapped to a continuous branch.
// Throws BranchJumpError when consecutive samples leave the branch.
IkTrace inverse_kinematics_trace(const FourBarDesign& design, const ProfileTrace& motion);

// Virtual-work balance in the driver coordinate. Throws NearSingularError
// near fold configurations where |dpsi/dtheta| is unbounded.
TorqueTrace inverse_dynamics_torque(const FourBarDesign& design, const MassModel& mass,
                                    const IkTrace& ik);

double rms_torque(const TorqueTrace& trace);
double max_torque(const TorqueTrace& trace);

// Full pipeline: feasibility gate, reciprocal-cycle kinematics, dynamics,
// RMS reduction. Never throws; failures are encoded in the outcome.
SimOutcome sample_objective(const FourBarDesign& design, const PtpTask& task,
                            const MotionLaw& law, const MassModel& mass);

}  // namespace fourbar
