// Copyright 2025 The rollgrasp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ROLLGRASP_SIMULATOR_HPP_
#define ROLLGRASP_SIMULATOR_HPP_

#include <optional>
#include <string>
#include <vector>

#include "rollgrasp/control.hpp"
#include "rollgrasp/mechanics.hpp"

namespace rollgrasp {

enum class SimEventKind {
  kContactBreak,
  kFrictionViolation,
  kSingularSystem,
  kChartReseat,
  kConstraintInfeasible,
};
const char* to_string(SimEventKind kind);

struct SimEvent {
  SimEventKind kind;
  double time = 0.0;
  int finger = -1;  // -1: whole system
  std::string detail;
};

// Fig.-7 style guide: the object may only rotate about and translate
// along a fixed axis.
struct ObjectAxisConstraint {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
};

struct ConstraintEnforcement {
  Vector6d projected = Vector6d::Zero();
  Vector6d removed = Vector6d::Zero();
};

// Restricts a twist to the 2-dof subspace of the axis constraint. With
// strict = true a twist outside the subspace is an error (used for
// scenario-declared desired twists); otherwise the removed component is
// reported (used for the commanded twist each control step).
ConstraintEnforcement enforce_object_constraint(
    const Vector6d& twist, const ObjectAxisConstraint& constraint,
    bool strict);

// Desired-motion schedule: rotate about an axis at constant rate for
// move_duration, then hold.
struct TargetSchedule {
  Eigen::Vector3d axis_point = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis_direction = Eigen::Vector3d::UnitZ();
  double angle = 0.0;          // [rad]
  double move_duration = 0.0;  // [s]

  Transform desired_pose(const Transform& initial_pose, double t) const;
  Vector6d desired_twist(double t) const;
};

struct ScriptedSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  Vector6d twist = Vector6d::Zero();  // world-frame anchor twist
};

struct SimTolerances {
  double gap = 1e-6;             // re-projection drift bound [m]
  double equilibrium = 1e-3;     // quasistatic validity [N, N m]
  double moment_free = 1e-6;     // contact moment bound [N m]
  double state_validity = 1e-6;  // post-seeding residual bound
  double flexure_warning = 0.05;
};

struct Scenario {
  std::string name;
  RigidObject object;
  std::vector<FingerModel> hand;
  std::vector<Eigen::VectorXd> initial_joints;
  std::vector<std::vector<ScriptedSegment>> scripts;  // scripted mode
  bool closed_loop = false;
  ControllerConfig controller;
  TargetSchedule target;
  ForceRateParams friction;
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
  std::optional<ObjectAxisConstraint> object_constraint;
  // Axis used for reporting rotation angles in the summary.
  Eigen::Vector3d report_axis = Eigen::Vector3d::UnitZ();
  double duration = 1.0;
  double dt = 1e-3;
  SimTolerances tolerances;
  bool soft_friction = false;
  int seed_ramp_steps = 200;
};

struct FingerStepRecord {
  Transform anchor_pose;
  Transform fingertip_pose;
  Eigen::Vector3d contact_point = Eigen::Vector3d::Zero();
  double normal_force = 0.0;
  double tangential_force = 0.0;
  double flexure_disp_norm = 0.0;
};

struct StepRecord {
  double t = 0.0;
  Transform object_pose;
  std::vector<FingerStepRecord> fingers;
  double equilibrium_residual = 0.0;
  double sigma_min = 0.0;
  double reprojection_gap = 0.0;   // worst pre-snap gap this step
  double moment_residual = 0.0;    // worst contact moment magnitude
  double rotation_angle = 0.0;     // about the report axis, from start
  Vector6d commanded_twist = Vector6d::Zero();
  Vector6d constraint_removed_twist = Vector6d::Zero();
};

struct RunSummary {
  bool completed = false;
  bool valid = true;
  std::string invalid_reason;
  int exit_code = 0;  // see cli documentation
  double final_time = 0.0;
  double rotation_angle = 0.0;
  double center_displacement = 0.0;
  double max_equilibrium_residual = 0.0;
  double max_reprojection_gap = 0.0;
  double max_moment_residual = 0.0;
  double tracking_error_at_move_end = 0.0;  // [rad], closed loop
  double hold_drift = 0.0;                   // [rad], closed loop
  double min_normal_force = 0.0;
  double max_normal_force = 0.0;
  std::vector<double> max_flexure_disp;      // per finger
  double arc_length_mismatch = 0.0;          // relative, worst finger
  double energy_balance_error = 0.0;         // relative
  double axis_deviation = 0.0;               // [rad], constrained runs
  bool sigma_jump_flagged = false;
};

struct TrajectoryRecord {
  int finger_count = 0;
  std::vector<StepRecord> steps;
  std::vector<SimEvent> events;
  RunSummary summary;
};

class Simulator {
 public:
  // Seeds the initial grasp: zero-gravity damped-Newton settle, then a
  // quasistatic gravity ramp that builds the tangential preloads.
  explicit Simulator(const Scenario& scenario);

  const GraspState& state() const { return state_; }
  const Scenario& scenario() const { return scenario_; }

  struct StepOutcome {
    std::vector<SimEvent> events;
    bool halted = false;
    double sigma_min = 0.0;
    double reprojection_gap = 0.0;
  };
  // One velocity-level step: solve the stacked system with stabilizing
  // right-hand sides, advance poses by the exponential map, re-project
  // contacts, rebuild wrenches. extra_external_rate feeds the equilibrium
  // rows (gravity ramp, environment wrench schedules). next_anchors
  // overrides the twist-integrated anchor poses (jointed fingers follow
  // their integrated joint positions instead).
  StepOutcome step(const Eigen::VectorXd& anchor_twists, double dt,
                   const Vector6d& extra_external_rate = Vector6d::Zero(),
                   const std::vector<Transform>* next_anchors = nullptr);

  TrajectoryRecord run();

 private:
  Eigen::VectorXd scripted_anchor_twists(double t) const;

  Scenario scenario_;
  GraspState state_;
  double time_ = 0.0;
  double previous_sigma_min_ = -1.0;
  bool sigma_jump_ = false;
  bool seeding_mode_ = false;
  // Rolling arc-length accumulators, object and fingertip side.
  std::vector<double> arc_object_, arc_tip_;
  double anchor_work_ = 0.0;
  double initial_elastic_energy_ = 0.0;
  double initial_potential_energy_ = 0.0;
};

TrajectoryRecord run_scenario(const Scenario& scenario);

// dt, dt/2, dt/4 convergence evidence for the conservation suite.
struct RefinementStudy {
  std::vector<double> dts;
  std::vector<double> max_equilibrium_residuals;
  std::vector<double> max_reprojection_gaps;
  std::vector<double> max_moment_residuals;
};
RefinementStudy run_refinement_study(const Scenario& scenario);

}  // namespace rollgrasp

#endif  // ROLLGRASP_SIMULATOR_HPP_
