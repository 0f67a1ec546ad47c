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

#ifndef ROLLGRASP_GRASP_HPP_
#define ROLLGRASP_GRASP_HPP_

#include <vector>

#include "rollgrasp/lie.hpp"
#include "rollgrasp/surface.hpp"

namespace rollgrasp {

class SeedingError : public std::runtime_error {
 public:
  explicit SeedingError(const std::string& what) : std::runtime_error(what) {}
};

class FlexureLimitError : public std::runtime_error {
 public:
  explicit FlexureLimitError(const std::string& what)
      : std::runtime_error(what) {}
};

// One compliant finger: a position-controlled kinematic chain driving the
// anchor, a 6-dof flexure between anchor and fingertip, and the fingertip
// surface. Screw axes are expressed in the palm/world frame at zero
// configuration (product of exponentials); fingers with no joints have
// their anchors driven directly by twist schedules.
struct FingerModel {
  std::string name;
  std::vector<Vector6d> screw_axes;
  Transform home_pose;       // world -> anchor at theta = 0
  Transform anchor_to_rest;  // anchor -> {f0}, constant
  StiffnessMatrix stiffness;  // expressed in {f0}
  SurfaceModel fingertip;     // in {f}

  FrameId anchor_frame() const { return name + ":a"; }
  FrameId rest_frame() const { return name + ":f0"; }
  FrameId tip_frame() const { return name + ":f"; }
};

struct RigidObject {
  double mass = 0.0;          // [kg]
  SurfaceModel surface;       // in {o}
  Transform pose;             // world -> {o}
};

struct FingerState {
  Eigen::VectorXd theta;
  Transform anchor_pose;     // world -> anchor
  Transform rest_pose;       // world -> {f0}
  Transform fingertip_pose;  // world -> {f}
  Vector6d flexure_disp = Vector6d::Zero();  // X_{f0 f}
  SurfaceModel tip_surface;  // current chart (re-seatable copy)
};

// Full quasistatic state: object pose, finger poses, contact coordinates
// and the contact wrenches implied by the flexures.
struct GraspState {
  RigidObject object;
  std::vector<FingerState> fingers;
  std::vector<ContactPair> contacts;
  std::vector<Wrench> contact_wrenches;  // world frame, applied to object
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
};

// Product-of-exponentials anchor kinematics.
Transform fk_anchor(const FingerModel& finger, const Eigen::VectorXd& theta);
// Space Jacobian: V_wa = J(theta) theta_dot, world frame.
Eigen::MatrixXd finger_jacobian(const FingerModel& finger,
                                const Eigen::VectorXd& theta);

// Contact wrench applied to the object by the fingertip, world frame:
// F_con = -F_spr with F_spr^{f0} = K^{f0} X_{f0 f}. Throws past the hard
// flexure displacement limit.
Wrench flexure_wrench(const FingerState& finger,
                      const StiffnessMatrix& stiffness_f0,
                      double hard_limit = 0.2);
bool flexure_displacement_warning(const FingerState& finger,
                                  double bound = 0.05);

// Gravity wrench on the object about the world origin and its rate as a
// function of the object twist.
Wrench external_wrench(const RigidObject& object,
                       const Eigen::Vector3d& gravity);
Vector6d external_wrench_rate(const RigidObject& object,
                              const Eigen::Vector3d& gravity,
                              const Twist& object_twist);

// Sum of contact wrenches plus the external wrench, world frame.
Vector6d equilibrium_residual(const GraspState& state);

// Contact wrench expressed in the contact frame {c1}; the moment part
// must vanish for a consistent point contact.
Wrench contact_frame_wrench(const GraspState& state, int finger_index);
// Compressive normal force (positive pushing) and tangential magnitude.
struct ContactForceSplit {
  double normal = 0.0;
  double tangential = 0.0;
};
ContactForceSplit contact_force_split(const GraspState& state,
                                      int finger_index);

// Per-finger contact coordinates used to (re)build a state.
struct ContactCoordinates {
  Eigen::Vector2d u_object = Eigen::Vector2d::Zero();
  Eigen::Vector2d u_tip = Eigen::Vector2d::Zero();
  double phi = 0.0;
};

// Canonical state constructor: fingertip poses from the contact
// coincidence construction (zero gap by construction), flexure wrenches
// from the poses.
GraspState build_state(const std::vector<FingerModel>& hand,
                       const RigidObject& object,
                       const std::vector<Eigen::VectorXd>& thetas,
                       const std::vector<Transform>& anchor_poses,
                       const std::vector<SurfaceModel>& tip_surfaces,
                       const std::vector<ContactCoordinates>& contacts,
                       const Eigen::Vector3d& gravity);

// Frictionless fingertip settling: the fingertip pose minimising flexure
// energy subject to touching the object; the flexure wrench reduces to a
// pure normal force through the contact.
struct SettleResult {
  Transform fingertip_pose;
  Vector6d flexure_disp = Vector6d::Zero();
  double normal_force = 0.0;
  Eigen::Vector2d u_object = Eigen::Vector2d::Zero();
  Eigen::Vector2d u_tip = Eigen::Vector2d::Zero();
  double phi = 0.0;
};
SettleResult settle_fingertip(const SurfaceModel& object_surface,
                              const Transform& object_pose,
                              const SurfaceModel& tip_surface,
                              const Transform& rest_pose,
                              const StiffnessMatrix& stiffness_f0,
                              const Vector6d& initial_disp = Vector6d::Zero());

struct SeedOptions {
  double tolerance = 1e-9;
  int max_iterations = 100;
};

// Builds an initial grasp from anchor poses by damped Newton on the
// object pose, zeroing the wrench-equilibrium residual with settled
// (purely normal) contact forces. Gravity components that need tangential
// friction preloads cannot be balanced here; ramp them through the
// mechanics afterwards (the simulator does this automatically).
GraspState seed_equilibrium(const std::vector<FingerModel>& hand,
                            const RigidObject& object_guess,
                            const std::vector<Eigen::VectorXd>& thetas,
                            const std::vector<Transform>& anchor_poses,
                            const Eigen::Vector3d& gravity,
                            const SeedOptions& options = {});

}  // namespace rollgrasp

#endif  // ROLLGRASP_GRASP_HPP_
