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

#ifndef ROLLGRASP_CONTROL_HPP_
#define ROLLGRASP_CONTROL_HPP_

#include <functional>
#include <vector>

#include "rollgrasp/mechanics.hpp"

namespace rollgrasp {

class RankDeficiencyError : public std::runtime_error {
 public:
  explicit RankDeficiencyError(const std::string& what)
      : std::runtime_error(what) {}
};

// Object configuration error as a world-frame twist:
// V_e = Ad_{T_wo} log(T_wo^{-1} T_d). Zero iff the poses coincide.
Vector6d error_twist(const Transform& t_wo, const Transform& t_d);

struct ControllerConfig {
  Vector6d kp = Vector6d::Ones();
  Vector6d ki = 0.1 * Vector6d::Ones();
  double anti_windup = 0.1;
  bool use_qp = true;
  double joint_velocity_bound = 2.0;  // [rad/s]
  double period = 1e-3;               // [s]
};

struct QpResult {
  enum class Status { kOk, kRankDeficient, kInfeasible };
  Status status = Status::kOk;
  Eigen::VectorXd theta_dot;
  std::vector<int> active_rows;
  std::vector<int> violated_rows;
};

// Minimum-norm joint velocities tracking the commanded object twist:
//   min theta_dot^T theta_dot  s.t.  Sigma theta_dot = twist,
//                                    ineq * theta_dot <= 0.
// With no active rows the result equals Sigma^T (Sigma Sigma^T)^{-1} twist
// exactly. use_qp = false ignores the inequality rows (closed form only).
// The equality rows are eliminated through an orthonormal null-space basis
// and the reduced projection is solved by a dual active set.
QpResult solve_joint_velocities(const Eigen::MatrixXd& sigma,
                                const Vector6d& commanded_twist,
                                const Eigen::MatrixXd& ineq, bool use_qp);

struct ControlCommand {
  QpResult qp;
  Eigen::VectorXd theta_dot;  // after saturation
  Eigen::VectorXd theta_cmd;  // integrated commanded positions
  Vector6d commanded_twist = Vector6d::Zero();
  Vector6d unprojected_twist = Vector6d::Zero();  // before any restriction
  Vector6d error = Vector6d::Zero();
  double saturation_scale = 1.0;
};

// PI loop of the rolling manipulation controller: the pose error twist
// feeds a PI block, the output is summed with the feedforward twist, and
// joint velocities come from the QP (or the closed form). Owns the
// integral state and the commanded-position accumulator.
class RollingController {
 public:
  RollingController(const ControllerConfig& config, int total_joints);

  // Optional restriction applied to the commanded twist (axis-constrained
  // scenarios project onto the allowed subspace).
  void set_twist_projector(std::function<Vector6d(const Vector6d&)> proj) {
    projector_ = std::move(proj);
  }

  ControlCommand step(const GraspState& state,
                      const std::vector<FingerModel>& hand,
                      const InverseMap& map,
                      const ForceRateConstraints& constraints,
                      const Transform& desired_pose,
                      const Twist& feedforward);

  void reset();
  const Eigen::VectorXd& commanded_positions() const { return theta_cmd_; }

 private:
  ControllerConfig config_;
  Vector6d integral_ = Vector6d::Zero();
  Eigen::VectorXd theta_cmd_;
  std::function<Vector6d(const Vector6d&)> projector_;
};

// Block-diagonal stacked Jacobian Xi with V_a = Xi theta_dot.
Eigen::MatrixXd stacked_jacobian(const std::vector<FingerModel>& hand,
                                 const GraspState& state);

}  // namespace rollgrasp

#endif  // ROLLGRASP_CONTROL_HPP_
