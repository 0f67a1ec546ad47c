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

#include "rollgrasp/control.hpp"

#include <Eigen/Dense>

namespace rollgrasp {

Vector6d error_twist(const Transform& t_wo, const Transform& t_d) {
  Transform rel = t_wo.inverse() * Transform{t_d.rotation, t_d.translation,
                                             t_wo.from, t_wo.to};
  return adjoint(t_wo) * log_pose(rel);
}

namespace {

// Projection of the origin onto {q : A q <= b} through the dual
//   min 0.5 lambda^T A A^T lambda + b^T lambda,  lambda >= 0,
// solved with a Lawson-Hanson style active set; q* = -A^T lambda*.
// Returns false when the primal set is empty.
bool project_origin(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                    Eigen::VectorXd* q, std::vector<int>* active) {
  const int k = static_cast<int>(a.rows());
  active->clear();
  if (k == 0) {
    q->setZero(a.cols());
    return true;
  }
  const Eigen::MatrixXd gram = a * a.transpose();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
  std::vector<bool> in_set(k, false);

  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;

  for (int outer = 0; outer < 50 * (k + 1); ++outer) {
    // KKT check on the gradient.
    const Eigen::VectorXd w = gram * lambda + b;
    int worst = -1;
    double worst_val = -tol;
    for (int i = 0; i < k; ++i) {
      if (!in_set[i] && w[i] < worst_val) {
        worst_val = w[i];
        worst = i;
      }
    }
    if (worst < 0) break;
    in_set[worst] = true;

    for (int inner = 0; inner < 50 * (k + 1); ++inner) {
      std::vector<int> members;
      for (int i = 0; i < k; ++i)
        if (in_set[i]) members.push_back(i);
      const int p = static_cast<int>(members.size());
      Eigen::MatrixXd gpp(p, p);
      Eigen::VectorXd bp(p);
      for (int r = 0; r < p; ++r) {
        bp[r] = -b[members[r]];
        for (int c = 0; c < p; ++c) gpp(r, c) = gram(members[r], members[c]);
      }
      // Min-norm solve; the gram block may be singular.
      const Eigen::VectorXd sol =
          gpp.completeOrthogonalDecomposition().solve(bp);
      const Eigen::VectorXd incons = bp - gpp * sol;
      if (incons.cwiseAbs().maxCoeff() > 1e-8 * scale) {
        // bp has a component s in ker(gpp): the dual decreases linearly
        // along s. Nonnegative s means it decreases forever (empty primal
        // set); otherwise ratio-step until a coefficient hits zero.
        const Eigen::VectorXd s = incons;
        if ((s.array() >= -1e-12 * scale).all()) return false;
        double t = std::numeric_limits<double>::infinity();
        for (int r = 0; r < p; ++r) {
          if (s[r] < -1e-15) t = std::min(t, lambda[members[r]] / (-s[r]));
        }
        for (int r = 0; r < p; ++r) {
          lambda[members[r]] += t * s[r];
          if (lambda[members[r]] <= tol + 1e-15) {
            in_set[members[r]] = false;
            lambda[members[r]] = std::max(lambda[members[r]], 0.0);
            if (lambda[members[r]] < tol) lambda[members[r]] = 0.0;
          }
        }
        continue;
      }
      bool all_positive = true;
      for (int r = 0; r < p; ++r) {
        if (sol[r] <= 0.0) all_positive = false;
      }
      if (all_positive) {
        lambda.setZero();
        for (int r = 0; r < p; ++r) lambda[members[r]] = sol[r];
        break;
      }
      // Step toward the sub-solution until the first coefficient hits 0.
      double alpha = 1.0;
      for (int r = 0; r < p; ++r) {
        if (sol[r] <= 0.0) {
          const double lr = lambda[members[r]];
          alpha = std::min(alpha, lr / (lr - sol[r]));
        }
      }
      for (int r = 0; r < p; ++r) {
        const double updated =
            lambda[members[r]] + alpha * (sol[r] - lambda[members[r]]);
        lambda[members[r]] = updated;
        if (updated <= tol + 1e-15) {
          in_set[members[r]] = false;
          lambda[members[r]] = 0.0;
        }
      }
    }
  }

  *q = -a.transpose() * lambda;
  active->clear();
  for (int i = 0; i < k; ++i) {
    if (lambda[i] > 0.0) active->push_back(i);
  }
  // Primal feasibility: an empty feasible set shows up as violations that
  // the dual could not remove.
  const Eigen::VectorXd slack = a * (*q) - b;
  return slack.maxCoeff() < 1e-8 * scale + 1e-12;
}

}  // namespace

QpResult solve_joint_velocities(const Eigen::MatrixXd& sigma,
                                const Vector6d& commanded_twist,
                                const Eigen::MatrixXd& ineq, bool use_qp) {
  QpResult result;
  const int m = static_cast<int>(sigma.cols());
  if (sigma.rows() != 6) {
    throw InvariantError("solve_joint_velocities: Sigma must have 6 rows");
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (m < 6 ||
      svd.singularValues()[5] < 1e-10 * svd.singularValues()[0]) {
    result.status = QpResult::Status::kRankDeficient;
    return result;
  }

  // Closed-form minimum-norm solution Sigma^T (Sigma Sigma^T)^{-1} V.
  const Eigen::Matrix<double, 6, 6> gram = sigma * sigma.transpose();
  const Eigen::VectorXd base =
      sigma.transpose() * gram.ldlt().solve(commanded_twist);

  if (!use_qp || ineq.rows() == 0) {
    result.theta_dot = base;
    return result;
  }

  // Null-space elimination: theta_dot = base + Z q with Z orthonormal, so
  // the objective splits and the reduced problem is the projection of the
  // origin onto {q : (G Z) q <= -G base}.
  const Eigen::MatrixXd z = svd.matrixV().rightCols(m - 6);
  const Eigen::MatrixXd a_all = ineq * z;
  const Eigen::VectorXd b_all = -(ineq * base);

  // Rows constant over the equality manifold (zero reduced coefficients)
  // are either vacuous or unsatisfiable; they must not reach the dual,
  // where the tiny coefficients would amplify.
  std::vector<int> regular;
  for (int i = 0; i < a_all.rows(); ++i) {
    const double row_scale = std::max(1.0, ineq.row(i).norm());
    if (a_all.row(i).norm() <= 1e-12 * row_scale) {
      if (b_all[i] < -1e-10 * row_scale) result.violated_rows.push_back(i);
    } else {
      regular.push_back(i);
    }
  }
  if (!result.violated_rows.empty()) {
    result.status = QpResult::Status::kInfeasible;
    return result;
  }

  Eigen::MatrixXd a(static_cast<int>(regular.size()), m - 6);
  Eigen::VectorXd b(static_cast<int>(regular.size()));
  for (size_t r = 0; r < regular.size(); ++r) {
    a.row(static_cast<int>(r)) = a_all.row(regular[r]);
    b[static_cast<int>(r)] = b_all[regular[r]];
  }

  Eigen::VectorXd q = Eigen::VectorXd::Zero(m - 6);
  std::vector<int> active;
  if (!project_origin(a, b, &q, &active)) {
    result.status = QpResult::Status::kInfeasible;
    const Eigen::VectorXd slack = ineq * (base + z * q);
    for (int i = 0; i < slack.size(); ++i) {
      if (slack[i] > 1e-9) result.violated_rows.push_back(i);
    }
    if (result.violated_rows.empty()) result.violated_rows = regular;
    return result;
  }
  result.theta_dot = base + z * q;
  for (int idx : active) result.active_rows.push_back(regular[idx]);
  return result;
}

RollingController::RollingController(const ControllerConfig& config,
                                     int total_joints)
    : config_(config), theta_cmd_(Eigen::VectorXd::Zero(total_joints)) {
  if (config.period <= 0.0) {
    throw InvariantError("controller period must be positive");
  }
  if ((config.kp.array() < 0.0).any() || (config.ki.array() < 0.0).any()) {
    throw InvariantError("controller gains must be nonnegative");
  }
}

void RollingController::reset() { integral_.setZero(); }

Eigen::MatrixXd stacked_jacobian(const std::vector<FingerModel>& hand,
                                 const GraspState& state) {
  int total = 0;
  for (const auto& f : hand) total += static_cast<int>(f.screw_axes.size());
  Eigen::MatrixXd xi =
      Eigen::MatrixXd::Zero(6 * static_cast<int>(hand.size()), total);
  int col = 0;
  for (size_t i = 0; i < hand.size(); ++i) {
    const int m = static_cast<int>(hand[i].screw_axes.size());
    if (m > 0) {
      xi.block(6 * static_cast<int>(i), col, 6, m) =
          finger_jacobian(hand[i], state.fingers[i].theta);
    }
    col += m;
  }
  return xi;
}

ControlCommand RollingController::step(const GraspState& state,
                                       const std::vector<FingerModel>& hand,
                                       const InverseMap& map,
                                       const ForceRateConstraints& constraints,
                                       const Transform& desired_pose,
                                       const Twist& feedforward) {
  ControlCommand cmd;
  cmd.error = error_twist(state.object.pose, desired_pose);

  integral_ += cmd.error * config_.period;
  integral_ = integral_.cwiseMax(-config_.anti_windup)
                  .cwiseMin(config_.anti_windup);

  Vector6d commanded = feedforward.vector() +
                       config_.kp.cwiseProduct(cmd.error) +
                       config_.ki.cwiseProduct(integral_);
  cmd.unprojected_twist = commanded;
  if (projector_) commanded = projector_(commanded);
  cmd.commanded_twist = commanded;

  const Eigen::MatrixXd xi = stacked_jacobian(hand, state);
  const Eigen::MatrixXd sigma = map.pi * xi;

  Eigen::MatrixXd ineq(static_cast<int>(constraints.rows.size()), xi.cols());
  for (size_t r = 0; r < constraints.rows.size(); ++r) {
    ineq.row(static_cast<int>(r)) = constraints.rows[r].coeffs * xi;
  }
  cmd.qp = solve_joint_velocities(sigma, commanded, ineq, config_.use_qp);
  if (cmd.qp.status == QpResult::Status::kRankDeficient) {
    throw RankDeficiencyError(
        "rank(Sigma) < 6: the hand cannot achieve general object twists");
  }
  if (cmd.qp.status == QpResult::Status::kInfeasible) {
    cmd.theta_dot = Eigen::VectorXd::Zero(xi.cols());
    cmd.theta_cmd = theta_cmd_;
    return cmd;
  }

  cmd.theta_dot = cmd.qp.theta_dot;
  const double peak = cmd.theta_dot.cwiseAbs().maxCoeff();
  if (peak > config_.joint_velocity_bound) {
    cmd.saturation_scale = config_.joint_velocity_bound / peak;
    cmd.theta_dot *= cmd.saturation_scale;
  }
  theta_cmd_ += config_.period * cmd.theta_dot;
  cmd.theta_cmd = theta_cmd_;
  return cmd;
}

}  // namespace rollgrasp
