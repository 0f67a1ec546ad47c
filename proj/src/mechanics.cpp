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

#include "rollgrasp/mechanics.hpp"

#include <Eigen/Dense>

namespace rollgrasp {

namespace {
constexpr double kSingularRatio = 1e-10;
}

ConstraintSystem assemble(const GraspState& state,
                          const std::vector<FingerModel>& hand,
                          const Eigen::VectorXd& anchor_twists) {
  const int n = static_cast<int>(hand.size());
  if (static_cast<int>(state.fingers.size()) != n ||
      static_cast<int>(state.contacts.size()) != n ||
      static_cast<int>(state.contact_wrenches.size()) != n) {
    throw InvariantError("assemble: state does not match the hand model");
  }
  if (anchor_twists.size() != 6 * n) {
    throw InvariantError("assemble: anchor twist vector must be 6n long");
  }

  ConstraintSystem sys;
  sys.finger_count = n;
  const int rows = 6 * (n + 1);
  sys.d_f = Eigen::MatrixXd::Zero(rows, 6 * n);
  sys.d_o = Eigen::MatrixXd::Zero(rows, 6);
  sys.d_a = Eigen::MatrixXd::Zero(rows, 6 * n);

  for (int i = 0; i < n; ++i) {
    const ContactPair& pair = state.contacts[i];
    const Eigen::Vector3d p_c = pair.p_wc;

    Eigen::Matrix<double, 3, 6> p_row;
    p_row << skew(p_c), -Eigen::Matrix3d::Identity();
    Eigen::Matrix<double, 3, 6> q_row;
    q_row << -Eigen::Matrix3d::Identity(), skew(p_c);

    const StiffnessMatrix k_world =
        transform_stiffness(state.fingers[i].rest_pose, hand[i].stiffness);
    const WrenchMatrix w_con =
        WrenchMatrix::from_wrench(state.contact_wrenches[i]);
    const Matrix6d l_tilde = rolling_map_L1(pair).world;

    const Matrix6d a = k_world.matrix - w_con.matrix * l_tilde;
    const Matrix6d b = w_con.matrix * (l_tilde - Matrix6d::Identity());
    const Matrix6d c = k_world.matrix - w_con.matrix;

    sys.d_f.block<3, 6>(6 * i, 6 * i) = q_row * a;
    sys.d_f.block<3, 6>(6 * i + 3, 6 * i) = p_row;
    sys.d_f.block<6, 6>(6 * n, 6 * i) = k_world.matrix;

    sys.d_o.block<3, 6>(6 * i, 0) = q_row * b;
    sys.d_o.block<3, 6>(6 * i + 3, 0) = -p_row;

    sys.d_a.block<3, 6>(6 * i, 6 * i) = q_row * c;
    sys.d_a.block<6, 6>(6 * n, 6 * i) = c;

    sys.p_rows.push_back(p_row);
    sys.q_rows.push_back(q_row);
    sys.a_blocks.push_back(a);
    sys.b_blocks.push_back(b);
    sys.c_blocks.push_back(c);
    sys.stiffness_world.push_back(k_world.matrix);
    sys.rolling_world.push_back(l_tilde);
    sys.world_to_c1.push_back(pair.world_to_c1);
  }

  // Gravity-rate rows m [g] [-[p_wo] | I] followed by the zero block.
  Eigen::Matrix<double, 3, 6> grav;
  grav << -skew(state.object.pose.translation), Eigen::Matrix3d::Identity();
  sys.d_o.block<3, 6>(6 * n, 0) =
      state.object.mass * skew(state.gravity) * grav;

  sys.d_fo.resize(rows, 6 * (n + 1));
  sys.d_fo << sys.d_f, sys.d_o;
  sys.beta = sys.d_a * anchor_twists;
  return sys;
}

Vector6d contact_wrench_rate(const ConstraintSystem& sys, int finger_index,
                             const Twist& fingertip_twist,
                             const Twist& object_twist,
                             const Twist& anchor_twist) {
  if (fingertip_twist.frame != "w" || object_twist.frame != "w" ||
      anchor_twist.frame != "w") {
    throw FrameMismatchError("contact_wrench_rate", "w", "non-world twist");
  }
  const Vector6d mix =
      -sys.a_blocks.at(finger_index) * fingertip_twist.vector() -
      sys.b_blocks.at(finger_index) * object_twist.vector() +
      sys.c_blocks.at(finger_index) * anchor_twist.vector();
  return adjoint(sys.world_to_c1.at(finger_index)).transpose() * mix;
}

MechanicsSolution solve_system(const ConstraintSystem& sys,
                               const Eigen::VectorXd& rhs) {
  MechanicsSolution sol;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.d_fo);
  sol.sigma_max = svd.singularValues().maxCoeff();
  sol.sigma_min = svd.singularValues().minCoeff();
  if (sol.sigma_max <= 0.0 ||
      sol.sigma_min / sol.sigma_max < kSingularRatio) {
    sol.singular = true;
    return sol;
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.d_fo);
  Eigen::VectorXd x = qr.solve(rhs);
  // One step of iterative refinement; the blocks mix stiffness-scale and
  // geometry-scale entries.
  x += qr.solve(rhs - sys.d_fo * x);

  sol.raw = x;
  const int n = sys.finger_count;
  for (int i = 0; i < n; ++i) {
    sol.fingertip_twists.push_back(
        Twist::from_vector(x.segment<6>(6 * i), "w"));
  }
  sol.object_twist = Twist::from_vector(x.segment<6>(6 * n), "w");
  return sol;
}

MechanicsSolution forward_solve(const ConstraintSystem& sys) {
  return solve_system(sys, sys.beta);
}

MechanicsSolution solve_system_least_squares(const ConstraintSystem& sys,
                                             const Eigen::VectorXd& rhs) {
  MechanicsSolution sol;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      sys.d_fo, Eigen::ComputeThinU | Eigen::ComputeThinV);
  sol.sigma_max = svd.singularValues().maxCoeff();
  sol.sigma_min = svd.singularValues().minCoeff();
  svd.setThreshold(1e-12);
  const Eigen::VectorXd x = svd.solve(rhs);
  sol.solve_residual = (sys.d_fo * x - rhs).norm();
  if (sol.solve_residual > 1e-8 * (1.0 + rhs.norm())) {
    sol.singular = true;  // inconsistent right-hand side
    return sol;
  }
  sol.raw = x;
  const int n = sys.finger_count;
  for (int i = 0; i < n; ++i) {
    sol.fingertip_twists.push_back(
        Twist::from_vector(x.segment<6>(6 * i), "w"));
  }
  sol.object_twist = Twist::from_vector(x.segment<6>(6 * n), "w");
  return sol;
}

InverseMap inverse_map(const ConstraintSystem& sys) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.d_fo);
  const double smax = svd.singularValues().maxCoeff();
  const double smin = svd.singularValues().minCoeff();
  if (smax <= 0.0 || smin / smax < kSingularRatio) {
    throw SingularSystemError(
        "inverse mechanics undefined: D_f&o is singular (sigma ratio " +
        std::to_string(smin / smax) + ")");
  }
  InverseMap map;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.d_fo);
  map.full_map = qr.solve(sys.d_a);
  map.full_map += qr.solve(sys.d_a - sys.d_fo * map.full_map);
  map.pi = map.full_map.bottomRows<6>();

  const Eigen::JacobiSVD<Eigen::MatrixXd> pi_svd(map.pi);
  map.pi_sigma_min = pi_svd.singularValues().minCoeff();
  map.object_controllable =
      map.pi_sigma_min > 1e-10 * pi_svd.singularValues().maxCoeff();
  return map;
}

Twist object_twist_of(const InverseMap& map,
                      const Eigen::VectorXd& anchor_twists) {
  return Twist::from_vector(map.pi * anchor_twists, "w");
}

ForceRateConstraints force_rate_rows(const GraspState& state,
                                     const ConstraintSystem& sys,
                                     const InverseMap& map,
                                     const ForceRateParams& params) {
  const int n = sys.finger_count;
  ForceRateConstraints out;
  out.params = params;
  for (int i = 0; i < n; ++i) {
    // Psi_{a,i} = [0 | R^T] (-A_i S^i_{n+1} D^{-1} D_a - B_i Pi + C_i S^i_n)
    Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(6, 6 * n);
    mix = -sys.a_blocks[i] * map.full_map.middleRows<6>(6 * i) -
          sys.b_blocks[i] * map.pi;
    mix.middleCols<6>(6 * i) += sys.c_blocks[i];
    const Eigen::Matrix3d r_wc1 = sys.world_to_c1[i].rotation.matrix();
    const Eigen::MatrixXd psi = r_wc1.transpose() * mix.bottomRows<3>();
    out.psi.push_back(psi);

    const Wrench f_c1 = contact_frame_wrench(state, i);
    const Eigen::Vector3d f = f_c1.force;

    if (f.norm() <= params.f_min) {
      ForceRateRow row;
      row.kind = ForceRateRow::Kind::kNormalMaintenance;
      row.finger = i;
      row.coeffs = -f.transpose() * psi;
      out.rows.push_back(row);
    }

    // Friction activation: tangential over compressive normal. The {c1}
    // z-axis points out of the object, so pushing forces have f.z < 0.
    const double normal = -f.z();
    const double tangential = std::hypot(f.x(), f.y());
    if (normal > 0.0 && tangential / normal >= params.mu_max) {
      const Eigen::Vector3d hf(f.x(), f.y(), 0.0);
      const Eigen::RowVector3d z_con = f.transpose() * skew(hf.cross(f));
      ForceRateRow row;
      row.kind = ForceRateRow::Kind::kFrictionCone;
      row.finger = i;
      row.coeffs = z_con * psi;
      out.rows.push_back(row);
    }
  }
  return out;
}

ConstraintResiduals constraint_residuals(
    const ConstraintSystem& sys, const Eigen::VectorXd& v_fo,
    const Eigen::VectorXd& anchor_twists) {
  const int n = sys.finger_count;
  const Eigen::VectorXd lhs = sys.d_fo * v_fo;
  const Eigen::VectorXd rhs = sys.d_a * anchor_twists;
  ConstraintResiduals res;
  for (int i = 0; i < n; ++i) {
    res.moment_rate = std::max(
        res.moment_rate,
        (lhs.segment<3>(6 * i) - rhs.segment<3>(6 * i)).cwiseAbs().maxCoeff());
    res.rolling = std::max(res.rolling, (lhs.segment<3>(6 * i + 3) -
                                         rhs.segment<3>(6 * i + 3))
                                            .cwiseAbs()
                                            .maxCoeff());
  }
  res.object_rate =
      (lhs.segment<6>(6 * n) - rhs.segment<6>(6 * n)).cwiseAbs().maxCoeff();
  return res;
}

}  // namespace rollgrasp
