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

#ifndef ROLLGRASP_MECHANICS_HPP_
#define ROLLGRASP_MECHANICS_HPP_

#include <vector>

#include "rollgrasp/grasp.hpp"

namespace rollgrasp {

class SingularSystemError : public std::runtime_error {
 public:
  explicit SingularSystemError(const std::string& what)
      : std::runtime_error(what) {}
};

// The stacked quasistatic constraint system
//   D_f V_f + D_o V_wo = D_a V_a
// with 6(n+1) rows: per finger the 3 contact-moment rows and 3 rolling
// rows, then the 6 equilibrium-rate rows. Everything is assembled in the
// world frame.
struct ConstraintSystem {
  int finger_count = 0;
  Eigen::MatrixXd d_f;   // 6(n+1) x 6n
  Eigen::MatrixXd d_o;   // 6(n+1) x 6
  Eigen::MatrixXd d_a;   // 6(n+1) x 6n
  Eigen::MatrixXd d_fo;  // [d_f | d_o]
  Eigen::VectorXd beta;  // d_a * V_a for the V_a given at assembly

  // Per-finger blocks, kept for constraint-row construction and checks.
  std::vector<Eigen::Matrix<double, 3, 6>> p_rows;  // rolling
  std::vector<Eigen::Matrix<double, 3, 6>> q_rows;  // moment selection
  std::vector<Matrix6d> a_blocks, b_blocks, c_blocks;
  std::vector<Matrix6d> stiffness_world;
  std::vector<Matrix6d> rolling_world;  // Ltilde_1 per finger
  std::vector<Transform> world_to_c1;
};

ConstraintSystem assemble(const GraspState& state,
                          const std::vector<FingerModel>& hand,
                          const Eigen::VectorXd& anchor_twists);

// Contact wrench rate in the contact frame:
// Fdot^{c1} = Ad^T_{w c1} (-A V_wf - B V_wo + C V_wa).
Vector6d contact_wrench_rate(const ConstraintSystem& sys, int finger_index,
                             const Twist& fingertip_twist,
                             const Twist& object_twist,
                             const Twist& anchor_twist);

struct MechanicsSolution {
  bool singular = false;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double solve_residual = 0.0;
  std::vector<Twist> fingertip_twists;
  Twist object_twist;
  Eigen::VectorXd raw;  // V_f&o stacked, empty when singular
};

// Solves D_f&o V_f&o = rhs. Declared singular (no solution returned) when
// sigma_min / sigma_max < 1e-10.
MechanicsSolution solve_system(const ConstraintSystem& sys,
                               const Eigen::VectorXd& rhs);
// Forward mechanics, Eq.-26 contract: rhs = beta = D_a V_a.
MechanicsSolution forward_solve(const ConstraintSystem& sys);

// Minimum-norm least-squares solve tolerating rank deficiency, for the
// seeding gravity ramp: an indeterminate free motion (e.g. spin about a
// two-contact line) is left unexcited as long as the right-hand side is
// consistent; inconsistency is reported through `singular`.
MechanicsSolution solve_system_least_squares(const ConstraintSystem& sys,
                                             const Eigen::VectorXd& rhs);

// Inverse mechanics: Pi with V_wo = Pi V_a, plus the full twist map
// D_f&o^{-1} D_a (fingertip rows included).
struct InverseMap {
  Eigen::MatrixXd pi;        // 6 x 6n
  Eigen::MatrixXd full_map;  // 6(n+1) x 6n
  bool object_controllable = false;  // rank(pi) == 6
  double pi_sigma_min = 0.0;
};
InverseMap inverse_map(const ConstraintSystem& sys);

Twist object_twist_of(const InverseMap& map,
                      const Eigen::VectorXd& anchor_twists);

// Active inequality rows on V_a: contact-force maintenance and friction
// cone, emitted only when their activation conditions hold.
struct ForceRateParams {
  double f_min = 0.5;   // [N]
  double mu = 1.0;
  double mu_max = 0.8;  // conservative bound, < mu
};

struct ForceRateRow {
  enum class Kind { kNormalMaintenance, kFrictionCone };
  Kind kind = Kind::kNormalMaintenance;
  int finger = 0;
  Eigen::RowVectorXd coeffs;  // row * V_a <= 0
};

struct ForceRateConstraints {
  std::vector<ForceRateRow> rows;
  // Psi_{a,i}: contact-force rate per unit V_a, 3 x 6n per finger.
  std::vector<Eigen::MatrixXd> psi;
  ForceRateParams params;
};

ForceRateConstraints force_rate_rows(const GraspState& state,
                                     const ConstraintSystem& sys,
                                     const InverseMap& map,
                                     const ForceRateParams& params = {});

// Residuals of the three stacked constraint families for a candidate
// solution; all should vanish on forward_solve outputs.
struct ConstraintResiduals {
  double rolling = 0.0;      // Eq. 16 rows
  double moment_rate = 0.0;  // Eq. 22 rows
  double object_rate = 0.0;  // Eq. 23/24 rows
};
ConstraintResiduals constraint_residuals(const ConstraintSystem& sys,
                                         const Eigen::VectorXd& v_fo,
                                         const Eigen::VectorXd& anchor_twists);

}  // namespace rollgrasp

#endif  // ROLLGRASP_MECHANICS_HPP_
