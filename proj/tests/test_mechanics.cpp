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

#include <doctest.h>

#include "rollgrasp/mechanics.hpp"
#include "test_support.hpp"

using namespace rollgrasp;
using testutil::random_vec6;

namespace {

StiffnessMatrix default_stiffness(const FrameId& frame) {
  Vector6d diag;
  diag << 1.0, 1.0, 1.0, 1000.0, 1000.0, 1000.0;
  return StiffnessMatrix::from_matrix(diag.asDiagonal(), frame);
}

Transform pose_at(const Eigen::Vector3d& p, const FrameId& to,
                  const Rotation& r = Rotation::identity()) {
  return Transform{r, p, "w", to};
}

struct Rig {
  std::vector<FingerModel> hand;
  GraspState state;

  Eigen::VectorXd zero_va() const {
    return Eigen::VectorXd::Zero(6 * static_cast<int>(hand.size()));
  }
};

// n sphere tips squeezing a vertical cylinder at spread azimuths and
// staggered heights; zero gravity, settled preloads.
Rig cylinder_rig(int n, double preload_depth = 1.5e-3) {
  Rig rig;
  const double r_cyl = 0.025, r_tip = 0.008;
  RigidObject object;
  object.mass = 0.05;
  object.surface = SurfaceModel::cylinder(r_cyl, 0.1, "o");
  object.pose = pose_at({0, 0, 0}, "o");

  std::vector<Eigen::VectorXd> thetas;
  std::vector<Transform> anchors;
  for (int i = 0; i < n; ++i) {
    const double az = 2.0 * M_PI * i / n + 0.1;
    const Eigen::Vector3d radial(std::cos(az), std::sin(az), 0.0);
    FingerModel f;
    f.name = "f" + std::to_string(i);
    // Contacts coplanar with the center: equal normal preloads balance.
    f.home_pose = pose_at((r_cyl + r_tip - preload_depth) * radial,
                          f.anchor_frame());
    f.anchor_to_rest = Transform::identity(f.anchor_frame(), f.rest_frame());
    f.stiffness = default_stiffness(f.rest_frame());
    f.fingertip = reseat_chart(SurfaceModel::sphere(r_tip, f.tip_frame()),
                               -r_tip * radial);
    rig.hand.push_back(f);
    thetas.push_back(Eigen::VectorXd());
    anchors.push_back(f.home_pose);
  }
  rig.state = seed_equilibrium(rig.hand, object, thetas, anchors,
                               Eigen::Vector3d::Zero());
  return rig;
}

// Ball between two flat, parallel, opposing fingertips.
Rig parallel_plates_rig() {
  Rig rig;
  const double r = 0.02, depth = 1.0e-3;
  RigidObject object;
  object.mass = 0.01;
  object.surface =
      reseat_chart(SurfaceModel::sphere(r, "o"), {r, 0, 0});
  object.pose = pose_at({0, 0, 0}, "o");

  for (int i = 0; i < 2; ++i) {
    const double side = (i == 0) ? 1.0 : -1.0;
    FingerModel f;
    f.name = (i == 0) ? "P0" : "P1";
    // Plane outward normal (chart z) faces the ball.
    const Rotation orient =
        Rotation::axis_angle(Eigen::Vector3d::UnitY(), -side * M_PI / 2.0);
    f.home_pose =
        pose_at({side * (r - depth), 0, 0}, f.anchor_frame(), orient);
    f.anchor_to_rest = Transform::identity(f.anchor_frame(), f.rest_frame());
    f.stiffness = default_stiffness(f.rest_frame());
    f.fingertip = SurfaceModel::plane(f.tip_frame());
    rig.hand.push_back(f);
  }
  rig.state = seed_equilibrium(rig.hand, object,
                               {Eigen::VectorXd(), Eigen::VectorXd()},
                               {rig.hand[0].home_pose, rig.hand[1].home_pose},
                               Eigen::Vector3d::Zero());
  return rig;
}

}  // namespace

TEST_CASE("rolling constraint rows") {
  const Rig rig = cylinder_rig(2);
  const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());

  SUBCASE("row structure") {
    for (int i = 0; i < 2; ++i) {
      const Eigen::Vector3d p = rig.state.contacts[i].p_wc;
      Eigen::Matrix<double, 3, 6> expected;
      expected << skew(p), -Eigen::Matrix3d::Identity();
      CHECK((sys.p_rows[i] - expected).cwiseAbs().maxCoeff() == 0.0);
    }
    // Contact at the origin reduces to [0 | -I].
    Eigen::Matrix<double, 3, 6> origin_row;
    origin_row << skew(Eigen::Vector3d::Zero()),
        -Eigen::Matrix3d::Identity();
    CHECK(origin_row.leftCols<3>().isZero(0.0));
  }

  SUBCASE("shared twist has zero residual") {
    std::mt19937_64 rng(301);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector6d v = random_vec6(rng);
      for (int i = 0; i < 2; ++i) {
        CHECK((sys.p_rows[i] * (v - v)).norm() == 0.0);
        CHECK((sys.p_rows[i] * v - sys.p_rows[i] * v).norm() == 0.0);
      }
    }
  }

  SUBCASE("spin about the contact normal is permitted") {
    for (int i = 0; i < 2; ++i) {
      const Eigen::Vector3d p = rig.state.contacts[i].p_wc;
      const Eigen::Vector3d n =
          rig.state.contacts[i].world_to_c1.rotation.matrix().col(2);
      Vector6d spin;
      spin << n, p.cross(n);  // rotation about the normal line through p
      // V_wf = 0, V_wo = spin: the rolling rows see only the relative
      // linear velocity at the contact, which vanishes.
      CHECK((sys.p_rows[i] * (-spin)).norm() < 1e-14);
    }
  }
}

TEST_CASE("assembled dimensions and special blocks") {
  SUBCASE("n = 3 dimensions") {
    const Rig rig = cylinder_rig(3);
    const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
    CHECK(sys.d_f.rows() == 24);
    CHECK(sys.d_f.cols() == 18);
    CHECK(sys.d_o.rows() == 24);
    CHECK(sys.d_o.cols() == 6);
    CHECK(sys.d_a.rows() == 24);
    CHECK(sys.d_a.cols() == 18);
  }

  SUBCASE("gravity rows at p_wo = 0") {
    Rig rig = cylinder_rig(1);
    rig.state.gravity = Eigen::Vector3d(0, 0, -9.81);
    rig.state.object.pose.translation.setZero();
    const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
    Eigen::Matrix<double, 3, 6> expected;
    expected << Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Identity();
    expected = rig.state.object.mass * skew(rig.state.gravity) * expected;
    CHECK((sys.d_o.block<3, 6>(6, 0) - expected).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(sys.d_o.block<3, 6>(9, 0).isZero(0.0));
  }

  SUBCASE("zero preload reduces A and C to the stiffness") {
    Rig rig = cylinder_rig(2);
    // Erase the contact wrenches: W_con = 0.
    for (auto& w : rig.state.contact_wrenches) {
      w.moment.setZero();
      w.force.setZero();
    }
    const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
    for (int i = 0; i < 2; ++i) {
      CHECK((sys.a_blocks[i] - sys.stiffness_world[i]).cwiseAbs().maxCoeff() ==
            0.0);
      CHECK((sys.c_blocks[i] - sys.stiffness_world[i]).cwiseAbs().maxCoeff() ==
            0.0);
      CHECK(sys.b_blocks[i].isZero(0.0));
    }
  }
}

TEST_CASE("contact wrench rate reductions") {
  const Rig rig = cylinder_rig(2);
  const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
  const Twist zero{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), "w"};
  CHECK(contact_wrench_rate(sys, 0, zero, zero, zero).isZero(0.0));
  CHECK(contact_wrench_rate(sys, 1, zero, zero, zero).isZero(0.0));
}

TEST_CASE("forward solve") {
  SUBCASE("equilibrium with zero controls is stationary") {
    const Rig rig = cylinder_rig(3);
    const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
    const MechanicsSolution sol = forward_solve(sys);
    REQUIRE(!sol.singular);
    CHECK(sol.object_twist.vector().norm() < 1e-12);
    for (const Twist& v : sol.fingertip_twists) {
      CHECK(v.vector().norm() < 1e-12);
    }
  }

  SUBCASE("solution satisfies all three constraint families") {
    const Rig rig = cylinder_rig(3);
    std::mt19937_64 rng(307);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd va(18);
      for (int k = 0; k < 18; ++k) va[k] = 0.01 * random_vec6(rng)[k % 6];
      const ConstraintSystem sys = assemble(rig.state, rig.hand, va);
      const MechanicsSolution sol = forward_solve(sys);
      REQUIRE(!sol.singular);
      CHECK((sys.d_fo * sol.raw - sys.beta).norm() <
            1e-9 * (1.0 + sys.beta.norm()));
      const ConstraintResiduals res =
          constraint_residuals(sys, sol.raw, va);
      CHECK(res.rolling < 1e-9);
      CHECK(res.moment_rate < 1e-9);
      CHECK(res.object_rate < 1e-9 * (1.0 + sys.beta.tail<6>().norm()));
    }
  }

  SUBCASE("ball between flat parallel plates is singular") {
    const Rig rig = parallel_plates_rig();
    const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
    const MechanicsSolution sol = forward_solve(sys);
    CHECK(sol.singular);
    CHECK(sol.sigma_min / sol.sigma_max < 1e-10);
    CHECK(sol.raw.size() == 0);
    CHECK_THROWS_AS(inverse_map(sys), SingularSystemError);
  }
}

TEST_CASE("Appendix C dual-route identity") {
  std::mt19937_64 rng(311);
  for (int n : {2, 3, 4}) {
    const Rig rig = cylinder_rig(n);
    const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
    for (int trial = 0; trial < 20; ++trial) {
      // The identity is algebraic: arbitrary twists, not solutions.
      std::vector<Twist> v_f, v_a;
      for (int i = 0; i < n; ++i) {
        v_f.push_back(Twist::from_vector(0.01 * random_vec6(rng), "w"));
        v_a.push_back(Twist::from_vector(0.01 * random_vec6(rng), "w"));
      }
      const Twist v_o = Twist::from_vector(0.01 * random_vec6(rng), "w");

      Vector6d route1 = Vector6d::Zero();
      Vector6d route2 = Vector6d::Zero();
      for (int i = 0; i < n; ++i) {
        // Route 1: transport Fdot^{c1} to the world frame with Eq. 10.
        const Vector6d v_rel = v_f[i].vector() - v_o.vector();
        const Vector6d v_oc1 = sys.rolling_world[i] * v_rel;
        const Twist v_wc1 =
            Twist::from_vector(v_o.vector() + v_oc1, "w");
        const Vector6d fdot_c1 =
            contact_wrench_rate(sys, i, v_f[i], v_o, v_a[i]);
        const WrenchMatrix w =
            WrenchMatrix::from_wrench(rig.state.contact_wrenches[i]);
        route1 += -w.matrix * v_wc1.vector() +
                  adjoint(sys.world_to_c1[i]).transpose().inverse().eval() *
                      Vector6d::Zero() +
                  adjoint(sys.world_to_c1[i].inverse()).transpose() * fdot_c1;
        // Route 2: the collapsed form behind Eq. 23.
        route2 += sys.c_blocks[i] * v_a[i].vector() -
                  sys.stiffness_world[i] * v_f[i].vector();
      }
      CHECK((route1 - route2).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("inverse map round trip") {
  std::mt19937_64 rng(313);
  for (int n : {3, 4}) {
    const Rig rig = cylinder_rig(n);
    const ConstraintSystem sys0 =
        assemble(rig.state, rig.hand, rig.zero_va());
    const InverseMap map = inverse_map(sys0);
    CHECK(map.object_controllable);
    CHECK(map.pi.rows() == 6);
    CHECK(map.pi.cols() == 6 * n);

    // V_a = 0 maps to zero object twist.
    CHECK(object_twist_of(map, rig.zero_va()).vector().norm() == 0.0);

    for (int trial = 0; trial < 30; ++trial) {
      Eigen::VectorXd va(6 * n);
      for (int i = 0; i < n; ++i) va.segment<6>(6 * i) = 0.01 * random_vec6(rng);
      const ConstraintSystem sys = assemble(rig.state, rig.hand, va);
      const MechanicsSolution sol = forward_solve(sys);
      REQUIRE(!sol.singular);
      const Vector6d via_pi = map.pi * va;
      const double rel = (sol.object_twist.vector() - via_pi).norm() /
                         (1e-30 + via_pi.norm());
      CHECK(rel < 1e-8);
    }
  }
}

TEST_CASE("force rate rows") {
  SUBCASE("inactive when forces are comfortable") {
    const Rig rig = cylinder_rig(3);  // ~1.5 N normal, no tangential
    const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
    const InverseMap map = inverse_map(sys);
    const ForceRateConstraints c = force_rate_rows(rig.state, sys, map);
    CHECK(c.rows.empty());
    CHECK(c.psi.size() == 3);
  }

  SUBCASE("normal maintenance activates at low force") {
    const Rig rig = cylinder_rig(3, 0.4e-3);  // ~0.4 N preload
    const ConstraintSystem sys = assemble(rig.state, rig.hand, rig.zero_va());
    const InverseMap map = inverse_map(sys);
    const ForceRateConstraints c = force_rate_rows(rig.state, sys, map);
    REQUIRE(c.rows.size() == 3);
    for (const auto& row : c.rows) {
      CHECK(row.kind == ForceRateRow::Kind::kNormalMaintenance);
    }

    // Psi consistency: the row times V_a equals -f^T fdot with fdot from
    // the forward route (independent composition through forward_solve).
    std::mt19937_64 rng(317);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd va(18);
      for (int i = 0; i < 3; ++i) va.segment<6>(6 * i) = 0.01 * random_vec6(rng);
      const ConstraintSystem sys_va = assemble(rig.state, rig.hand, va);
      const MechanicsSolution sol = forward_solve(sys_va);
      REQUIRE(!sol.singular);
      for (int i = 0; i < 3; ++i) {
        const Vector6d fdot = contact_wrench_rate(
            sys_va, i, sol.fingertip_twists[i], sol.object_twist,
            Twist::from_vector(va.segment<6>(6 * i), "w"));
        const Eigen::Vector3d f =
            contact_frame_wrench(rig.state, i).force;
        const double via_row = c.rows[i].coeffs.dot(va);
        const double via_forward = -f.dot(fdot.tail<3>());
        CHECK(via_row == doctest::Approx(via_forward).epsilon(1e-8));
      }
    }
  }

  SUBCASE("friction cone activates at the boundary with the right sense") {
    Rig rig = cylinder_rig(3);
    // Shear the flexures tangentially (vertically) by moving the anchors
    // up while the fingertips stay on the object: strong tangential force.
    std::vector<Transform> anchors;
    std::vector<Eigen::VectorXd> thetas;
    std::vector<SurfaceModel> tips;
    std::vector<ContactCoordinates> coords;
    for (int i = 0; i < 3; ++i) {
      Transform a = rig.state.fingers[i].anchor_pose;
      a.translation.z() += 1.45e-3;  // tangential/normal ~ 0.97 > mu_max
      anchors.push_back(a);
      thetas.push_back(Eigen::VectorXd());
      tips.push_back(rig.state.fingers[i].tip_surface);
      coords.push_back(ContactCoordinates{rig.state.contacts[i].object_side.u,
                                          rig.state.contacts[i].finger_side.u,
                                          rig.state.contacts[i].phi});
    }
    const GraspState sheared =
        build_state(rig.hand, rig.state.object, thetas, anchors, tips, coords,
                    rig.state.gravity);
    const ConstraintSystem sys = assemble(sheared, rig.hand, rig.zero_va());
    const InverseMap map = inverse_map(sys);
    const ForceRateConstraints c = force_rate_rows(sheared, sys, map);
    int cone_rows = 0;
    for (const auto& row : c.rows) {
      if (row.kind != ForceRateRow::Kind::kFrictionCone) continue;
      ++cone_rows;
      const int i = row.finger;
      const Eigen::Vector3d f = contact_frame_wrench(sheared, i).force;
      const double t = std::hypot(f.x(), f.y());
      const double nz = -f.z();
      REQUIRE(nz > 0.0);
      CHECK(t / nz >= 0.8);

      // Sign oracle: row * V_a must be a positive multiple of the
      // finite-difference rate of the tangential/normal ratio.
      std::mt19937_64 rng(331 + i);
      for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd va(18);
        for (int k = 0; k < 3; ++k)
          va.segment<6>(6 * k) = 0.01 * random_vec6(rng);
        const Eigen::Vector3d fdot = c.psi[i] * va;
        const double eps = 1e-7;
        const Eigen::Vector3d f2 = f + eps * fdot;
        const double ratio0 = t / nz;
        const double ratio1 = std::hypot(f2.x(), f2.y()) / (-f2.z());
        const double fd_rate = (ratio1 - ratio0) / eps;
        const double row_value = row.coeffs.dot(va);
        // Z_con fdot = |f_z|^3 t * d(ratio)/dt
        const double scale = std::pow(nz, 3) * t;
        CHECK(row_value ==
              doctest::Approx(scale * fd_rate).epsilon(1e-4));
      }
    }
    CHECK(cone_rows == 3);
  }
}
