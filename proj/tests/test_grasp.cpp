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

#include "rollgrasp/grasp.hpp"
#include "test_support.hpp"

using namespace rollgrasp;
using testutil::random_vec3;
using testutil::random_vec6;

namespace {

StiffnessMatrix default_stiffness(const FrameId& frame, double rot = 1.0,
                                  double lin = 1000.0) {
  Vector6d diag;
  diag << rot, rot, rot, lin, lin, lin;
  return StiffnessMatrix::from_matrix(diag.asDiagonal(), frame);
}

FingerModel sphere_tip_finger(const std::string& name, double tip_radius,
                              const Transform& home) {
  FingerModel f;
  f.name = name;
  f.home_pose = home;
  f.anchor_to_rest = Transform::identity(f.anchor_frame(), f.rest_frame());
  f.stiffness = default_stiffness(f.rest_frame());
  f.fingertip = SurfaceModel::sphere(tip_radius, f.tip_frame());
  return f;
}

Transform pose_at(const Eigen::Vector3d& p, const FrameId& to,
                  const Rotation& r = Rotation::identity()) {
  Transform t;
  t.rotation = r;
  t.translation = p;
  t.from = "w";
  t.to = to;
  return t;
}

}  // namespace

TEST_CASE("finger jacobian") {
  SUBCASE("single revolute joint about z through the origin") {
    FingerModel f = sphere_tip_finger("j", 0.01, pose_at({0.1, 0, 0}, "j:a"));
    Vector6d axis;
    axis << 0, 0, 1, 0, 0, 0;
    f.screw_axes.push_back(axis);
    Eigen::VectorXd theta(1);
    theta << 0.7;
    const Eigen::MatrixXd j = finger_jacobian(f, theta);
    CHECK((j.col(0) - axis).norm() < 1e-15);
    // Zero joint velocity gives zero twist.
    CHECK((j * Eigen::VectorXd::Zero(1)).norm() == 0.0);
  }

  SUBCASE("finite differences of the anchor pose") {
    std::mt19937_64 rng(211);
    FingerModel f =
        sphere_tip_finger("j", 0.01, pose_at({0.05, 0.02, -0.01}, "j:a"));
    for (int k = 0; k < 4; ++k) {
      const Eigen::Vector3d axis = random_vec3(rng).normalized();
      const Eigen::Vector3d q = random_vec3(rng, 0.1);
      Vector6d s;
      s << axis, q.cross(axis);
      f.screw_axes.push_back(s);
    }
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd theta = Eigen::VectorXd::Random(4);
      Eigen::VectorXd theta_dot = Eigen::VectorXd::Random(4);
      const Eigen::MatrixXd j = finger_jacobian(f, theta);
      const double h = 1e-6;
      const Eigen::Matrix4d tp = fk_anchor(f, theta + h * theta_dot).matrix();
      const Eigen::Matrix4d tm = fk_anchor(f, theta - h * theta_dot).matrix();
      const Eigen::Matrix4d v_hat =
          ((tp - tm) / (2 * h)) * fk_anchor(f, theta).matrix().inverse();
      Vector6d v_fd;
      v_fd.head<3>() = unskew(Eigen::Matrix3d(
          0.5 * (v_hat.topLeftCorner<3, 3>() -
                 v_hat.topLeftCorner<3, 3>().transpose())));
      v_fd.tail<3>() = v_hat.topRightCorner<3, 1>();
      CHECK((j * theta_dot - v_fd).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("flexure wrench") {
  FingerModel f = sphere_tip_finger("t", 0.01, pose_at({0, 0, 0}, "t:a"));
  FingerState fs;
  fs.anchor_pose = pose_at({0, 0, 0}, "t:a");
  fs.rest_pose = pose_at({0, 0, 0}, "t:f0");
  fs.tip_surface = f.fingertip;

  SUBCASE("relaxed flexure gives zero wrench") {
    fs.flexure_disp.setZero();
    const Wrench w = flexure_wrench(fs, f.stiffness);
    CHECK(w.vector().isZero(0.0));
  }

  SUBCASE("pure translation along z: Hooke's law with the Eq. 17 sign") {
    const double delta = 1.3e-3;
    fs.flexure_disp << 0, 0, 0, 0, 0, delta;
    const Wrench w = flexure_wrench(fs, f.stiffness);
    CHECK(w.force.z() == doctest::Approx(-1000.0 * delta));
    CHECK(w.force.head<2>().norm() == 0.0);
    CHECK(w.moment.norm() == 0.0);
  }

  SUBCASE("hard displacement limit") {
    fs.flexure_disp << 0, 0, 0, 0.3, 0, 0;
    CHECK_THROWS_AS(flexure_wrench(fs, f.stiffness), FlexureLimitError);
    fs.flexure_disp << 0, 0, 0, 0.06, 0, 0;
    CHECK(flexure_displacement_warning(fs));
  }
}

TEST_CASE("flexure power balance along a trajectory") {
  // F_spr^T V_{f0 f} equals d/dt of the stored elastic energy. F = K X is
  // the small-displacement spring law, so the balance is exact only as
  // ||X|| -> 0; at the operating magnitudes of the scenarios (millimetre
  // translations, milliradian rotations) it holds below 1e-6 W.
  std::mt19937_64 rng(223);
  const StiffnessMatrix k = default_stiffness("f0");
  for (int trial = 0; trial < 20; ++trial) {
    Vector6d x0 = random_vec6(rng, 1.0), x1 = random_vec6(rng, 1.0);
    x0.head<3>() *= 5e-4;   // rad
    x0.tail<3>() *= 1e-3;   // m
    x1.head<3>() *= 5e-4;   // rad/s
    x1.tail<3>() *= 1e-3;   // m/s
    const auto x_of = [&](double t) -> Vector6d { return x0 + t * x1; };
    const double t = 0.4, h = 1e-5;

    const Vector6d x = x_of(t);
    const Vector6d f_spr = k.matrix * x;
    // Spring twist from the pose trajectory exp(X(t)).
    const Eigen::Matrix4d tp = exp_pose(x_of(t + h), "f0", "f").matrix();
    const Eigen::Matrix4d tm = exp_pose(x_of(t - h), "f0", "f").matrix();
    const Eigen::Matrix4d v_hat =
        ((tp - tm) / (2 * h)) * exp_pose(x, "f0", "f").matrix().inverse();
    Vector6d v;
    v.head<3>() = unskew(Eigen::Matrix3d(
        0.5 * (v_hat.topLeftCorner<3, 3>() -
               v_hat.topLeftCorner<3, 3>().transpose())));
    v.tail<3>() = v_hat.topRightCorner<3, 1>();

    const double energy_rate_fd =
        (0.5 * x_of(t + h).dot(k.matrix * x_of(t + h)) -
         0.5 * x_of(t - h).dot(k.matrix * x_of(t - h))) /
        (2 * h);
    CHECK(std::abs(f_spr.dot(v) - energy_rate_fd) < 1e-6);

    // With the exact coordinate rate the balance is an identity at any
    // magnitude: F_spr^T Xdot = dE/dt with Xdot = Jl^{-1}(X) V.
    const Vector6d xdot = displacement_rate(x, v);
    CHECK(std::abs(f_spr.dot(xdot) - energy_rate_fd) <
          1e-9 * (1.0 + std::abs(energy_rate_fd)));
    CHECK((xdot - x1).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("external wrench and its rate") {
  RigidObject obj;
  obj.mass = 0.25;
  obj.surface = SurfaceModel::sphere(0.03, "o");
  obj.pose = pose_at({0.1, -0.2, 0.05}, "o");
  const Eigen::Vector3d g(0, 0, -9.81);

  const Wrench f = external_wrench(obj, g);
  CHECK((f.force - obj.mass * g).norm() < 1e-15);
  CHECK((f.moment - obj.pose.translation.cross(obj.mass * g)).norm() < 1e-15);

  SUBCASE("zero twist gives zero rate") {
    const Twist v{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), "w"};
    CHECK(external_wrench_rate(obj, g, v).isZero(0.0));
  }

  SUBCASE("pure linear velocity at the origin") {
    RigidObject at_origin = obj;
    at_origin.pose.translation.setZero();
    const Eigen::Vector3d vel(0.3, -0.2, 0.1);
    const Twist v{Eigen::Vector3d::Zero(), vel, "w"};
    const Vector6d rate = external_wrench_rate(at_origin, g, v);
    CHECK((rate.head<3>() + at_origin.mass * skew(g) * vel).norm() < 1e-15);
    CHECK(rate.tail<3>().isZero(0.0));
  }

  SUBCASE("finite differences along a trajectory") {
    std::mt19937_64 rng(227);
    for (int trial = 0; trial < 20; ++trial) {
      const testutil::PoseTrajectory traj =
          testutil::PoseTrajectory::random(rng, "w", "o");
      const double t = 0.1, h = 1e-6;
      const auto wrench_at = [&](double time) {
        RigidObject o = obj;
        o.pose = traj.at(time);
        return external_wrench(o, g).vector();
      };
      const Vector6d fd = (wrench_at(t + h) - wrench_at(t - h)) / (2 * h);
      RigidObject o = obj;
      o.pose = traj.at(t);
      const Vector6d rate = external_wrench_rate(o, g, traj.fd_twist(t));
      CHECK((fd - rate).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

namespace {

// Two sphere tips squeezing a disk-like cylinder from +y and -y, the
// fig.-6 style planar grasp. Penetration depths set the preload.
struct TwoFingerRig {
  std::vector<FingerModel> hand;
  RigidObject object;
  std::vector<Eigen::VectorXd> thetas;
  std::vector<Transform> anchors;
};

TwoFingerRig make_disk_rig(double depth_left, double depth_right) {
  TwoFingerRig rig;
  const double disk_r = 0.015, tip_r = 0.0075;
  rig.object.mass = 0.01;
  rig.object.surface = SurfaceModel::cylinder(disk_r, 0.01, "o");
  rig.object.pose = pose_at({0, 0, 0}, "o");

  const double y_left = disk_r + tip_r - depth_left;
  const double y_right = -(disk_r + tip_r - depth_right);
  rig.hand.push_back(
      sphere_tip_finger("L", tip_r, pose_at({0, y_left, 0}, "L:a")));
  rig.hand.push_back(
      sphere_tip_finger("R", tip_r, pose_at({0, y_right, 0}, "R:a")));
  rig.thetas = {Eigen::VectorXd(), Eigen::VectorXd()};
  rig.anchors = {rig.hand[0].home_pose, rig.hand[1].home_pose};
  return rig;
}

}  // namespace

TEST_CASE("settled fingertip carries a pure normal force") {
  const TwoFingerRig rig = make_disk_rig(1.5e-3, 1.5e-3);
  const SettleResult s = settle_fingertip(
      rig.object.surface, rig.object.pose, rig.hand[0].fingertip,
      rig.hand[0].home_pose * Transform::identity("L:a", "L:f0"),
      rig.hand[0].stiffness);
  CHECK(s.normal_force == doctest::Approx(1.5).epsilon(0.05));
  // The flexure wrench resolved at the contact has no moment and no
  // tangential force.
  const Vector6d f_spr_w =
      adjoint((rig.hand[0].home_pose * Transform::identity("L:a", "L:f0"))
                  .inverse())
          .transpose() *
      (rig.hand[0].stiffness.matrix * s.flexure_disp);
  const ContactPair pair =
      make_contact_pair(rig.object.surface, rig.object.pose,
                        rig.hand[0].fingertip, s.fingertip_pose);
  const Vector6d f_c1 = adjoint(pair.world_to_c1).transpose() * (-f_spr_w);
  CHECK(f_c1.head<3>().norm() < 1e-10);             // moment free
  CHECK(f_c1.segment<2>(3).norm() < 1e-10);         // no tangential force
  CHECK(-f_c1[5] == doctest::Approx(s.normal_force));  // compressive
}

TEST_CASE("equilibrium seeding") {
  SUBCASE("symmetric squeeze balances at the initial pose") {
    const TwoFingerRig rig = make_disk_rig(1.5e-3, 1.5e-3);
    const GraspState state =
        seed_equilibrium(rig.hand, rig.object, rig.thetas, rig.anchors,
                         Eigen::Vector3d::Zero());
    CHECK(equilibrium_residual(state).norm() < 1e-9);
    CHECK(state.object.pose.translation.norm() < 1e-9);
    // Equal and opposite forces through the object center.
    const Eigen::Vector3d f0 = state.contact_wrenches[0].force;
    const Eigen::Vector3d f1 = state.contact_wrenches[1].force;
    CHECK((f0 + f1).norm() < 1e-9);
    CHECK(f0.norm() == doctest::Approx(1.5).epsilon(0.05));
    // Gap exactly closed, moment-free contact wrenches.
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(state.contacts[i].gap) < 1e-9);
      CHECK(contact_frame_wrench(state, i).moment.norm() < 1e-9);
      const ContactForceSplit split = contact_force_split(state, i);
      CHECK(split.normal > 1.0);
      CHECK(split.tangential < 1e-9);
    }
  }

  SUBCASE("asymmetric preloads shift the object") {
    const TwoFingerRig rig = make_disk_rig(2.0e-3, 1.0e-3);
    const GraspState state =
        seed_equilibrium(rig.hand, rig.object, rig.thetas, rig.anchors,
                         Eigen::Vector3d::Zero());
    CHECK(equilibrium_residual(state).norm() < 1e-9);
    // The disk must move toward the weaker finger by half the difference.
    CHECK(state.object.pose.translation.y() ==
          doctest::Approx(-0.5e-3).epsilon(0.02));
  }

  SUBCASE("state invariants hold after seeding") {
    const TwoFingerRig rig = make_disk_rig(1.2e-3, 1.8e-3);
    const GraspState state =
        seed_equilibrium(rig.hand, rig.object, rig.thetas, rig.anchors,
                         Eigen::Vector3d::Zero());
    for (int i = 0; i < 2; ++i) {
      // T_wf = T_wf0 exp(X) within 1e-9.
      const Transform recon =
          state.fingers[i].rest_pose *
          exp_pose(state.fingers[i].flexure_disp,
                   state.fingers[i].rest_pose.to,
                   state.fingers[i].fingertip_pose.to);
      CHECK((recon.matrix() - state.fingers[i].fingertip_pose.matrix())
                .cwiseAbs()
                .maxCoeff() < 1e-9);
      validate_contact_pair(state.contacts[i], 1e-8);
    }
  }

  SUBCASE("gravity along the contact normals can be seeded directly") {
    // Sphere resting between two vertical-axis tips: normal forces can
    // carry the weight without tangential preloads.
    std::vector<FingerModel> hand;
    RigidObject obj;
    obj.mass = 0.02;
    // Chart equator through the vertical contact axis.
    obj.surface =
        reseat_chart(SurfaceModel::sphere(0.02, "o"), {0, 0, 0.02});
    obj.pose = pose_at({0, 0, 0}, "o");
    hand.push_back(sphere_tip_finger(
        "B", 0.0075,
        pose_at({0, 0, -(0.0275 - 1.5e-3)}, "B:a")));
    hand.push_back(sphere_tip_finger(
        "T", 0.0075, pose_at({0, 0, 0.0275 - 1.3e-3}, "T:a")));
    // Keep the tip chart poles away from the contact axis.
    for (auto& f : hand)
      f.fingertip = reseat_chart(f.fingertip, Eigen::Vector3d(0, 0, 0.0075));
    const GraspState state = seed_equilibrium(
        hand, obj, {Eigen::VectorXd(), Eigen::VectorXd()},
        {hand[0].home_pose, hand[1].home_pose}, {0, 0, -9.81});
    CHECK(equilibrium_residual(state).norm() < 1e-9);
    // The bottom finger carries the weight on top of the squeeze.
    const ContactForceSplit bottom = contact_force_split(state, 0);
    const ContactForceSplit top = contact_force_split(state, 1);
    CHECK(bottom.normal - top.normal ==
          doctest::Approx(0.02 * 9.81).epsilon(1e-6));
  }

  SUBCASE("fingers out of reach fail to seed") {
    const TwoFingerRig rig = make_disk_rig(-1e-3, 1.5e-3);  // 1 mm clearance
    CHECK_THROWS_AS(
        seed_equilibrium(rig.hand, rig.object, rig.thetas, rig.anchors,
                         Eigen::Vector3d::Zero()),
        SeedingError);
  }
}
