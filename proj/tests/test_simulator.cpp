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

#include "rollgrasp/simulator.hpp"
#include "test_support.hpp"

using namespace rollgrasp;

namespace {

StiffnessMatrix default_stiffness(const FrameId& frame) {
  Vector6d diag;
  diag << 1.0, 1.0, 1.0, 1000.0, 1000.0, 1000.0;
  return StiffnessMatrix::from_matrix(diag.asDiagonal(), frame);
}

FingerModel jointless_finger(const std::string& name, double tip_radius,
                             const Eigen::Vector3d& anchor_position,
                             const Eigen::Vector3d& contact_direction) {
  FingerModel f;
  f.name = name;
  f.home_pose = Transform{Rotation::identity(), anchor_position, "w",
                          f.anchor_frame()};
  f.anchor_to_rest = Transform::identity(f.anchor_frame(), f.rest_frame());
  f.stiffness = default_stiffness(f.rest_frame());
  f.fingertip = reseat_chart(SurfaceModel::sphere(tip_radius, f.tip_frame()),
                             tip_radius * contact_direction);
  return f;
}

// Two fingers squeeze a disk (short cylinder, vertical axis) and advance
// antiparallel, rolling the disk in place. Gravity acts along the axis.
Scenario fig6_scenario() {
  Scenario s;
  s.name = "fig6_disk";
  const double disk_r = 0.015, tip_r = 0.0075, depth = 1.5e-3;
  s.object.mass = 0.02;
  s.object.surface = SurfaceModel::cylinder(disk_r, 0.01, "o");
  s.object.pose = Transform{Rotation::identity(), {0, 0, 0}, "w", "o"};
  s.hand.push_back(jointless_finger(
      "L", tip_r, {0.0, disk_r + tip_r - depth, 0.0}, {0, -1, 0}));
  s.hand.push_back(jointless_finger(
      "R", tip_r, {0.0, -(disk_r + tip_r - depth), 0.0}, {0, 1, 0}));
  s.initial_joints = {Eigen::VectorXd(), Eigen::VectorXd()};
  Vector6d advance = Vector6d::Zero();
  advance[3] = 0.002;  // linear x
  s.scripts.resize(2);
  s.scripts[0].push_back({0.0, 3.5, advance});
  s.scripts[1].push_back({0.0, 3.5, -advance});
  s.gravity = Eigen::Vector3d(0, 0, -9.81);
  s.duration = 3.5;
  s.dt = 1e-3;
  s.report_axis = Eigen::Vector3d::UnitZ();
  return s;
}

FingerModel jointed_finger(const std::string& name, double azimuth,
                           double grasp_radius, double tip_radius) {
  const Eigen::Vector3d radial(std::cos(azimuth), std::sin(azimuth), 0.0);
  const Eigen::Vector3d tangent = Eigen::Vector3d::UnitZ().cross(radial);
  const Eigen::Vector3d base = 0.08 * radial;
  FingerModel f;
  f.name = name;
  auto screw = [](const Eigen::Vector3d& axis, const Eigen::Vector3d& q) {
    Vector6d s;
    s << axis, q.cross(axis);
    return s;
  };
  f.screw_axes.push_back(screw(Eigen::Vector3d::UnitZ(), base));
  f.screw_axes.push_back(screw(tangent, base));
  f.screw_axes.push_back(screw(tangent, base - 0.025 * radial));
  f.screw_axes.push_back(screw(tangent, base - 0.05 * radial));
  f.home_pose = Transform{Rotation::identity(), grasp_radius * radial, "w",
                          f.anchor_frame()};
  f.anchor_to_rest = Transform::identity(f.anchor_frame(), f.rest_frame());
  f.stiffness = default_stiffness(f.rest_frame());
  f.fingertip = reseat_chart(SurfaceModel::sphere(tip_radius, f.tip_frame()),
                             -tip_radius * radial);
  return f;
}

// Three jointed fingers twist a vertical cylinder about its axis under
// closed-loop control.
Scenario cylinder_scenario(double angle_deg = 30.0, double move_s = 5.0,
                           double hold_s = 5.0) {
  Scenario s;
  s.name = "cylinder_twist";
  const double r_cyl = 0.025, tip_r = 0.008, depth = 1.5e-3;
  s.object.mass = 0.05;
  s.object.surface = SurfaceModel::cylinder(r_cyl, 0.06, "o");
  s.object.pose = Transform{Rotation::identity(), {0, 0, 0}, "w", "o"};
  for (int i = 0; i < 3; ++i) {
    s.hand.push_back(jointed_finger("f" + std::to_string(i),
                                    2.0 * M_PI * i / 3,
                                    r_cyl + tip_r - depth, tip_r));
    s.initial_joints.push_back(Eigen::VectorXd::Zero(4));
  }
  s.closed_loop = true;
  s.controller.use_qp = true;
  s.target.axis_point = Eigen::Vector3d::Zero();
  s.target.axis_direction = Eigen::Vector3d::UnitZ();
  s.target.angle = angle_deg * M_PI / 180.0;
  s.target.move_duration = move_s;
  s.gravity = Eigen::Vector3d(0, 0, -9.81);
  s.object_constraint =
      ObjectAxisConstraint{Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ()};
  s.duration = move_s + hold_s;
  s.dt = 1e-3;
  s.report_axis = Eigen::Vector3d::UnitZ();
  return s;
}

Scenario parallel_plates_scenario() {
  Scenario s;
  s.name = "degenerate_parallel_plates";
  const double r = 0.02, depth = 1.0e-3;
  s.object.mass = 0.01;
  s.object.surface = reseat_chart(SurfaceModel::sphere(r, "o"), {r, 0, 0});
  s.object.pose = Transform{Rotation::identity(), {0, 0, 0}, "w", "o"};
  for (int i = 0; i < 2; ++i) {
    const double side = (i == 0) ? 1.0 : -1.0;
    FingerModel f;
    f.name = (i == 0) ? "P0" : "P1";
    f.home_pose = Transform{
        Rotation::axis_angle(Eigen::Vector3d::UnitY(), -side * M_PI / 2.0),
        {side * (r - depth), 0, 0}, "w", f.anchor_frame()};
    f.anchor_to_rest = Transform::identity(f.anchor_frame(), f.rest_frame());
    f.stiffness = default_stiffness(f.rest_frame());
    f.fingertip = SurfaceModel::plane(f.tip_frame());
    s.hand.push_back(f);
    s.initial_joints.push_back(Eigen::VectorXd());
  }
  s.scripts.resize(2);
  s.duration = 0.25;
  s.dt = 1e-3;
  return s;
}

}  // namespace

TEST_CASE("enforce_object_constraint") {
  const ObjectAxisConstraint axis{Eigen::Vector3d(0, 0, 0.1),
                                  Eigen::Vector3d::UnitZ()};
  SUBCASE("in-subspace twists pass unchanged") {
    Vector6d rot;
    rot << 0, 0, 0.5, Eigen::Vector3d(0, 0, 0.1).cross(
                          Eigen::Vector3d(0, 0, 0.5));
    const ConstraintEnforcement e = enforce_object_constraint(rot, axis, true);
    CHECK((e.projected - rot).norm() < 1e-12);
    CHECK(e.removed.norm() < 1e-12);
    Vector6d slide = Vector6d::Zero();
    slide[5] = 0.2;
    CHECK(enforce_object_constraint(slide, axis, true).removed.norm() <
          1e-12);
  }
  SUBCASE("perpendicular translation is rejected in strict mode") {
    Vector6d bad = Vector6d::Zero();
    bad[3] = 0.1;
    CHECK_THROWS_AS(enforce_object_constraint(bad, axis, true),
                    InvariantError);
    const ConstraintEnforcement e = enforce_object_constraint(bad, axis, false);
    CHECK(e.projected.norm() < 1e-12);
    CHECK((e.removed - bad).norm() < 1e-12);
  }
}

TEST_CASE("zero controls from equilibrium leave the state fixed") {
  Scenario s = fig6_scenario();
  s.scripts[0].clear();
  s.scripts[1].clear();
  s.duration = 0.05;
  Simulator sim(s);
  const Transform initial = sim.state().object.pose;
  const TrajectoryRecord rec = sim.run();
  CHECK(rec.summary.completed);
  CHECK((rec.steps.back().object_pose.matrix() - initial.matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  CHECK(rec.summary.max_equilibrium_residual < 1e-6);
}

TEST_CASE("fig6 disk rolls in place") {
  const Scenario s = fig6_scenario();
  const TrajectoryRecord rec = run_scenario(s);
  REQUIRE(rec.summary.completed);
  CHECK(rec.summary.valid);

  // The disk rotates well past 20 degrees while staying centred.
  CHECK(std::abs(rec.summary.rotation_angle) > 20.0 * M_PI / 180.0);
  CHECK(rec.summary.center_displacement < 0.1 * 0.015);

  // Symmetric fingertip compliance within 5 percent.
  REQUIRE(rec.summary.max_flexure_disp.size() == 2);
  const double dl = rec.summary.max_flexure_disp[0];
  const double dr = rec.summary.max_flexure_disp[1];
  CHECK(std::abs(dl - dr) / std::max(dl, dr) < 0.05);

  // Conservation invariants.
  CHECK(rec.summary.max_reprojection_gap < 1e-6);
  CHECK(rec.summary.max_equilibrium_residual < 1e-3);
  CHECK(rec.summary.max_moment_residual < 1e-6);
  CHECK(rec.summary.arc_length_mismatch < 0.01);
  CHECK(rec.summary.energy_balance_error < 0.01);
  CHECK(!rec.summary.sigma_jump_flagged);

  // Time is monotone and every step is recorded.
  REQUIRE(rec.steps.size() == 3501);
  for (size_t k = 1; k < rec.steps.size(); ++k) {
    CHECK(rec.steps[k].t > rec.steps[k - 1].t);
  }
}

TEST_CASE("refinement halves the per-step drift") {
  Scenario s = fig6_scenario();
  s.duration = 0.4;
  const RefinementStudy study = run_refinement_study(s);
  REQUIRE(study.dts.size() == 3);
  // Residuals shrink under dt refinement.
  CHECK(study.max_equilibrium_residuals[1] <
        study.max_equilibrium_residuals[0]);
  CHECK(study.max_equilibrium_residuals[2] <
        study.max_equilibrium_residuals[1]);
  CHECK(study.max_reprojection_gaps[1] < study.max_reprojection_gaps[0]);
  CHECK(study.max_reprojection_gaps[2] < study.max_reprojection_gaps[1]);
}

TEST_CASE("contact wrench rate matches the simulator finite difference") {
  Scenario s = fig6_scenario();
  s.dt = 1e-5;
  Simulator sim(s);
  // March to a state with motion, then finite-difference around it.
  Eigen::VectorXd va(12);
  va.setZero();
  va[3] = 0.002;
  va[9] = -0.002;
  for (int k = 0; k < 10; ++k) sim.step(va, s.dt);

  const GraspState before = sim.state();
  const ConstraintSystem sys = assemble(before, s.hand, va);
  const MechanicsSolution sol = forward_solve(sys);
  REQUIRE(!sol.singular);

  std::vector<Vector6d> f0(2);
  for (int i = 0; i < 2; ++i) f0[i] = contact_frame_wrench(before, i).vector();
  sim.step(va, s.dt);
  const GraspState after = sim.state();

  for (int i = 0; i < 2; ++i) {
    const Vector6d f1 = contact_frame_wrench(after, i).vector();
    const Vector6d fd = (f1 - f0[i]) / s.dt;
    const Vector6d predicted = contact_wrench_rate(
        sys, i, sol.fingertip_twists[i], sol.object_twist,
        Twist::from_vector(va.segment<6>(6 * i), "w"));
    CHECK((fd - predicted).norm() < 1e-4 * (1.0 + predicted.norm()));
  }
}

TEST_CASE("cylinder twist closed loop") {
  // Shortened variant for the unit suite; the acceptance suite runs the
  // full 30-degree, 10-second task.
  const Scenario s = cylinder_scenario(12.0, 1.2, 0.8);
  const TrajectoryRecord rec = run_scenario(s);
  REQUIRE(rec.summary.completed);
  CHECK(rec.summary.valid);
  CHECK(rec.summary.tracking_error_at_move_end < 2.0 * M_PI / 180.0);
  CHECK(rec.summary.hold_drift < 0.5 * M_PI / 180.0);
  CHECK(rec.summary.min_normal_force > 0.5);
  CHECK(rec.summary.max_normal_force < 5.0);
  CHECK(rec.summary.axis_deviation < 1e-6);
  CHECK(rec.summary.max_reprojection_gap < 1e-6);
  CHECK(rec.summary.max_equilibrium_residual < 1e-3);

  // The contact point wanders over the fingertip dome but the trace stays
  // connected: consecutive samples are close.
  for (size_t k = 1; k < rec.steps.size(); ++k) {
    const Eigen::Vector3d prev = rec.steps[k - 1].fingers[0].contact_point;
    const Eigen::Vector3d cur = rec.steps[k].fingers[0].contact_point;
    CHECK((cur - prev).norm() < 1e-4);
  }
}

TEST_CASE("ball between parallel plates halts singular at step zero") {
  const Scenario s = parallel_plates_scenario();
  const TrajectoryRecord rec = run_scenario(s);
  CHECK(!rec.summary.completed);
  CHECK(rec.summary.exit_code == 4);
  REQUIRE(!rec.events.empty());
  CHECK(rec.events[0].kind == SimEventKind::kSingularSystem);
  CHECK(rec.steps.size() == 1);  // initial row only
}

TEST_CASE("desired twists outside the constraint subspace are rejected") {
  Scenario s = cylinder_scenario(10.0, 1.0, 0.0);
  s.target.axis_direction = Eigen::Vector3d::UnitX();  // not the guide axis
  Simulator sim(s);
  CHECK_THROWS_AS(sim.run(), InvariantError);
}
