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

#include "rollgrasp/simulator.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rollgrasp {

const char* to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::kContactBreak:
      return "contact_break";
    case SimEventKind::kFrictionViolation:
      return "friction_violation";
    case SimEventKind::kSingularSystem:
      return "singular_system";
    case SimEventKind::kChartReseat:
      return "chart_reseat";
    case SimEventKind::kConstraintInfeasible:
      return "constraint_infeasible";
  }
  return "unknown";
}

ConstraintEnforcement enforce_object_constraint(
    const Vector6d& twist, const ObjectAxisConstraint& constraint,
    bool strict) {
  const Eigen::Vector3d d = constraint.direction.normalized();
  Eigen::Matrix<double, 6, 2> basis;
  basis.col(0) << d, constraint.point.cross(d);  // rotation about the axis
  basis.col(1) << Eigen::Vector3d::Zero(), d;    // translation along it
  const Eigen::Matrix2d gram = basis.transpose() * basis;
  const Eigen::Vector2d coords =
      gram.ldlt().solve(basis.transpose() * twist);
  ConstraintEnforcement result;
  result.projected = basis * coords;
  result.removed = twist - result.projected;
  if (strict && result.removed.norm() > 1e-9 * (1.0 + twist.norm())) {
    throw InvariantError(
        "requested object twist lies outside the constraint subspace "
        "(out-of-subspace norm " +
        std::to_string(result.removed.norm()) + ")");
  }
  return result;
}

Transform TargetSchedule::desired_pose(const Transform& initial_pose,
                                       double t) const {
  const double phase =
      (move_duration > 0.0) ? std::min(t / move_duration, 1.0) : 1.0;
  const Eigen::Vector3d d = axis_direction.normalized();
  Vector6d screw;
  screw << d, axis_point.cross(d);
  return (exp_pose((angle * phase * screw).eval(), "w", "w") * initial_pose)
      .renormalized();
}

Vector6d TargetSchedule::desired_twist(double t) const {
  if (move_duration <= 0.0 || t >= move_duration) return Vector6d::Zero();
  const Eigen::Vector3d d = axis_direction.normalized();
  Vector6d screw;
  screw << d, axis_point.cross(d);
  return (angle / move_duration) * screw;
}

namespace {

Eigen::Vector3d body_contact_point(const Transform& body_pose,
                                   const ContactPair& pair, bool object_side) {
  const Eigen::Vector3d world = object_side
                                    ? pair.world_to_c1.translation
                                    : pair.world_to_c2.translation;
  return body_pose.inverse() * world;
}

double elastic_energy(const GraspState& state,
                      const std::vector<FingerModel>& hand) {
  double e = 0.0;
  for (size_t i = 0; i < hand.size(); ++i) {
    const Vector6d& x = state.fingers[i].flexure_disp;
    e += 0.5 * x.dot(hand[i].stiffness.matrix * x);
  }
  return e;
}

double potential_energy(const GraspState& state) {
  return -state.object.mass *
         state.gravity.dot(state.object.pose.translation);
}

}  // namespace

Simulator::Simulator(const Scenario& scenario) : scenario_(scenario) {
  const size_t n = scenario_.hand.size();
  if (scenario_.duration <= 0.0 || scenario_.dt <= 0.0) {
    throw InvariantError("scenario duration and step size must be positive");
  }
  std::vector<Eigen::VectorXd> thetas = scenario_.initial_joints;
  if (thetas.empty()) thetas.assign(n, Eigen::VectorXd());
  std::vector<Transform> anchors;
  for (size_t i = 0; i < n; ++i) {
    anchors.push_back(thetas[i].size() > 0
                          ? fk_anchor(scenario_.hand[i], thetas[i])
                          : scenario_.hand[i].home_pose);
  }

  // Phase A: zero-gravity equilibrium from settled (purely normal) forces.
  state_ = seed_equilibrium(scenario_.hand, scenario_.object, thetas, anchors,
                            Eigen::Vector3d::Zero());
  arc_object_.assign(n, 0.0);
  arc_tip_.assign(n, 0.0);

  // Phase B: quasistatic gravity ramp via the constraint system itself;
  // settled forces cannot carry gravity components tangent to the
  // contacts, the ramp shears the flexures until they can.
  if (scenario_.gravity.norm() > 0.0) {
    seeding_mode_ = true;
    const int steps = std::max(scenario_.seed_ramp_steps, 1);
    const Eigen::Vector3d dg = scenario_.gravity / steps;
    const double ramp_dt = 1e-3;
    const Eigen::VectorXd va0 = Eigen::VectorXd::Zero(6 * n);
    for (int k = 0; k < steps; ++k) {
      Vector6d rate;
      rate.head<3>() = state_.object.mass *
                       skew(state_.object.pose.translation) * (dg / ramp_dt);
      rate.tail<3>() = state_.object.mass * dg / ramp_dt;
      const StepOutcome out = step(va0, ramp_dt, rate);
      if (out.halted) {
        throw SeedingError("gravity ramp hit a terminal event: " +
                           (out.events.empty() ? std::string("unknown")
                                               : out.events[0].detail));
      }
      state_.gravity += dg;
    }
    // A short settling tail lets the stabilized solve pull the residual
    // down to the state-validity tolerance.
    for (int k = 0; k < 50; ++k) {
      if (equilibrium_residual(state_).norm() <
          0.1 * scenario_.tolerances.state_validity) {
        break;
      }
      const StepOutcome out = step(va0, ramp_dt);
      if (out.halted) throw SeedingError("settling tail hit a terminal event");
    }
    const double res = equilibrium_residual(state_).norm();
    if (res > scenario_.tolerances.state_validity) {
      throw SeedingError("post-ramp equilibrium residual " +
                         std::to_string(res) + " exceeds the validity bound");
    }
    seeding_mode_ = false;
  }

  arc_object_.assign(n, 0.0);
  arc_tip_.assign(n, 0.0);
  anchor_work_ = 0.0;
  sigma_jump_ = false;
  previous_sigma_min_ = -1.0;
  initial_elastic_energy_ = elastic_energy(state_, scenario_.hand);
  initial_potential_energy_ = potential_energy(state_);
  time_ = 0.0;
}

namespace {

// Stabilizing right-hand side: pulls the contact-moment and equilibrium
// residuals back to zero with time constant dt, so integration drift does
// not accumulate.
Eigen::VectorXd stabilization_rhs(const ConstraintSystem& sys,
                                  const GraspState& state, double dt) {
  const int n = sys.finger_count;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(6 * (n + 1));
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d moment = contact_frame_wrench(state, i).moment;
    rhs.segment<3>(6 * i) -=
        (1.0 / dt) * (sys.world_to_c1[i].rotation.matrix() * moment);
  }
  rhs.segment<6>(6 * n) += (1.0 / dt) * equilibrium_residual(state);
  return rhs;
}

}  // namespace

Simulator::StepOutcome Simulator::step(
    const Eigen::VectorXd& anchor_twists, double dt,
    const Vector6d& extra_external_rate,
    const std::vector<Transform>* next_anchors) {
  const int n = static_cast<int>(scenario_.hand.size());
  StepOutcome outcome;

  const ConstraintSystem sys = assemble(state_, scenario_.hand, anchor_twists);

  Eigen::VectorXd rhs = sys.beta + stabilization_rhs(sys, state_, dt);
  rhs.segment<6>(6 * n) += extra_external_rate;

  // The seeding ramp may start exactly on a quasistatic indeterminacy
  // (e.g. the two-contact spin); the least-squares solve leaves such free
  // motions unexcited instead of refusing.
  const MechanicsSolution sol = seeding_mode_
                                    ? solve_system_least_squares(sys, rhs)
                                    : solve_system(sys, rhs);
  outcome.sigma_min = sol.sigma_min;
  if (sol.singular) {
    outcome.events.push_back(
        {SimEventKind::kSingularSystem, time_, -1,
         "sigma_min/sigma_max = " +
             std::to_string(sol.sigma_min / std::max(sol.sigma_max, 1e-300))});
    outcome.halted = true;
    return outcome;
  }
  if (previous_sigma_min_ > 0.0 &&
      sol.sigma_min < 1e-3 * previous_sigma_min_) {
    sigma_jump_ = true;
  }
  previous_sigma_min_ = sol.sigma_min;

  // Advance anchors: by the commanded twists, or to the poses implied by
  // the integrated joint positions.
  std::vector<Transform> anchors;
  std::vector<Eigen::VectorXd> thetas;
  for (int i = 0; i < n; ++i) {
    thetas.push_back(state_.fingers[i].theta);
    if (next_anchors) {
      anchors.push_back((*next_anchors)[i]);
    } else {
      const Vector6d va_i = anchor_twists.segment<6>(6 * i);
      anchors.push_back(
          (exp_pose((dt * va_i).eval(), "w", "w") * state_.fingers[i].anchor_pose)
              .renormalized());
    }
  }

  // Advance object and fingertips by the solved twists.
  RigidObject object = state_.object;
  object.pose = (exp_pose((dt * sol.object_twist.vector()).eval(), "w", "w") *
                 object.pose)
                    .renormalized();

  std::vector<Transform> tip_candidates;
  for (int i = 0; i < n; ++i) {
    tip_candidates.push_back(
        (exp_pose((dt * sol.fingertip_twists[i].vector()).eval(), "w", "w") *
         state_.fingers[i].fingertip_pose)
            .renormalized());
  }

  // Cache pre-step quantities for arc-length and energy accounting.
  std::vector<Eigen::Vector3d> p1_old(n), p2_old(n);
  std::vector<Vector6d> wrench_old(n);
  for (int i = 0; i < n; ++i) {
    p1_old[i] = body_contact_point(state_.object.pose, state_.contacts[i],
                                   true);
    p2_old[i] = body_contact_point(state_.fingers[i].fingertip_pose,
                                   state_.contacts[i], false);
    wrench_old[i] = state_.contact_wrenches[i].vector();
  }

  // Re-projection: closest points at the integrated poses define the new
  // contact coordinates; the coincidence construction then closes the
  // (O(dt^2)) gap exactly.
  std::vector<SurfaceModel> tips;
  for (int i = 0; i < n; ++i) tips.push_back(state_.fingers[i].tip_surface);
  std::vector<ContactCoordinates> coords(n);
  try {
    // Object-side chart re-seat first (spheres only; cylinder charts wrap).
    if (object.surface.kind == SurfaceKind::kSphere) {
      for (int i = 0; i < n; ++i) {
        const ClosestPointResult cp = closest_point_contact(
            object.surface, object.pose, tips[i], tip_candidates[i]);
        if (chart_needs_reseat(object.surface, cp.u_a)) {
          object.surface = reseat_chart(
              object.surface, object.pose.inverse() * cp.point_a);
          outcome.events.push_back({SimEventKind::kChartReseat, time_, i,
                                    "object chart re-seated"});
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      ClosestPointResult cp = closest_point_contact(
          object.surface, object.pose, tips[i], tip_candidates[i]);
      outcome.reprojection_gap =
          std::max(outcome.reprojection_gap, std::abs(cp.gap));
      if (chart_needs_reseat(tips[i], cp.u_b)) {
        tips[i] = reseat_chart(tips[i],
                               tip_candidates[i].inverse() * cp.point_b);
        outcome.events.push_back({SimEventKind::kChartReseat, time_, i,
                                  "fingertip chart re-seated"});
        cp = closest_point_contact(object.surface, object.pose, tips[i],
                                   tip_candidates[i]);
      }
      const ContactPair pair = contact_pair_from_coordinates(
          object.surface, object.pose, cp.u_a, tips[i], tip_candidates[i],
          cp.u_b, 0.0);
      // phi from the actual frames at the candidate pose.
      const Eigen::Matrix3d r12 =
          pair.world_to_c1.rotation.matrix().transpose() *
          pair.world_to_c2.rotation.matrix();
      coords[i] = ContactCoordinates{cp.u_a, cp.u_b,
                                     std::atan2(r12(1, 0), r12(0, 0))};
    }
  } catch (const DegenerateContactError& err) {
    outcome.events.push_back(
        {SimEventKind::kContactBreak, time_, -1, err.what()});
    outcome.halted = true;
    return outcome;
  }

  GraspState next = build_state(scenario_.hand, object, thetas, anchors, tips,
                                coords, state_.gravity);

  // Arc-length accumulation (body-frame chord lengths) and anchor work
  // (trapezoidal F_con . V_a).
  for (int i = 0; i < n; ++i) {
    arc_object_[i] +=
        (body_contact_point(next.object.pose, next.contacts[i], true) -
         p1_old[i])
            .norm();
    arc_tip_[i] +=
        (body_contact_point(next.fingers[i].fingertip_pose, next.contacts[i],
                            false) -
         p2_old[i])
            .norm();
    anchor_work_ += dt * 0.5 *
                    (wrench_old[i] + next.contact_wrenches[i].vector())
                        .dot(anchor_twists.segment<6>(6 * i));
  }

  state_ = std::move(next);
  time_ += dt;

  // Post-state events.
  for (int i = 0; i < n; ++i) {
    const ContactForceSplit split = contact_force_split(state_, i);
    if (split.normal <= 0.0 ||
        outcome.reprojection_gap > scenario_.tolerances.gap) {
      outcome.events.push_back(
          {SimEventKind::kContactBreak, time_, i,
           split.normal <= 0.0
               ? "normal force " + std::to_string(split.normal) + " N"
               : "re-projection gap " +
                     std::to_string(outcome.reprojection_gap) + " m"});
      outcome.halted = true;
    } else if (split.tangential / split.normal > scenario_.friction.mu) {
      outcome.events.push_back(
          {SimEventKind::kFrictionViolation, time_, i,
           "tangential/normal = " +
               std::to_string(split.tangential / split.normal)});
      if (!scenario_.soft_friction) outcome.halted = true;
    }
  }
  return outcome;
}

Eigen::VectorXd Simulator::scripted_anchor_twists(double t) const {
  const int n = static_cast<int>(scenario_.hand.size());
  Eigen::VectorXd va = Eigen::VectorXd::Zero(6 * n);
  for (int i = 0; i < n && i < static_cast<int>(scenario_.scripts.size());
       ++i) {
    for (const ScriptedSegment& seg : scenario_.scripts[i]) {
      if (t >= seg.t_start && t < seg.t_end) va.segment<6>(6 * i) += seg.twist;
    }
  }
  return va;
}

TrajectoryRecord Simulator::run() {
  const int n = static_cast<int>(scenario_.hand.size());
  TrajectoryRecord rec;
  rec.finger_count = n;

  int total_joints = 0;
  for (const auto& f : scenario_.hand)
    total_joints += static_cast<int>(f.screw_axes.size());

  ControllerConfig ctrl_cfg = scenario_.controller;
  ctrl_cfg.period = scenario_.dt;
  RollingController controller(ctrl_cfg, total_joints);
  if (scenario_.object_constraint) {
    const ObjectAxisConstraint constraint = *scenario_.object_constraint;
    controller.set_twist_projector([constraint](const Vector6d& v) {
      return enforce_object_constraint(v, constraint, false).projected;
    });
  }

  const Transform initial_pose = state_.object.pose;
  const Eigen::Vector3d report_axis = scenario_.report_axis.normalized();
  const Eigen::Vector3d initial_axis_world =
      state_.object.pose.rotation *
      (state_.object.surface.chart_rotation * Eigen::Vector3d::UnitZ());

  const auto record_step = [&](const Vector6d& commanded,
                               const Vector6d& removed, double sigma_min,
                               double gap) {
    StepRecord row;
    row.t = time_;
    row.object_pose = state_.object.pose;
    for (int i = 0; i < n; ++i) {
      FingerStepRecord fr;
      fr.anchor_pose = state_.fingers[i].anchor_pose;
      fr.fingertip_pose = state_.fingers[i].fingertip_pose;
      fr.contact_point = state_.contacts[i].p_wc;
      const ContactForceSplit split = contact_force_split(state_, i);
      fr.normal_force = split.normal;
      fr.tangential_force = split.tangential;
      fr.flexure_disp_norm = state_.fingers[i].flexure_disp.norm();
      row.fingers.push_back(fr);
    }
    row.equilibrium_residual = equilibrium_residual(state_).norm();
    row.sigma_min = sigma_min;
    row.reprojection_gap = gap;
    double moment = 0.0;
    for (int i = 0; i < n; ++i) {
      moment = std::max(moment,
                        contact_frame_wrench(state_, i).moment.norm());
    }
    row.moment_residual = moment;
    const Rotation rel =
        state_.object.pose.rotation * initial_pose.rotation.transposed();
    row.rotation_angle = log_rotation(rel).dot(report_axis);
    row.commanded_twist = commanded;
    row.constraint_removed_twist = removed;
    rec.steps.push_back(row);
  };

  record_step(Vector6d::Zero(), Vector6d::Zero(), 0.0, 0.0);

  RunSummary& summary = rec.summary;
  summary.max_flexure_disp.assign(n, 0.0);
  summary.min_normal_force = std::numeric_limits<double>::infinity();

  const int steps = static_cast<int>(std::llround(
      scenario_.duration / scenario_.dt));
  bool halted = false;
  double move_end_angle = 0.0;
  bool move_end_captured = false;

  for (int k = 0; k < steps && !halted; ++k) {
    const double t = k * scenario_.dt;
    Eigen::VectorXd va;
    Vector6d commanded = Vector6d::Zero();
    Vector6d removed = Vector6d::Zero();
    Eigen::VectorXd theta_dot;

    try {
      if (scenario_.closed_loop) {
        const ConstraintSystem sys =
            assemble(state_, scenario_.hand, Eigen::VectorXd::Zero(6 * n));
        const InverseMap map = inverse_map(sys);
        const ForceRateConstraints constraints =
            scenario_.controller.use_qp
                ? force_rate_rows(state_, sys, map, scenario_.friction)
                : ForceRateConstraints{{}, {}, scenario_.friction};
        const Transform desired =
            scenario_.target.desired_pose(initial_pose, t);
        Vector6d v_d = scenario_.target.desired_twist(t);
        if (scenario_.object_constraint) {
          v_d = enforce_object_constraint(v_d, *scenario_.object_constraint,
                                          true)
                    .projected;
        }
        // The stabilized step adds a known drift-correction twist to the
        // object; feed it forward so tracking is not taxed by it.
        const MechanicsSolution correction = solve_system(
            sys, stabilization_rhs(sys, state_, scenario_.dt));
        if (!correction.singular) {
          v_d -= correction.object_twist.vector();
        }
        const ControlCommand cmd =
            controller.step(state_, scenario_.hand, map, constraints, desired,
                            Twist::from_vector(v_d, "w"));
        if (cmd.qp.status == QpResult::Status::kInfeasible) {
          std::string rows;
          for (int r : cmd.qp.violated_rows)
            rows += (rows.empty() ? "" : ",") + std::to_string(r);
          rec.events.push_back({SimEventKind::kConstraintInfeasible, t, -1,
                                "violated rows: " + rows});
          summary.exit_code = 6;
          halted = true;
          break;
        }
        commanded = cmd.commanded_twist;
        removed = cmd.unprojected_twist - cmd.commanded_twist;
        theta_dot = cmd.theta_dot;
        const Eigen::MatrixXd xi = stacked_jacobian(scenario_.hand, state_);
        va = xi * cmd.theta_dot;
        // Integrate joint positions; the anchors follow their FK poses.
        std::vector<Transform> next_anchors;
        int col = 0;
        for (int i = 0; i < n; ++i) {
          const int m = static_cast<int>(scenario_.hand[i].screw_axes.size());
          state_.fingers[i].theta += scenario_.dt * theta_dot.segment(col, m);
          col += m;
          next_anchors.push_back(
              m > 0 ? fk_anchor(scenario_.hand[i], state_.fingers[i].theta)
                    : state_.fingers[i].anchor_pose);
        }
        const StepOutcome out =
            step(va, scenario_.dt, Vector6d::Zero(), &next_anchors);
        for (const SimEvent& e : out.events) rec.events.push_back(e);
        if (out.halted) {
          halted = true;
          for (const SimEvent& e : out.events) {
            if (e.kind == SimEventKind::kSingularSystem) summary.exit_code = 4;
            if (e.kind == SimEventKind::kContactBreak) summary.exit_code = 5;
            if (e.kind == SimEventKind::kFrictionViolation)
              summary.exit_code = 7;
          }
        }
        if (rec.steps.empty() || time_ > rec.steps.back().t + 1e-15) {
          record_step(commanded, removed, out.sigma_min, out.reprojection_gap);
        }
      } else {
        va = scripted_anchor_twists(t);
        const StepOutcome out = step(va, scenario_.dt);
        for (const SimEvent& e : out.events) rec.events.push_back(e);
        if (out.halted) {
          halted = true;
          for (const SimEvent& e : out.events) {
            if (e.kind == SimEventKind::kSingularSystem) summary.exit_code = 4;
            if (e.kind == SimEventKind::kContactBreak) summary.exit_code = 5;
            if (e.kind == SimEventKind::kFrictionViolation)
              summary.exit_code = 7;
          }
        }
        if (rec.steps.empty() || time_ > rec.steps.back().t + 1e-15) {
          record_step(commanded, removed, out.sigma_min, out.reprojection_gap);
        }
      }
    } catch (const FlexureLimitError& err) {
      rec.events.push_back(
          {SimEventKind::kConstraintInfeasible, t, -1, err.what()});
      summary.exit_code = 8;
      summary.valid = false;
      summary.invalid_reason = err.what();
      halted = true;
    } catch (const RankDeficiencyError& err) {
      rec.events.push_back(
          {SimEventKind::kSingularSystem, t, -1, err.what()});
      summary.exit_code = 4;
      halted = true;
    } catch (const SingularSystemError& err) {
      rec.events.push_back(
          {SimEventKind::kSingularSystem, t, -1, err.what()});
      summary.exit_code = 4;
      halted = true;
    }

    // Closed-loop tracking bookkeeping.
    if (scenario_.closed_loop && !move_end_captured &&
        time_ >= scenario_.target.move_duration - 1e-9) {
      move_end_angle = rec.steps.back().rotation_angle;
      summary.tracking_error_at_move_end =
          std::abs(move_end_angle - scenario_.target.angle);
      move_end_captured = true;
    }
    if (move_end_captured) {
      summary.hold_drift =
          std::max(summary.hold_drift,
                   std::abs(rec.steps.back().rotation_angle - move_end_angle));
    }
  }

  // Summary over the recorded rows.
  summary.completed = !halted;
  summary.final_time = time_;
  for (const StepRecord& row : rec.steps) {
    summary.max_equilibrium_residual =
        std::max(summary.max_equilibrium_residual, row.equilibrium_residual);
    summary.max_reprojection_gap =
        std::max(summary.max_reprojection_gap, row.reprojection_gap);
    summary.max_moment_residual =
        std::max(summary.max_moment_residual, row.moment_residual);
    for (int i = 0; i < n; ++i) {
      summary.max_flexure_disp[i] = std::max(
          summary.max_flexure_disp[i], row.fingers[i].flexure_disp_norm);
      summary.min_normal_force =
          std::min(summary.min_normal_force, row.fingers[i].normal_force);
      summary.max_normal_force =
          std::max(summary.max_normal_force, row.fingers[i].normal_force);
    }
  }
  summary.rotation_angle = rec.steps.back().rotation_angle;
  summary.center_displacement =
      (state_.object.pose.translation - initial_pose.translation).norm();
  if (summary.max_equilibrium_residual > scenario_.tolerances.equilibrium) {
    summary.valid = false;
    summary.invalid_reason = "equilibrium residual exceeded the quasistatic "
                             "validity bound";
  }
  if (summary.max_moment_residual > scenario_.tolerances.moment_free) {
    summary.valid = false;
    summary.invalid_reason = "contact moment residual exceeded the point-"
                             "contact bound";
  }
  summary.sigma_jump_flagged = sigma_jump_;

  double worst_arc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double scale = std::max(arc_object_[i], 1e-9);
    worst_arc =
        std::max(worst_arc, std::abs(arc_object_[i] - arc_tip_[i]) / scale);
  }
  summary.arc_length_mismatch = worst_arc;

  const double work = anchor_work_;
  const double d_energy =
      (elastic_energy(state_, scenario_.hand) - initial_elastic_energy_) +
      (potential_energy(state_) - initial_potential_energy_);
  summary.energy_balance_error =
      std::abs(work - d_energy) / std::max({std::abs(work), std::abs(d_energy),
                                            1e-9});

  const Eigen::Vector3d final_axis_world =
      state_.object.pose.rotation *
      (state_.object.surface.chart_rotation * Eigen::Vector3d::UnitZ());
  summary.axis_deviation = std::acos(
      std::clamp(final_axis_world.dot(initial_axis_world), -1.0, 1.0));

  return rec;
}

TrajectoryRecord run_scenario(const Scenario& scenario) {
  Simulator sim(scenario);
  return sim.run();
}

RefinementStudy run_refinement_study(const Scenario& scenario) {
  RefinementStudy study;
  for (const double divisor : {1.0, 2.0, 4.0}) {
    Scenario s = scenario;
    s.dt = scenario.dt / divisor;
    const TrajectoryRecord rec = run_scenario(s);
    study.dts.push_back(s.dt);
    study.max_equilibrium_residuals.push_back(
        rec.summary.max_equilibrium_residual);
    study.max_reprojection_gaps.push_back(rec.summary.max_reprojection_gap);
    study.max_moment_residuals.push_back(rec.summary.max_moment_residual);
  }
  return study;
}

}  // namespace rollgrasp
