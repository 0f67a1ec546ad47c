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

#include "rollgrasp/grasp.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rollgrasp {

Transform fk_anchor(const FingerModel& finger, const Eigen::VectorXd& theta) {
  if (static_cast<size_t>(theta.size()) != finger.screw_axes.size()) {
    throw InvariantError("fk_anchor: theta size does not match joint count");
  }
  Transform t = Transform::identity("w", "w");
  for (int k = 0; k < theta.size(); ++k) {
    t = t * exp_pose((finger.screw_axes[k] * theta[k]).eval(), "w", "w");
  }
  Transform home = finger.home_pose;
  home.from = "w";
  return (t * home).renormalized();
}

Eigen::MatrixXd finger_jacobian(const FingerModel& finger,
                                const Eigen::VectorXd& theta) {
  if (static_cast<size_t>(theta.size()) != finger.screw_axes.size()) {
    throw InvariantError("finger_jacobian: theta size mismatch");
  }
  const int m = static_cast<int>(theta.size());
  Eigen::MatrixXd j(6, m);
  Transform t = Transform::identity("w", "w");
  for (int k = 0; k < m; ++k) {
    j.col(k) = adjoint(t) * finger.screw_axes[k];
    t = t * exp_pose((finger.screw_axes[k] * theta[k]).eval(), "w", "w");
  }
  return j;
}

Wrench flexure_wrench(const FingerState& finger,
                      const StiffnessMatrix& stiffness_f0,
                      double hard_limit) {
  const double norm = finger.flexure_disp.norm();
  if (norm > hard_limit) {
    throw FlexureLimitError(
        "flexure displacement " + std::to_string(norm) +
        " exceeds the small-displacement hard limit " +
        std::to_string(hard_limit));
  }
  const Vector6d f_spr_f0 = stiffness_f0.matrix * finger.flexure_disp;
  const Vector6d f_spr_w =
      adjoint(finger.rest_pose.inverse()).transpose() * f_spr_f0;
  return Wrench::from_vector(-f_spr_w, "w");
}

bool flexure_displacement_warning(const FingerState& finger, double bound) {
  return finger.flexure_disp.norm() > bound;
}

Wrench external_wrench(const RigidObject& object,
                       const Eigen::Vector3d& gravity) {
  const Eigen::Vector3d mg = object.mass * gravity;
  return Wrench{object.pose.translation.cross(mg), mg, "w"};
}

Vector6d external_wrench_rate(const RigidObject& object,
                              const Eigen::Vector3d& gravity,
                              const Twist& object_twist) {
  if (object_twist.frame != "w") {
    throw FrameMismatchError("external_wrench_rate", "w", object_twist.frame);
  }
  Vector6d rate = Vector6d::Zero();
  rate.head<3>() =
      object.mass * skew(gravity) *
      (skew(object.pose.translation) * object_twist.angular -
       object_twist.linear);
  return rate;
}

Vector6d equilibrium_residual(const GraspState& state) {
  Vector6d r = external_wrench(state.object, state.gravity).vector();
  for (const Wrench& f : state.contact_wrenches) r += f.vector();
  return r;
}

Wrench contact_frame_wrench(const GraspState& state, int finger_index) {
  const ContactPair& pair = state.contacts.at(finger_index);
  return transform_wrench(pair.world_to_c1.inverse(),
                          state.contact_wrenches.at(finger_index));
}

ContactForceSplit contact_force_split(const GraspState& state,
                                      int finger_index) {
  const Wrench f_c1 = contact_frame_wrench(state, finger_index);
  ContactForceSplit split;
  // {c1} has its z-axis outward from the object, so a pushing contact
  // force on the object has negative z; report compressive as positive.
  split.normal = -f_c1.force.z();
  split.tangential = std::hypot(f_c1.force.x(), f_c1.force.y());
  return split;
}

GraspState build_state(const std::vector<FingerModel>& hand,
                       const RigidObject& object,
                       const std::vector<Eigen::VectorXd>& thetas,
                       const std::vector<Transform>& anchor_poses,
                       const std::vector<SurfaceModel>& tip_surfaces,
                       const std::vector<ContactCoordinates>& contacts,
                       const Eigen::Vector3d& gravity) {
  const size_t n = hand.size();
  if (thetas.size() != n || anchor_poses.size() != n ||
      tip_surfaces.size() != n || contacts.size() != n) {
    throw InvariantError("build_state: per-finger input sizes disagree");
  }
  GraspState state;
  state.object = object;
  state.gravity = gravity;
  for (size_t i = 0; i < n; ++i) {
    FingerState fs;
    fs.theta = thetas[i];
    fs.anchor_pose = anchor_poses[i];
    Transform a2r = hand[i].anchor_to_rest;
    a2r.from = fs.anchor_pose.to;
    fs.rest_pose = fs.anchor_pose * a2r;
    fs.tip_surface = tip_surfaces[i];
    Transform t_wf = fingertip_pose_from_contact(
        object.pose, object.surface, contacts[i].u_object, fs.tip_surface,
        contacts[i].u_tip, contacts[i].phi);
    t_wf.to = fs.tip_surface.body_frame;
    fs.fingertip_pose = t_wf.renormalized();
    Transform rel = fs.rest_pose.inverse() * fs.fingertip_pose;
    fs.flexure_disp = log_pose(rel);
    state.fingers.push_back(fs);

    ContactPair pair = contact_pair_from_coordinates(
        object.surface, object.pose, contacts[i].u_object, fs.tip_surface,
        fs.fingertip_pose, contacts[i].u_tip, contacts[i].phi);
    state.contacts.push_back(pair);
    state.contact_wrenches.push_back(
        flexure_wrench(state.fingers[i], hand[i].stiffness));
  }
  return state;
}

namespace {

// Residual of the settling problem: the flexure wrench must equal a pure
// normal force of magnitude lambda through the contact, and the gap must
// close. Unknowns (X, lambda).
struct SettleProblem {
  const SurfaceModel* object_surface;
  const Transform* object_pose;
  const SurfaceModel* tip_surface;
  const Transform* rest_pose;
  const StiffnessMatrix* stiffness;

  Transform tip_pose(const Vector6d& x) const {
    Transform rel = exp_pose(x, rest_pose->to, tip_surface->body_frame);
    return (*rest_pose) * rel;
  }

  Eigen::Matrix<double, 7, 1> residual(
      const Eigen::Matrix<double, 7, 1>& z) const {
    const Vector6d x = z.head<6>();
    const double lambda = z[6];
    const Transform t_wf = tip_pose(x);
    const ClosestPointResult cp = closest_point_contact(
        *object_surface, *object_pose, *tip_surface, t_wf);
    const Eigen::Vector3d p_c = 0.5 * (cp.point_a + cp.point_b);
    const Eigen::Vector3d n = cp.normal_a;  // outward object normal
    const Vector6d f_spr_w =
        adjoint(rest_pose->inverse()).transpose() * (stiffness->matrix * x);
    Vector6d unit;
    unit << p_c.cross(n), n;
    Eigen::Matrix<double, 7, 1> r;
    r.head<6>() = f_spr_w - lambda * unit;
    r[6] = cp.gap;
    return r;
  }
};

}  // namespace

SettleResult settle_fingertip(const SurfaceModel& object_surface,
                              const Transform& object_pose,
                              const SurfaceModel& tip_surface,
                              const Transform& rest_pose,
                              const StiffnessMatrix& stiffness_f0,
                              const Vector6d& initial_disp) {
  SettleProblem problem{&object_surface, &object_pose, &tip_surface,
                        &rest_pose, &stiffness_f0};

  // Contact must exist (or be creatable) at the rest pose: a relaxed
  // fingertip that cannot reach the object never settles into a grasp.
  {
    const ClosestPointResult cp0 = closest_point_contact(
        object_surface, object_pose, tip_surface, problem.tip_pose(initial_disp));
    if (cp0.gap > 1e-6 && initial_disp.isZero()) {
      throw SeedingError(
          "fingertip does not reach the object at its rest pose (gap " +
          std::to_string(cp0.gap) + " m)");
    }
  }

  Eigen::Matrix<double, 7, 1> z = Eigen::Matrix<double, 7, 1>::Zero();
  z.head<6>() = initial_disp;
  // Rough normal-force scale from the linear stiffness and the current gap.
  {
    const double k_lin = stiffness_f0.matrix.diagonal().tail<3>().mean();
    const double gap0 = problem.residual(z)[6];
    z[6] = std::max(k_lin * std::max(-gap0, 0.0), 1e-3);
  }

  Eigen::Matrix<double, 7, 1> r = problem.residual(z);
  const int max_iter = 60;
  for (int iter = 0; iter < max_iter && r.norm() > 1e-11; ++iter) {
    Eigen::Matrix<double, 7, 7> jac;
    for (int k = 0; k < 7; ++k) {
      const double eps = 1e-7;
      Eigen::Matrix<double, 7, 1> zp = z, zm = z;
      zp[k] += eps;
      zm[k] -= eps;
      jac.col(k) = (problem.residual(zp) - problem.residual(zm)) / (2 * eps);
    }
    const Eigen::Matrix<double, 7, 1> dz =
        jac.colPivHouseholderQr().solve(-r);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 25; ++ls) {
      const Eigen::Matrix<double, 7, 1> z_new = z + step * dz;
      const Eigen::Matrix<double, 7, 1> r_new = problem.residual(z_new);
      if (r_new.norm() < r.norm() * (1.0 - 1e-4 * step) + 1e-15) {
        z = z_new;
        r = r_new;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  if (r.norm() > 1e-9) {
    throw SeedingError("fingertip settling did not converge (residual " +
                       std::to_string(r.norm()) + ")");
  }

  SettleResult result;
  result.flexure_disp = z.head<6>();
  result.normal_force = z[6];
  result.fingertip_pose = problem.tip_pose(result.flexure_disp).renormalized();
  const ClosestPointResult cp = closest_point_contact(
      object_surface, object_pose, tip_surface, result.fingertip_pose);
  result.u_object = cp.u_a;
  result.u_tip = cp.u_b;
  // phi is filled in by callers after any chart re-seat; computing it here
  // would evaluate the chart frame, which may sit at a singularity.
  return result;
}

GraspState seed_equilibrium(const std::vector<FingerModel>& hand,
                            const RigidObject& object_guess,
                            const std::vector<Eigen::VectorXd>& thetas,
                            const std::vector<Transform>& anchor_poses,
                            const Eigen::Vector3d& gravity,
                            const SeedOptions& options) {
  const size_t n = hand.size();
  if (n == 0) throw SeedingError("cannot seed a grasp with no fingers");

  std::vector<Transform> rest_poses;
  std::vector<SurfaceModel> tips;
  for (size_t i = 0; i < n; ++i) {
    Transform a2r = hand[i].anchor_to_rest;
    a2r.from = anchor_poses[i].to;
    rest_poses.push_back(anchor_poses[i] * a2r);
    tips.push_back(hand[i].fingertip);
  }

  // Warm-started settles reused across Newton iterations.
  std::vector<Vector6d> warm(n, Vector6d::Zero());

  const auto residual_of = [&](const Vector6d& xi,
                               std::vector<SettleResult>* out)
      -> Vector6d {
    RigidObject obj = object_guess;
    obj.pose = (exp_pose(xi, "w", "w") * object_guess.pose).renormalized();
    Vector6d r = external_wrench(obj, gravity).vector();
    for (size_t i = 0; i < n; ++i) {
      const SettleResult settle =
          settle_fingertip(obj.surface, obj.pose, tips[i], rest_poses[i],
                           hand[i].stiffness, warm[i]);
      const Vector6d f_spr_w =
          adjoint(rest_poses[i].inverse()).transpose() *
          (hand[i].stiffness.matrix * settle.flexure_disp);
      r -= f_spr_w;  // F_con = -F_spr
      if (out) (*out)[i] = settle;
    }
    return r;
  };

  Vector6d xi = Vector6d::Zero();
  std::vector<SettleResult> settles(n);
  Vector6d r = residual_of(xi, &settles);
  for (size_t i = 0; i < n; ++i) warm[i] = settles[i].flexure_disp;

  int iter = 0;
  for (; iter < options.max_iterations && r.norm() > options.tolerance;
       ++iter) {
    Matrix6d jac;
    for (int k = 0; k < 6; ++k) {
      const double eps = 1e-7;
      Vector6d xp = xi, xm = xi;
      xp[k] += eps;
      xm[k] -= eps;
      jac.col(k) = (residual_of(xp, nullptr) - residual_of(xm, nullptr)) /
                   (2 * eps);
    }
    // Damped pseudo-inverse step; the Jacobian is rank-deficient along
    // unconstrained object motions (symmetry directions).
    Eigen::JacobiSVD<Matrix6d> svd(jac,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double cutoff = 1e-10 * svd.singularValues().maxCoeff();
    Vector6d inv_sv = Vector6d::Zero();
    for (int k = 0; k < 6; ++k) {
      if (svd.singularValues()[k] > cutoff)
        inv_sv[k] = 1.0 / svd.singularValues()[k];
    }
    const Vector6d dz = -(svd.matrixV() * inv_sv.asDiagonal() *
                          svd.matrixU().transpose() * r);

    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 25; ++ls) {
      const Vector6d xi_new = xi + step * dz;
      std::vector<SettleResult> trial(n);
      const Vector6d r_new = residual_of(xi_new, &trial);
      if (r_new.norm() < r.norm() * (1.0 - 1e-4 * step) + 1e-16) {
        xi = xi_new;
        r = r_new;
        settles = trial;
        for (size_t i = 0; i < n; ++i) warm[i] = settles[i].flexure_disp;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw SeedingError("equilibrium seeding stalled at residual " +
                         std::to_string(r.norm()));
    }
  }
  if (r.norm() > options.tolerance) {
    throw SeedingError("equilibrium seeding did not converge (residual " +
                       std::to_string(r.norm()) + " after " +
                       std::to_string(iter) + " iterations)");
  }

  RigidObject object = object_guess;
  object.pose = (exp_pose(xi, "w", "w") * object_guess.pose).renormalized();

  // Re-seat any chart whose settle landed near a singularity, then build
  // the canonical state from contact coordinates.
  std::vector<ContactCoordinates> coords(n);
  for (size_t i = 0; i < n; ++i) {
    if (chart_needs_reseat(tips[i], settles[i].u_tip)) {
      const Eigen::Vector3d p_body =
          settles[i].fingertip_pose.inverse() *
          (object.pose * object.surface.point_at(settles[i].u_object));
      tips[i] = reseat_chart(tips[i], p_body);
    }
    const ContactPair pair = make_contact_pair(
        object.surface, object.pose, tips[i], settles[i].fingertip_pose);
    coords[i] = ContactCoordinates{pair.object_side.u, pair.finger_side.u,
                                   pair.phi};
  }
  return build_state(hand, object, thetas, anchor_poses, tips, coords,
                     gravity);
}

}  // namespace rollgrasp
