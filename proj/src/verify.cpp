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

#include "rollgrasp/verify.hpp"

#include <Eigen/Dense>

#include <random>
#include <sstream>

#include <json.hpp>

namespace rollgrasp {

namespace {

Vector6d random_vec6(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Vector6d v;
  for (int i = 0; i < 6; ++i) v[i] = d(rng);
  return v;
}

Eigen::Vector3d random_vec3(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return Eigen::Vector3d(d(rng), d(rng), d(rng));
}

struct Poly6 {
  Vector6d a, b, c;
  Vector6d at(double t) const { return a + t * b + t * t * c; }
};

Transform pose_of(const Poly6& p, double t, const FrameId& from,
                  const FrameId& to) {
  return exp_pose(p.at(t), from, to);
}

Twist fd_space_twist(const Poly6& p, double t, const FrameId& from,
                     const FrameId& to, double h = 1e-6) {
  const Eigen::Matrix4d tp = pose_of(p, t + h, from, to).matrix();
  const Eigen::Matrix4d tm = pose_of(p, t - h, from, to).matrix();
  const Eigen::Matrix4d v_hat =
      ((tp - tm) / (2 * h)) * pose_of(p, t, from, to).matrix().inverse();
  Twist v;
  v.angular = unskew(Eigen::Matrix3d(0.5 * (v_hat.topLeftCorner<3, 3>() -
                                            v_hat.topLeftCorner<3, 3>()
                                                .transpose())));
  v.linear = v_hat.topRightCorner<3, 1>();
  v.frame = from;
  return v;
}

VerifyCheck check_of(const std::string& name, double measured,
                     double tolerance) {
  return VerifyCheck{name, measured, tolerance, measured <= tolerance};
}

StiffnessMatrix scenario_stiffness(const FrameId& frame) {
  Vector6d diag;
  diag << 1.0, 1.0, 1.0, 1000.0, 1000.0, 1000.0;
  return StiffnessMatrix::from_matrix(diag.asDiagonal(), frame);
}

}  // namespace

VerifyReport verify_lie() {
  VerifyReport report{"lie", {}};
  std::mt19937_64 rng(20250809);

  // Eq. 8: adjoint rate vs central finite differences on 100 random
  // smooth trajectories.
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Poly6 p{random_vec6(rng, 0.8), random_vec6(rng, 0.6),
                  random_vec6(rng, 0.3)};
    const double t = 0.2, h = 1e-6;
    const Matrix6d fd = (adjoint(pose_of(p, t + h, "i", "j")) -
                         adjoint(pose_of(p, t - h, "i", "j"))) /
                        (2 * h);
    // V^j_ji from the inverse pose trajectory.
    const Eigen::Matrix4d tp = pose_of(p, t + h, "i", "j").inverse().matrix();
    const Eigen::Matrix4d tm = pose_of(p, t - h, "i", "j").inverse().matrix();
    const Eigen::Matrix4d v_hat =
        ((tp - tm) / (2 * h)) *
        pose_of(p, t, "i", "j").inverse().matrix().inverse();
    Twist v_ji;
    v_ji.angular = unskew(Eigen::Matrix3d(
        0.5 * (v_hat.topLeftCorner<3, 3>() -
               v_hat.topLeftCorner<3, 3>().transpose())));
    v_ji.linear = v_hat.topRightCorner<3, 1>();
    v_ji.frame = "j";
    const Matrix6d analytic = adjoint_rate(pose_of(p, t, "i", "j"), v_ji);
    worst = std::max(worst, (fd - analytic).cwiseAbs().maxCoeff());
  }
  report.checks.push_back(check_of("eq8_adjoint_rate_fd", worst, 1e-6));

  // Eq. 10: wrench rate in a moving frame vs finite differences.
  worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Poly6 pi{random_vec6(rng, 0.8), random_vec6(rng, 0.5),
                   random_vec6(rng, 0.3)};
    const Poly6 pj{random_vec6(rng, 0.8), random_vec6(rng, 0.5),
                   random_vec6(rng, 0.3)};
    const Vector6d f0 = random_vec6(rng, 1.0), f1 = random_vec6(rng, 1.0);
    const auto t_ji = [&](double t) {
      return pose_of(pj, t, "w", "j").inverse() * pose_of(pi, t, "w", "i");
    };
    const auto f_i = [&](double t) -> Vector6d {
      return adjoint(t_ji(t)).transpose() * (f0 + t * f1);
    };
    const double t = 0.3, h = 1e-6;
    const Vector6d fd = (f_i(t + h) - f_i(t - h)) / (2 * h);
    const Twist v_wi = fd_space_twist(pi, t, "w", "i");
    const Twist v_wj = fd_space_twist(pj, t, "w", "j");
    const Twist v_ij_w = v_wj - v_wi;
    const Twist v_ij_i =
        transform_twist(pose_of(pi, t, "w", "i").inverse(), v_ij_w);
    const WrenchMatrix w_i =
        WrenchMatrix::from_wrench(Wrench::from_vector(f_i(t), "i"));
    const Vector6d analytic = wrench_rate_transform(w_i, v_ij_i, f1, t_ji(t));
    worst = std::max(worst, (fd - analytic).cwiseAbs().maxCoeff());
  }
  report.checks.push_back(check_of("eq10_wrench_rate_fd", worst, 1e-6));

  // exp/log round trip and power invariance.
  worst = 0.0;
  double worst_power = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Vector6d x = random_vec6(rng, 1.0);
    x.head<3>() *= 3.0 / std::max(1.0, x.head<3>().norm() * 1.05);
    worst = std::max(
        worst, (log_pose(exp_pose(x, "a", "b")) - x).cwiseAbs().maxCoeff());

    const Transform t_ij = exp_pose(random_vec6(rng, 1.0), "i", "j");
    const Twist vj = Twist::from_vector(random_vec6(rng, 1.0), "j");
    const Wrench fj = Wrench::from_vector(random_vec6(rng, 1.0), "j");
    worst_power = std::max(
        worst_power,
        std::abs(power_pairing(transform_wrench(t_ij, fj),
                               transform_twist(t_ij, vj)) -
                 power_pairing(fj, vj)));
  }
  report.checks.push_back(check_of("exp_log_round_trip", worst, 1e-10));
  report.checks.push_back(check_of("power_invariance", worst_power, 1e-10));

  // Eq. 1 and Eq. 3 skew identities.
  worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d a = random_vec3(rng, 1.0), b = random_vec3(rng, 1.0);
    worst = std::max(worst, (skew(skew(a) * b) -
                             (skew(a) * skew(b) - skew(b) * skew(a)))
                                .cwiseAbs()
                                .maxCoeff());
    const Rotation r = exp_rotation(random_vec3(rng, 2.0));
    worst = std::max(
        worst, (skew(r * a) - r.matrix() * skew(a) * r.matrix().transpose())
                   .cwiseAbs()
                   .maxCoeff());
  }
  report.checks.push_back(check_of("skew_identities", worst, 1e-12));
  return report;
}

VerifyReport verify_geometry() {
  VerifyReport report{"geometry", {}};
  std::mt19937_64 rng(20250810);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Curvature and torsion forms against the finite-difference Gauss map.
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    SurfaceModel s = (trial % 2 == 0)
                         ? SurfaceModel::sphere(0.02 + 0.03 * std::abs(unit(rng)),
                                                "b")
                         : SurfaceModel::cylinder(
                               0.01 + 0.03 * std::abs(unit(rng)), 0.0, "b");
    s.chart_rotation = exp_rotation(random_vec3(rng, 1.5));
    const Eigen::Vector2d u(2.0 * unit(rng),
                            (s.kind == SurfaceKind::kSphere ? 0.9 : 0.05) *
                                unit(rng));
    const ContactGeometry g = evaluate_contact_geometry(s, u);
    const double h = 1e-6;
    Eigen::Matrix<double, 3, 2> dn, dx, dp;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d up = u, um = u;
      up[k] += h;
      um[k] -= h;
      dn.col(k) = (s.normal_at(up) - s.normal_at(um)) / (2 * h);
      dp.col(k) = (s.point_at(up) - s.point_at(um)) / (2 * h);
      dx.col(k) = (evaluate_contact_geometry(s, up)
                       .body_to_contact.rotation.matrix()
                       .col(0) -
                   evaluate_contact_geometry(s, um)
                       .body_to_contact.rotation.matrix()
                       .col(0)) /
                  (2 * h);
    }
    const Eigen::Matrix3d axes = g.body_to_contact.rotation.matrix();
    const Eigen::Matrix2d minv = g.metric.inverse();
    worst = std::max(worst,
                     (axes.leftCols<2>().transpose() * dn * minv - g.curvature)
                         .cwiseAbs()
                         .maxCoeff());
    worst = std::max(
        worst, (axes.col(1).transpose() * dx * minv - g.torsion).cwiseAbs()
                   .maxCoeff());
    const Eigen::Matrix2d m_fd =
        Eigen::Vector2d(dp.col(0).norm(), dp.col(1).norm()).asDiagonal();
    worst = std::max(worst, (m_fd - g.metric).cwiseAbs().maxCoeff() * 1e-2);
  }
  report.checks.push_back(check_of("gauss_map_forms_fd", worst, 1e-4));

  // Rolling map vs re-projected contact-point motion.
  worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const SurfaceModel obj =
        (trial % 2 == 0)
            ? SurfaceModel::sphere(0.03, "o")
            : SurfaceModel::cylinder(0.025, 0.0, "o");
    const SurfaceModel tip = SurfaceModel::sphere(0.008, "f");
    const Eigen::Vector2d u1(
        2.0 * unit(rng),
        (obj.kind == SurfaceKind::kSphere ? 0.8 : 0.03) * unit(rng));
    const Transform t_wo = Transform::identity("w", "o");
    const Eigen::Vector3d p_c = obj.point_at(u1);
    const Eigen::Vector3d n = obj.normal_at(u1);
    Transform t_wf{exp_rotation(random_vec3(rng, 2.0)),
                   p_c + tip.radius * n, "w", "f"};
    const ContactPair pair = make_contact_pair(obj, t_wo, tip, t_wf);
    const RollingMap map = rolling_map_L1(pair);
    const Eigen::Vector3d omega = random_vec3(rng, 2.0);
    Vector6d v_rel;
    v_rel << omega, p_c.cross(omega);
    const Vector6d v_oc1 =
        map.contact_frame * (adjoint(pair.world_to_c1.inverse()) * v_rel);
    const double h = 1e-5;
    const auto u_at = [&](double t) {
      const Transform moved =
          exp_pose((t * v_rel).eval(), "w", "w2") *
          Transform{t_wf.rotation, t_wf.translation, "w2", "f"};
      return closest_point_contact(obj, t_wo, tip, moved).u_a;
    };
    const Eigen::Vector3d p_dot_fd =
        (obj.point_at(u_at(h)) - obj.point_at(u_at(-h))) / (2 * h);
    const Eigen::Vector3d p_dot =
        pair.world_to_c1.rotation * v_oc1.tail<3>();
    worst = std::max(worst, (p_dot_fd - p_dot).norm() /
                                (1.0 + p_dot.norm()));
  }
  report.checks.push_back(check_of("rolling_map_reprojection_fd", worst, 1e-5));

  // R_phi is involutory; the pure-rolling reduction of the full contact
  // velocity equation coincides with (K1 + K2~)^{-1} N V.
  double worst_phi = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double phi = M_PI * unit(rng);
    worst_phi = std::max(
        worst_phi, (phi_reflection(phi) * phi_reflection(phi) -
                    Eigen::Matrix2d::Identity())
                       .cwiseAbs()
                       .maxCoeff());
  }
  report.checks.push_back(check_of("phi_reflection_involution", worst_phi,
                                   1e-12));

  double worst_red = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix2d k1 = Eigen::Matrix2d::Random();
    k1 = (k1 * k1.transpose()).eval();
    k1 += 0.5 * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d k2 = Eigen::Matrix2d::Random();
    k2 = (k2 * k2.transpose()).eval();
    const double phi = M_PI * unit(rng);
    const Eigen::Matrix2d k2t =
        phi_reflection(phi) * k2 * phi_reflection(phi);
    const Vector6d v = random_vec6(rng, 1.0);
    // Full Eq. 13 with the sliding terms zeroed...
    const Eigen::Vector2d rhs_full =
        Eigen::Vector2d(v[1], -v[0]) + k2t * Eigen::Vector2d::Zero();
    // ...equals the reduced N-selection form.
    Eigen::Matrix<double, 2, 6> n_sel = Eigen::Matrix<double, 2, 6>::Zero();
    n_sel(0, 1) = 1.0;
    n_sel(1, 0) = -1.0;
    const Eigen::Vector2d mu_full = (k1 + k2t).inverse() * rhs_full;
    const Eigen::Vector2d mu_reduced = (k1 + k2t).inverse() * (n_sel * v);
    worst_red =
        std::max(worst_red, (mu_full - mu_reduced).cwiseAbs().maxCoeff());
  }
  report.checks.push_back(
      check_of("pure_rolling_reduction", worst_red, 1e-12));
  return report;
}

RandomGraspCase make_random_grasp_case(unsigned seed, int finger_count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Scenario s;
  s.name = "random_case";
  const double r_cyl = 0.02 + 0.015 * std::abs(unit(rng));
  const double r_tip = 0.006 + 0.004 * std::abs(unit(rng));
  s.object.mass = 0.03 + 0.04 * std::abs(unit(rng));
  s.object.surface = SurfaceModel::cylinder(r_cyl, 0.1, "o");
  s.object.pose = Transform::identity("w", "o");
  for (int i = 0; i < finger_count; ++i) {
    const double az =
        2.0 * M_PI * i / finger_count + 0.25 * unit(rng);
    const double depth = (1.0 + std::abs(unit(rng))) * 1e-3;
    const Eigen::Vector3d radial(std::cos(az), std::sin(az), 0.0);
    FingerModel f;
    f.name = "f" + std::to_string(i);
    f.home_pose = Transform{Rotation::identity(),
                            (r_cyl + r_tip - depth) * radial, "w",
                            f.anchor_frame()};
    f.anchor_to_rest = Transform::identity(f.anchor_frame(), f.rest_frame());
    f.stiffness = scenario_stiffness(f.rest_frame());
    f.fingertip = reseat_chart(SurfaceModel::sphere(r_tip, f.tip_frame()),
                               -r_tip * radial);
    s.hand.push_back(f);
    s.initial_joints.push_back(Eigen::VectorXd());
  }
  s.scripts.resize(finger_count);
  s.gravity = Eigen::Vector3d(0, 0, -9.81);
  s.seed_ramp_steps = 120;
  s.duration = 1.0;

  Simulator sim(s);
  return RandomGraspCase{s.hand, sim.state()};
}

VerifyReport verify_mechanics() {
  VerifyReport report{"mechanics", {}};
  std::mt19937_64 rng(20250811);

  // Appendix C: both computations of sum(Fdot_con) agree.
  double worst_appc = 0.0;
  double worst_round = 0.0;
  double worst_family = 0.0;
  int singular_states = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    const RandomGraspCase grasp =
        make_random_grasp_case(1000 + trial, n);
    const Eigen::VectorXd va0 = Eigen::VectorXd::Zero(6 * n);
    const ConstraintSystem sys = assemble(grasp.state, grasp.hand, va0);

    std::vector<Twist> v_f, v_a;
    for (int i = 0; i < n; ++i) {
      v_f.push_back(Twist::from_vector(random_vec6(rng, 0.01), "w"));
      v_a.push_back(Twist::from_vector(random_vec6(rng, 0.01), "w"));
    }
    const Twist v_o = Twist::from_vector(random_vec6(rng, 0.01), "w");
    Vector6d route1 = Vector6d::Zero(), route2 = Vector6d::Zero();
    for (int i = 0; i < n; ++i) {
      const Vector6d v_oc1 =
          sys.rolling_world[i] * (v_f[i].vector() - v_o.vector());
      const Vector6d v_wc1 = v_o.vector() + v_oc1;
      const Vector6d fdot_c1 =
          contact_wrench_rate(sys, i, v_f[i], v_o, v_a[i]);
      const WrenchMatrix w =
          WrenchMatrix::from_wrench(grasp.state.contact_wrenches[i]);
      route1 += -w.matrix * v_wc1 +
                adjoint(sys.world_to_c1[i].inverse()).transpose() * fdot_c1;
      route2 += sys.c_blocks[i] * v_a[i].vector() -
                sys.stiffness_world[i] * v_f[i].vector();
    }
    worst_appc =
        std::max(worst_appc, (route1 - route2).cwiseAbs().maxCoeff());

    // Forward/inverse round trip on the same state.
    Eigen::VectorXd va(6 * n);
    for (int i = 0; i < n; ++i) va.segment<6>(6 * i) = 0.01 * random_vec6(rng, 1.0);
    const ConstraintSystem sys_va = assemble(grasp.state, grasp.hand, va);
    const MechanicsSolution sol = forward_solve(sys_va);
    if (sol.singular) {
      ++singular_states;
      continue;
    }
    const InverseMap map = inverse_map(sys_va);
    const Vector6d via_pi = map.pi * va;
    worst_round = std::max(worst_round,
                           (sol.object_twist.vector() - via_pi).norm() /
                               (1e-30 + via_pi.norm()));
    const ConstraintResiduals res = constraint_residuals(sys_va, sol.raw, va);
    worst_family = std::max({worst_family, res.rolling, res.moment_rate,
                             res.object_rate /
                                 (1.0 + sys_va.beta.tail<6>().norm())});
  }
  report.checks.push_back(check_of("appendix_c_dual_route", worst_appc, 1e-10));
  report.checks.push_back(
      check_of("forward_inverse_round_trip_rel", worst_round, 1e-8));
  report.checks.push_back(
      check_of("constraint_families_residual", worst_family, 1e-9));
  report.checks.push_back(
      check_of("nonsingular_random_states", singular_states, 0.0));
  return report;
}

namespace {

// Exhaustive KKT active-set enumeration, the independent QP oracle.
bool kkt_enumeration(const Eigen::MatrixXd& sigma, const Vector6d& v,
                     const Eigen::MatrixXd& g, Eigen::VectorXd* best) {
  const int m = static_cast<int>(sigma.cols());
  const int k = static_cast<int>(g.rows());
  double best_norm = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int mask = 0; mask < (1 << k); ++mask) {
    std::vector<int> subset;
    for (int i = 0; i < k; ++i)
      if (mask & (1 << i)) subset.push_back(i);
    const int s = static_cast<int>(subset.size());
    Eigen::MatrixXd e(6 + s, m);
    e.topRows<6>() = sigma;
    for (int r = 0; r < s; ++r) e.row(6 + r) = g.row(subset[r]);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(6 + s);
    rhs.head<6>() = v;
    const auto cod = e.completeOrthogonalDecomposition();
    const Eigen::VectorXd x = cod.pseudoInverse() * rhs;
    if ((e * x - rhs).cwiseAbs().maxCoeff() > 1e-9) continue;
    const Eigen::MatrixXd et = e.transpose();
    const Eigen::VectorXd mult =
        et.completeOrthogonalDecomposition().solve(-2.0 * x);
    if ((et * mult + 2.0 * x).cwiseAbs().maxCoeff() > 1e-8) continue;
    bool dual_ok = true;
    for (int r = 0; r < s; ++r)
      if (mult[6 + r] < -1e-9) dual_ok = false;
    if (!dual_ok) continue;
    if (k > 0 && (g * x).maxCoeff() > 1e-9) continue;
    if (x.norm() < best_norm - 1e-12) {
      best_norm = x.norm();
      *best = x;
      found = true;
    }
  }
  return found;
}

}  // namespace

VerifyReport verify_control() {
  VerifyReport report{"control", {}};
  std::mt19937_64 rng(20250812);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  double worst_kkt = 0.0;
  double worst_closed = 0.0;
  int disagreements = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 8 + trial % 7;
    const int k = 1 + trial % 6;
    Eigen::MatrixXd sigma(6, m);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < m; ++c) sigma(r, c) = unit(rng);
    Vector6d v = random_vec6(rng, 1.0);
    Eigen::MatrixXd g(k, m);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < m; ++c) g(r, c) = unit(rng);

    const QpResult no_rows = solve_joint_velocities(
        sigma, v, Eigen::MatrixXd::Zero(0, m), true);
    const Eigen::Matrix<double, 6, 6> gram = sigma * sigma.transpose();
    const Eigen::VectorXd reference = sigma.transpose() * gram.ldlt().solve(v);
    worst_closed = std::max(
        worst_closed, (no_rows.theta_dot - reference).cwiseAbs().maxCoeff());

    const QpResult qp = solve_joint_velocities(sigma, v, g, true);
    Eigen::VectorXd oracle;
    const bool oracle_found = kkt_enumeration(sigma, v, g, &oracle);
    if (qp.status == QpResult::Status::kInfeasible) {
      if (oracle_found) ++disagreements;
      continue;
    }
    if (!oracle_found) {
      ++disagreements;
      continue;
    }
    worst_kkt = std::max(worst_kkt,
                         (qp.theta_dot - oracle).cwiseAbs().maxCoeff());
  }
  report.checks.push_back(check_of("qp_vs_kkt_enumeration", worst_kkt, 1e-8));
  report.checks.push_back(
      check_of("closed_form_pseudoinverse", worst_closed, 1e-10));
  report.checks.push_back(
      check_of("feasibility_agreement", disagreements, 0.0));
  return report;
}

std::vector<VerifyReport> verify_suites(const std::string& which) {
  std::vector<VerifyReport> reports;
  const bool all = which == "all" || which.empty();
  if (all || which == "lie") reports.push_back(verify_lie());
  if (all || which == "geometry") reports.push_back(verify_geometry());
  if (all || which == "mechanics") reports.push_back(verify_mechanics());
  if (all || which == "control") reports.push_back(verify_control());
  if (reports.empty()) {
    throw std::invalid_argument(
        "unknown verify suite '" + which +
        "' (expected all, lie, geometry, mechanics, control)");
  }
  return reports;
}

std::string verify_report_text(const std::vector<VerifyReport>& reports) {
  std::ostringstream out;
  for (const VerifyReport& r : reports) {
    for (const VerifyCheck& c : r.checks) {
      out << (c.passed ? "[PASS] " : "[FAIL] ") << r.suite << "." << c.name
          << "  measured=" << c.measured << "  tolerance=" << c.tolerance
          << "\n";
    }
  }
  return out.str();
}

std::string verify_report_json(const std::vector<VerifyReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const VerifyReport& r : reports) {
    nlohmann::json suite{{"suite", r.suite},
                         {"passed", r.all_passed()},
                         {"checks", nlohmann::json::array()}};
    for (const VerifyCheck& c : r.checks) {
      suite["checks"].push_back({{"name", c.name},
                                 {"measured", c.measured},
                                 {"tolerance", c.tolerance},
                                 {"passed", c.passed}});
    }
    j.push_back(suite);
  }
  return j.dump(2) + "\n";
}

}  // namespace rollgrasp
