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

#include "rollgrasp/lie.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <cmath>

namespace rollgrasp {

namespace {
constexpr double kSmallAngle = 1e-8;

void check_frame(const char* op, const FrameId& expected, const FrameId& got) {
  if (expected != got) throw FrameMismatchError(op, expected, got);
}
}  // namespace

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
  Eigen::Matrix3d m;
  m << 0, -a.z(), a.y(),
       a.z(), 0, -a.x(),
       -a.y(), a.x(), 0;
  return m;
}

Eigen::Vector3d unskew(const Eigen::Matrix3d& m) {
  return Eigen::Vector3d(m(2, 1), m(0, 2), m(1, 0));
}

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m) {
  const double ortho = (m * m.transpose() - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-12) {
    throw InvariantError("rotation matrix not orthonormal (|RR^T - I| = " +
                         std::to_string(ortho) + ")");
  }
  if (std::abs(m.determinant() - 1.0) > 1e-12) {
    throw InvariantError("rotation matrix determinant is not +1");
  }
  return Rotation(m);
}

Rotation Rotation::axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Rotation(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
}

Rotation Rotation::renormalized() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  return Rotation(q.toRotationMatrix());
}

Transform Transform::identity(const FrameId& from, const FrameId& to) {
  Transform t;
  t.from = from;
  t.to = to;
  return t;
}

Transform Transform::operator*(const Transform& o) const {
  check_frame("Transform composition", to, o.from);
  Transform r;
  r.rotation = rotation * o.rotation;
  r.translation = rotation * o.translation + translation;
  r.from = from;
  r.to = o.to;
  return r;
}

Transform Transform::inverse() const {
  Transform r;
  r.rotation = rotation.transposed();
  r.translation = -(r.rotation * translation);
  r.from = to;
  r.to = from;
  return r;
}

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Transform Transform::renormalized() const {
  Transform r = *this;
  r.rotation = rotation.renormalized();
  return r;
}

Twist Twist::from_vector(const Vector6d& v, const FrameId& frame) {
  return Twist{v.head<3>(), v.tail<3>(), frame};
}

Vector6d Twist::vector() const {
  Vector6d v;
  v << angular, linear;
  return v;
}

Twist Twist::operator+(const Twist& o) const {
  check_frame("Twist addition", frame, o.frame);
  return Twist{angular + o.angular, linear + o.linear, frame};
}

Twist Twist::operator-(const Twist& o) const {
  check_frame("Twist subtraction", frame, o.frame);
  return Twist{angular - o.angular, linear - o.linear, frame};
}

Twist Twist::operator*(double s) const {
  return Twist{angular * s, linear * s, frame};
}

Wrench Wrench::from_vector(const Vector6d& v, const FrameId& frame) {
  return Wrench{v.head<3>(), v.tail<3>(), frame};
}

Vector6d Wrench::vector() const {
  Vector6d v;
  v << moment, force;
  return v;
}

Wrench Wrench::operator+(const Wrench& o) const {
  check_frame("Wrench addition", frame, o.frame);
  return Wrench{moment + o.moment, force + o.force, frame};
}

Wrench Wrench::operator-(const Wrench& o) const {
  check_frame("Wrench subtraction", frame, o.frame);
  return Wrench{moment - o.moment, force - o.force, frame};
}

Wrench Wrench::operator*(double s) const {
  return Wrench{moment * s, force * s, frame};
}

StiffnessMatrix StiffnessMatrix::from_matrix(const Matrix6d& k,
                                             const FrameId& frame) {
  const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) {
    throw InvariantError("stiffness matrix not symmetric (asymmetry " +
                         std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix6d> es(0.5 * (k + k.transpose()));
  const double max_ev = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-9 * std::max(max_ev, 1.0)) {
    throw InvariantError("stiffness matrix not positive semidefinite");
  }
  return StiffnessMatrix{k, frame};
}

WrenchMatrix WrenchMatrix::from_wrench(const Wrench& f) {
  WrenchMatrix w;
  w.matrix.topLeftCorner<3, 3>() = skew(f.moment);
  w.matrix.topRightCorner<3, 3>() = skew(f.force);
  w.matrix.bottomLeftCorner<3, 3>() = skew(f.force);
  w.matrix.bottomRightCorner<3, 3>().setZero();
  w.frame = f.frame;
  return w;
}

Matrix6d adjoint(const Transform& t) {
  Matrix6d ad = Matrix6d::Zero();
  const Eigen::Matrix3d& r = t.rotation.matrix();
  ad.topLeftCorner<3, 3>() = r;
  ad.bottomLeftCorner<3, 3>() = skew(t.translation) * r;
  ad.bottomRightCorner<3, 3>() = r;
  return ad;
}

Matrix6d twist_ad(const Vector6d& v) {
  Matrix6d m = Matrix6d::Zero();
  const Eigen::Matrix3d w = skew(v.head<3>());
  m.topLeftCorner<3, 3>() = w;
  m.bottomLeftCorner<3, 3>() = skew(v.tail<3>());
  m.bottomRightCorner<3, 3>() = w;
  return m;
}

Matrix6d twist_ad(const Twist& v) { return twist_ad(v.vector()); }

Twist transform_twist(const Transform& t_ij, const Twist& v_in_j) {
  check_frame("transform_twist", t_ij.to, v_in_j.frame);
  return Twist::from_vector(adjoint(t_ij) * v_in_j.vector(), t_ij.from);
}

Wrench transform_wrench(const Transform& t_ij, const Wrench& f_in_j) {
  check_frame("transform_wrench", t_ij.to, f_in_j.frame);
  return Wrench::from_vector(
      adjoint(t_ij.inverse()).transpose() * f_in_j.vector(), t_ij.from);
}

StiffnessMatrix transform_stiffness(const Transform& t_ij,
                                    const StiffnessMatrix& k_in_j) {
  check_frame("transform_stiffness", t_ij.to, k_in_j.frame);
  const Matrix6d ad_ji = adjoint(t_ij.inverse());
  return StiffnessMatrix{ad_ji.transpose() * k_in_j.matrix * ad_ji, t_ij.from};
}

WrenchMatrix transform_wrench_matrix(const Transform& t_ij,
                                     const WrenchMatrix& w_in_j) {
  check_frame("transform_wrench_matrix", t_ij.to, w_in_j.frame);
  const Matrix6d ad_ji = adjoint(t_ij.inverse());
  return WrenchMatrix{ad_ji.transpose() * w_in_j.matrix * ad_ji, t_ij.from};
}

Rotation exp_rotation(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  Eigen::Matrix3d r;
  if (theta < kSmallAngle) {
    r = Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
  } else {
    const Eigen::Matrix3d wn = w / theta;
    r = Eigen::Matrix3d::Identity() + std::sin(theta) * wn +
        (1.0 - std::cos(theta)) * wn * wn;
  }
  return Rotation::trusted(r).renormalized();
}

Eigen::Vector3d log_rotation(const Rotation& rot) {
  const Eigen::Matrix3d& r = rot.matrix();
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(c);
  if (theta > M_PI - 1e-9) {
    throw BranchAmbiguityError(
        "log_rotation: rotation angle at pi, principal branch undefined");
  }
  const Eigen::Vector3d half_skew = unskew(0.5 * (r - r.transpose()));
  if (theta < kSmallAngle) {
    return half_skew * (1.0 + theta * theta / 6.0);
  }
  return half_skew * (theta / std::sin(theta));
}

Transform exp_pose(const Vector6d& x, const FrameId& from, const FrameId& to) {
  const Eigen::Vector3d omega = x.head<3>();
  const Eigen::Vector3d v = x.tail<3>();
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  Eigen::Matrix3d vmat;
  if (theta < kSmallAngle) {
    vmat = Eigen::Matrix3d::Identity() + 0.5 * w + w * w / 6.0;
  } else {
    const double t2 = theta * theta;
    vmat = Eigen::Matrix3d::Identity() + (1.0 - std::cos(theta)) / t2 * w +
           (theta - std::sin(theta)) / (t2 * theta) * w * w;
  }
  Transform t;
  t.rotation = exp_rotation(omega);
  t.translation = vmat * v;
  t.from = from;
  t.to = to;
  return t;
}

Vector6d log_pose(const Transform& t) {
  const Eigen::Vector3d omega = log_rotation(t.rotation);
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  Eigen::Matrix3d vinv;
  if (theta < kSmallAngle) {
    vinv = Eigen::Matrix3d::Identity() - 0.5 * w + w * w / 12.0;
  } else {
    const double t2 = theta * theta;
    const double coef =
        1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
    vinv = Eigen::Matrix3d::Identity() - 0.5 * w + coef * w * w;
  }
  Vector6d x;
  x << omega, vinv * t.translation;
  return x;
}

Matrix6d adjoint_rate(const Transform& t_ij, const Twist& v_ji_in_j) {
  check_frame("adjoint_rate", t_ij.to, v_ji_in_j.frame);
  return -adjoint(t_ij) * twist_ad(v_ji_in_j);
}

Vector6d wrench_rate_transform(const WrenchMatrix& w_in_i,
                               const Twist& v_ij_in_i,
                               const Vector6d& f_rate_in_j,
                               const Transform& t_ji) {
  check_frame("wrench_rate_transform", w_in_i.frame, v_ij_in_i.frame);
  check_frame("wrench_rate_transform", t_ji.to, w_in_i.frame);
  return -w_in_i.matrix * v_ij_in_i.vector() +
         adjoint(t_ji).transpose() * f_rate_in_j;
}

Vector6d displacement_rate(const Vector6d& x, const Vector6d& v) {
  const double norm = x.norm();
  if (norm > 0.5) {
    throw InvariantError(
        "displacement_rate: series inverse only valid for ||X|| < 0.5");
  }
  // Inverse left Jacobian, Bernoulli series truncated at ad^4; the
  // remainder is below 1e-12 on the admitted domain.
  const Matrix6d ad = twist_ad(x);
  const Matrix6d ad2 = ad * ad;
  const Matrix6d jinv = Matrix6d::Identity() - 0.5 * ad + ad2 / 12.0 -
                        ad2 * ad2 / 720.0;
  return jinv * v;
}

double power_pairing(const Wrench& f, const Twist& v) {
  check_frame("power_pairing", f.frame, v.frame);
  return f.vector().dot(v.vector());
}

}  // namespace rollgrasp
