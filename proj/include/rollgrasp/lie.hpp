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

#ifndef ROLLGRASP_LIE_HPP_
#define ROLLGRASP_LIE_HPP_

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace rollgrasp {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Frame labels are plain strings checked at runtime on every binary
// operation; the superscript bookkeeping is the main source of bugs in
// this kind of code, so a silent mismatch is never allowed.
using FrameId = std::string;

class FrameMismatchError : public std::runtime_error {
 public:
  FrameMismatchError(const std::string& op, const FrameId& expected,
                     const FrameId& got)
      : std::runtime_error("frame mismatch in " + op + ": expected '" +
                           expected + "', got '" + got + "'") {}
};

class BranchAmbiguityError : public std::runtime_error {
 public:
  explicit BranchAmbiguityError(const std::string& what)
      : std::runtime_error(what) {}
};

class InvariantError : public std::runtime_error {
 public:
  explicit InvariantError(const std::string& what)
      : std::runtime_error(what) {}
};

// so(3) matrix [a] with [a] b = a x b.
Eigen::Matrix3d skew(const Eigen::Vector3d& a);
// Inverse of skew; input must be antisymmetric.
Eigen::Vector3d unskew(const Eigen::Matrix3d& m);

// 3x3 orthonormal, det +1. Validated on construction from a raw matrix.
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}
  static Rotation identity() { return Rotation(); }
  // Validates R R^T = I and det R = +1 to 1e-12.
  static Rotation from_matrix(const Eigen::Matrix3d& m);
  static Rotation axis_angle(const Eigen::Vector3d& axis, double angle);
  // Trusted fast path used internally where the product of two valid
  // rotations is known to be valid.
  static Rotation trusted(const Eigen::Matrix3d& m) { return Rotation(m); }

  const Eigen::Matrix3d& matrix() const { return m_; }
  Rotation transposed() const { return Rotation(m_.transpose()); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }
  // Snap back to the manifold through a quaternion; keeps long
  // integration runs within the 1e-12 orthonormality invariant.
  Rotation renormalized() const;

 private:
  explicit Rotation(const Eigen::Matrix3d& m) : m_(m) {}
  Eigen::Matrix3d m_;
};

// Rigid-body pose of frame `to` expressed in frame `from` (T_ij with
// i = from, j = to).
struct Transform {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  FrameId from;
  FrameId to;

  static Transform identity(const FrameId& from, const FrameId& to);

  // T_ik = T_ij * T_jk; inner labels must match.
  Transform operator*(const Transform& o) const;
  Transform inverse() const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
  Eigen::Matrix4d matrix() const;
  Transform renormalized() const;
};

// Twist (omega, v) expressed in `frame`.
struct Twist {
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  FrameId frame;

  static Twist from_vector(const Vector6d& v, const FrameId& frame);
  Vector6d vector() const;
  Twist operator+(const Twist& o) const;
  Twist operator-(const Twist& o) const;
  Twist operator*(double s) const;
};

// Wrench (moment, force) expressed in `frame`.
struct Wrench {
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  FrameId frame;

  static Wrench from_vector(const Vector6d& v, const FrameId& frame);
  Vector6d vector() const;
  Wrench operator+(const Wrench& o) const;
  Wrench operator-(const Wrench& o) const;
  Wrench operator*(double s) const;
};

// 6x6 stiffness, symmetric positive semidefinite, expressed in `frame`.
struct StiffnessMatrix {
  Matrix6d matrix = Matrix6d::Zero();
  FrameId frame;

  // Validates symmetry (1e-9) and eigenvalues >= -1e-9 * max eigenvalue.
  static StiffnessMatrix from_matrix(const Matrix6d& k, const FrameId& frame);
};

// Matrix representation W = [[m],[f];[f],0] of a wrench; same units as a
// stiffness matrix, transforms the same way.
struct WrenchMatrix {
  Matrix6d matrix = Matrix6d::Zero();
  FrameId frame;

  static WrenchMatrix from_wrench(const Wrench& f);
};

// Ad_T = [[R,0],[[p]R,R]].
Matrix6d adjoint(const Transform& t);

// Matrix [[w],0;[v],[w]] appearing in the adjoint time derivative.
Matrix6d twist_ad(const Twist& v);
Matrix6d twist_ad(const Vector6d& v);

// Frame changes: V^i = Ad_{T_ij} V^j, F^i = Ad_{T_ji}^T F^j,
// K^i = Ad_{T_ji}^T K^j Ad_{T_ji}, same for W. All take T_ij (from = i,
// to = j) and a quantity expressed in j.
Twist transform_twist(const Transform& t_ij, const Twist& v_in_j);
Wrench transform_wrench(const Transform& t_ij, const Wrench& f_in_j);
StiffnessMatrix transform_stiffness(const Transform& t_ij,
                                    const StiffnessMatrix& k_in_j);
WrenchMatrix transform_wrench_matrix(const Transform& t_ij,
                                     const WrenchMatrix& w_in_j);

// exp: R^3 -> SO(3) and its principal-branch inverse.
Rotation exp_rotation(const Eigen::Vector3d& omega);
// Throws BranchAmbiguityError at rotation angle pi.
Eigen::Vector3d log_rotation(const Rotation& r);

// exp: R^6 -> SE(3), X = (omega, v); principal-branch log.
Transform exp_pose(const Vector6d& x, const FrameId& from, const FrameId& to);
Vector6d log_pose(const Transform& t);

// d/dt Ad_{T_ij} = -Ad_{T_ij} [[w],0;[v],[w]] with (w, v) = V^j_ji.
Matrix6d adjoint_rate(const Transform& t_ij, const Twist& v_ji_in_j);

// Fdot^i = -W^i V^i_ij + Ad_{T_ji}^T Fdot^j for a wrench expressed in a
// moving frame.
Vector6d wrench_rate_transform(const WrenchMatrix& w_in_i,
                               const Twist& v_ij_in_i,
                               const Vector6d& f_rate_in_j,
                               const Transform& t_ji);

// Exact exponential-coordinate rate: Xdot such that the space twist of
// T = exp([X]) is V. Series inverse of the left Jacobian, accurate to
// machine precision for ||X|| < 0.5; the small-displacement shortcut is
// Xdot ~= V.
Vector6d displacement_rate(const Vector6d& x, const Vector6d& v);

// F^T V with a frame check; invariant under simultaneous frame changes.
double power_pairing(const Wrench& f, const Twist& v);

}  // namespace rollgrasp

#endif  // ROLLGRASP_LIE_HPP_
