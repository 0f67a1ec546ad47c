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

#ifndef ROLLGRASP_SURFACE_HPP_
#define ROLLGRASP_SURFACE_HPP_

#include <optional>
#include <string>

#include "rollgrasp/lie.hpp"

namespace rollgrasp {

class ChartDomainError : public std::runtime_error {
 public:
  explicit ChartDomainError(const std::string& what)
      : std::runtime_error(what) {}
};

class DegenerateContactError : public std::runtime_error {
 public:
  explicit DegenerateContactError(const std::string& what)
      : std::runtime_error(what) {}
};

enum class SurfaceKind { kPlane, kSphere, kCylinder };

// Parametric surface owned by a rigid body. Charts are orthogonal
// (diagonal metric) as the Montana forms require. The chart frame may be
// rotated within the body so the simulator can re-seat a chart away from
// its singularities without touching the body pose.
struct SurfaceModel {
  SurfaceKind kind = SurfaceKind::kSphere;
  double radius = 0.0;       // sphere and cylinder [m]
  double half_length = 0.0;  // cylinder chart bound along the axis; 0 = open
  FrameId body_frame;
  Rotation chart_rotation;

  static SurfaceModel plane(const FrameId& body_frame);
  static SurfaceModel sphere(double radius, const FrameId& body_frame);
  static SurfaceModel cylinder(double radius, double half_length,
                               const FrameId& body_frame);

  // Chart map in body coordinates.
  Eigen::Vector3d point_at(const Eigen::Vector2d& u) const;
  Eigen::Vector3d normal_at(const Eigen::Vector2d& u) const;
  // Inverse chart; the point must lie on the surface.
  Eigen::Vector2d chart_coordinates(const Eigen::Vector3d& p_body) const;
  FrameId contact_frame_id() const { return body_frame + ":c"; }
};

// Metric, curvature, and torsion forms plus the contact frame at a chart
// point; everything Montana's contact equations consume.
struct ContactGeometry {
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  Eigen::Matrix2d metric = Eigen::Matrix2d::Identity();      // diagonal
  Eigen::Matrix2d curvature = Eigen::Matrix2d::Zero();
  Eigen::RowVector2d torsion = Eigen::RowVector2d::Zero();
  Transform body_to_contact;  // z-axis = outward unit normal
};

ContactGeometry evaluate_contact_geometry(const SurfaceModel& surface,
                                          const Eigen::Vector2d& u);

// A matched pair of contact geometries: object side (frame {c1}) and
// fingertip side (frame {c2}), the relative chart angle phi about the
// shared normal, and the world contact point.
struct ContactPair {
  ContactGeometry object_side;
  ContactGeometry finger_side;
  double phi = 0.0;
  Eigen::Vector3d p_wc = Eigen::Vector3d::Zero();
  Transform world_to_c1;
  Transform world_to_c2;
  double gap = 0.0;  // signed; negative = penetration
};

// Checks shared origin, antiparallel z-axes, and phi-consistent x-axes.
void validate_contact_pair(const ContactPair& pair, double origin_tol = 1e-6);

// K_1 + R_phi K_2 R_phi with the reflection-form R_phi.
Eigen::Matrix2d relative_curvature(const ContactPair& pair);
Eigen::Matrix2d phi_reflection(double phi);

// L_1 in the contact frame and its world conjugate
// Ltilde_1 = Ad_{T_wc1} L_1 Ad_{T_wc1}^{-1}; the map from the relative
// twist to the motion of the contact frame over the object surface.
struct RollingMap {
  Matrix6d contact_frame = Matrix6d::Zero();
  Matrix6d world = Matrix6d::Zero();
};
RollingMap rolling_map_L1(const ContactPair& pair);

// Closest points between two posed surfaces, with chart coordinates and
// the outward normal of side A. Throws DegenerateContactError when the
// closest point is not unique (flat-on-flat, concentric, parallel axes).
struct ClosestPointResult {
  double gap = 0.0;
  Eigen::Vector3d point_a = Eigen::Vector3d::Zero();  // world
  Eigen::Vector3d point_b = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal_a = Eigen::Vector3d::Zero();
  Eigen::Vector2d u_a = Eigen::Vector2d::Zero();
  Eigen::Vector2d u_b = Eigen::Vector2d::Zero();
};
ClosestPointResult closest_point_contact(const SurfaceModel& a,
                                         const Transform& t_wa,
                                         const SurfaceModel& b,
                                         const Transform& t_wb);

// Builds a ContactPair from posed surfaces via closest points (the
// re-projection step of the simulator).
ContactPair make_contact_pair(const SurfaceModel& object,
                              const Transform& t_wo,
                              const SurfaceModel& fingertip,
                              const Transform& t_wf);

// Builds a ContactPair from known chart coordinates and angle.
ContactPair contact_pair_from_coordinates(const SurfaceModel& object,
                                          const Transform& t_wo,
                                          const Eigen::Vector2d& u1,
                                          const SurfaceModel& fingertip,
                                          const Transform& t_wf,
                                          const Eigen::Vector2d& u2,
                                          double phi);

// The pose that brings the fingertip's contact frame at u2 into
// coincidence with the object's contact frame at u1 (z-axes antiparallel,
// x-axes separated by phi). Zero gap by construction.
Transform fingertip_pose_from_contact(const Transform& t_wo,
                                      const SurfaceModel& object,
                                      const Eigen::Vector2d& u1,
                                      const SurfaceModel& fingertip,
                                      const Eigen::Vector2d& u2, double phi);

// Chart re-seating: returns a surface whose chart is centred on the given
// body point. For spheres any orientation is free; for cylinders the
// chart axis is preserved and only the azimuth is shifted.
bool chart_needs_reseat(const SurfaceModel& surface, const Eigen::Vector2d& u);
SurfaceModel reseat_chart(const SurfaceModel& surface,
                          const Eigen::Vector3d& p_body);

}  // namespace rollgrasp

#endif  // ROLLGRASP_SURFACE_HPP_
