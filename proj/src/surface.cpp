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

#include "rollgrasp/surface.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rollgrasp {

namespace {

// Chart limits. Spheres use longitude/latitude; the simulator re-seats
// beyond 80 deg latitude, evaluation refuses beyond 85 deg. Cylinders
// wrap the azimuth; plane charts are nominally unbounded.
constexpr double kSphereReseatLatitude = 80.0 * M_PI / 180.0;
constexpr double kSphereMaxLatitude = 85.0 * M_PI / 180.0;
constexpr double kCylinderReseatAzimuth = 2.8;
constexpr double kRelCurvatureMaxCondition = 1e8;

Eigen::Matrix3d frame_axes(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                           const Eigen::Vector3d& z) {
  Eigen::Matrix3d m;
  m.col(0) = x;
  m.col(1) = y;
  m.col(2) = z;
  return m;
}

}  // namespace

SurfaceModel SurfaceModel::plane(const FrameId& body_frame) {
  SurfaceModel s;
  s.kind = SurfaceKind::kPlane;
  s.body_frame = body_frame;
  return s;
}

SurfaceModel SurfaceModel::sphere(double radius, const FrameId& body_frame) {
  if (radius <= 0.0) throw InvariantError("sphere radius must be positive");
  SurfaceModel s;
  s.kind = SurfaceKind::kSphere;
  s.radius = radius;
  s.body_frame = body_frame;
  return s;
}

SurfaceModel SurfaceModel::cylinder(double radius, double half_length,
                                    const FrameId& body_frame) {
  if (radius <= 0.0) throw InvariantError("cylinder radius must be positive");
  SurfaceModel s;
  s.kind = SurfaceKind::kCylinder;
  s.radius = radius;
  s.half_length = half_length;
  s.body_frame = body_frame;
  return s;
}

Eigen::Vector3d SurfaceModel::point_at(const Eigen::Vector2d& u) const {
  Eigen::Vector3d p;
  switch (kind) {
    case SurfaceKind::kPlane:
      p = Eigen::Vector3d(u.x(), u.y(), 0.0);
      break;
    case SurfaceKind::kSphere: {
      const double lon = u.x(), lat = u.y();
      p = radius * Eigen::Vector3d(std::cos(lat) * std::cos(lon),
                                   std::cos(lat) * std::sin(lon),
                                   std::sin(lat));
      break;
    }
    case SurfaceKind::kCylinder:
      p = Eigen::Vector3d(radius * std::cos(u.x()), radius * std::sin(u.x()),
                          u.y());
      break;
  }
  return chart_rotation * p;
}

Eigen::Vector3d SurfaceModel::normal_at(const Eigen::Vector2d& u) const {
  Eigen::Vector3d n;
  switch (kind) {
    case SurfaceKind::kPlane:
      n = Eigen::Vector3d::UnitZ();
      break;
    case SurfaceKind::kSphere: {
      const double lon = u.x(), lat = u.y();
      n = Eigen::Vector3d(std::cos(lat) * std::cos(lon),
                          std::cos(lat) * std::sin(lon), std::sin(lat));
      break;
    }
    case SurfaceKind::kCylinder:
      n = Eigen::Vector3d(std::cos(u.x()), std::sin(u.x()), 0.0);
      break;
  }
  return chart_rotation * n;
}

Eigen::Vector2d SurfaceModel::chart_coordinates(
    const Eigen::Vector3d& p_body) const {
  const Eigen::Vector3d p = chart_rotation.transposed() * p_body;
  switch (kind) {
    case SurfaceKind::kPlane:
      return Eigen::Vector2d(p.x(), p.y());
    case SurfaceKind::kSphere: {
      const double lat = std::asin(std::clamp(p.z() / radius, -1.0, 1.0));
      return Eigen::Vector2d(std::atan2(p.y(), p.x()), lat);
    }
    case SurfaceKind::kCylinder:
      return Eigen::Vector2d(std::atan2(p.y(), p.x()), p.z());
  }
  throw std::logic_error("unreachable");
}

ContactGeometry evaluate_contact_geometry(const SurfaceModel& surface,
                                          const Eigen::Vector2d& u) {
  ContactGeometry g;
  g.u = u;
  Eigen::Vector3d x, y, z;  // chart-local axes before chart rotation
  switch (surface.kind) {
    case SurfaceKind::kPlane: {
      x = Eigen::Vector3d::UnitX();
      y = Eigen::Vector3d::UnitY();
      z = Eigen::Vector3d::UnitZ();
      g.metric = Eigen::Matrix2d::Identity();
      g.curvature.setZero();
      g.torsion.setZero();
      break;
    }
    case SurfaceKind::kSphere: {
      const double lon = u.x(), lat = u.y();
      if (std::abs(lat) > kSphereMaxLatitude) {
        throw ChartDomainError("sphere chart evaluated too close to a pole");
      }
      const double cl = std::cos(lat), sl = std::sin(lat);
      const double co = std::cos(lon), so = std::sin(lon);
      x = Eigen::Vector3d(-so, co, 0.0);
      y = Eigen::Vector3d(-sl * co, -sl * so, cl);
      z = Eigen::Vector3d(cl * co, cl * so, sl);
      const double r = surface.radius;
      g.metric = Eigen::Vector2d(r * cl, r).asDiagonal();
      g.curvature = Eigen::Matrix2d::Identity() / r;
      g.torsion << sl / (r * cl), 0.0;
      break;
    }
    case SurfaceKind::kCylinder: {
      if (surface.half_length > 0.0 &&
          std::abs(u.y()) > surface.half_length) {
        throw ChartDomainError("cylinder chart evaluated beyond its length");
      }
      const double co = std::cos(u.x()), so = std::sin(u.x());
      x = Eigen::Vector3d(-so, co, 0.0);
      y = Eigen::Vector3d::UnitZ();
      z = Eigen::Vector3d(co, so, 0.0);
      const double r = surface.radius;
      g.metric = Eigen::Vector2d(r, 1.0).asDiagonal();
      g.curvature << 1.0 / r, 0.0, 0.0, 0.0;
      g.torsion.setZero();
      break;
    }
  }
  const Eigen::Matrix3d axes = surface.chart_rotation.matrix() *
                               frame_axes(x, y, z);
  g.body_to_contact.rotation = Rotation::trusted(axes).renormalized();
  g.body_to_contact.translation = surface.point_at(u);
  g.body_to_contact.from = surface.body_frame;
  g.body_to_contact.to = surface.contact_frame_id();
  return g;
}

Eigen::Matrix2d phi_reflection(double phi) {
  Eigen::Matrix2d r;
  r << std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi);
  return r;
}

Eigen::Matrix2d relative_curvature(const ContactPair& pair) {
  const Eigen::Matrix2d r_phi = phi_reflection(pair.phi);
  return pair.object_side.curvature +
         r_phi * pair.finger_side.curvature * r_phi;
}

void validate_contact_pair(const ContactPair& pair, double origin_tol) {
  const double origin_gap =
      (pair.world_to_c1.translation - pair.world_to_c2.translation).norm();
  if (origin_gap > origin_tol) {
    throw InvariantError("contact frames do not share an origin (gap " +
                         std::to_string(origin_gap) + " m)");
  }
  const Eigen::Vector3d z1 = pair.world_to_c1.rotation.matrix().col(2);
  const Eigen::Vector3d z2 = pair.world_to_c2.rotation.matrix().col(2);
  if ((z1 + z2).norm() > 1e-8) {
    throw InvariantError("contact normals are not antiparallel");
  }
  const Eigen::Vector3d x2 = pair.world_to_c2.rotation.matrix().col(0);
  const Eigen::Vector3d x1 = pair.world_to_c1.rotation.matrix().col(0);
  const Eigen::Vector3d y1 = pair.world_to_c1.rotation.matrix().col(1);
  const double phi = std::atan2(x2.dot(y1), x2.dot(x1));
  if (std::abs(std::remainder(phi - pair.phi, 2.0 * M_PI)) > 1e-8) {
    throw InvariantError("stored phi disagrees with the contact frames");
  }
}

RollingMap rolling_map_L1(const ContactPair& pair) {
  const Eigen::Matrix2d k_rel = relative_curvature(pair);
  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(k_rel);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > kRelCurvatureMaxCondition) {
    throw DegenerateContactError(
        "relative curvature form is (near-)singular; rolling kinematics "
        "undefined (flat-on-flat contact)");
  }

  const Eigen::Matrix2d k1 = pair.object_side.curvature;
  Eigen::Matrix<double, 6, 2> g1;
  Eigen::Matrix2d rot90;
  rot90 << 0, -1, 1, 0;
  g1.topRows<2>() = rot90 * k1;
  g1.row(2) = pair.object_side.torsion;
  g1.block<2, 2>(3, 0) = Eigen::Matrix2d::Identity();
  g1.row(5).setZero();

  Eigen::Matrix<double, 2, 6> n = Eigen::Matrix<double, 2, 6>::Zero();
  n(0, 1) = 1.0;
  n(1, 0) = -1.0;

  RollingMap map;
  map.contact_frame = g1 * k_rel.inverse() * n;
  const Matrix6d ad = adjoint(pair.world_to_c1);
  map.world = ad * map.contact_frame * adjoint(pair.world_to_c1.inverse());
  return map;
}

namespace {

struct PosedSurface {
  const SurfaceModel* model;
  const Transform* pose;  // world -> body

  Eigen::Vector3d to_world(const Eigen::Vector3d& p_body) const {
    return (*pose) * p_body;
  }
  Eigen::Vector3d dir_to_world(const Eigen::Vector3d& d_body) const {
    return pose->rotation * d_body;
  }
  Eigen::Vector3d to_body(const Eigen::Vector3d& p_world) const {
    return pose->inverse() * p_world;
  }
  Eigen::Vector3d center() const { return pose->translation; }
  Eigen::Vector3d axis() const {
    return dir_to_world(model->chart_rotation * Eigen::Vector3d::UnitZ());
  }
};

ClosestPointResult sphere_sphere(const PosedSurface& a,
                                 const PosedSurface& b) {
  const Eigen::Vector3d ca = a.center(), cb = b.center();
  const double d = (cb - ca).norm();
  if (d < 1e-12) {
    throw DegenerateContactError("concentric spheres: closest point not unique");
  }
  const Eigen::Vector3d n = (cb - ca) / d;
  ClosestPointResult r;
  r.gap = d - a.model->radius - b.model->radius;
  r.point_a = ca + a.model->radius * n;
  r.point_b = cb - b.model->radius * n;
  r.normal_a = n;
  r.u_a = a.model->chart_coordinates(a.to_body(r.point_a));
  r.u_b = b.model->chart_coordinates(b.to_body(r.point_b));
  return r;
}

ClosestPointResult sphere_plane(const PosedSurface& sph,
                                const PosedSurface& pl) {
  const Eigen::Vector3d n = pl.axis();  // outward plane normal, world
  const double h = n.dot(sph.center() - pl.center());
  if (h < 1e-9) {
    throw DegenerateContactError(
        "sphere center behind the plane: contact undefined");
  }
  ClosestPointResult r;
  r.gap = h - sph.model->radius;
  r.point_a = sph.center() - sph.model->radius * n;
  r.point_b = sph.center() - h * n;
  r.normal_a = -n;
  r.u_a = sph.model->chart_coordinates(sph.to_body(r.point_a));
  r.u_b = pl.model->chart_coordinates(pl.to_body(r.point_b));
  return r;
}

ClosestPointResult sphere_cylinder(const PosedSurface& sph,
                                   const PosedSurface& cyl) {
  const Eigen::Vector3d q = cyl.center();
  const Eigen::Vector3d d = cyl.axis();
  const Eigen::Vector3d rel = sph.center() - q;
  const double t = d.dot(rel);
  const Eigen::Vector3d radial = rel - t * d;
  const double rho = radial.norm();
  if (rho < 1e-12) {
    throw DegenerateContactError(
        "sphere center on the cylinder axis: closest point not unique");
  }
  const Eigen::Vector3d n = radial / rho;  // outward cylinder normal
  ClosestPointResult r;
  r.gap = rho - cyl.model->radius - sph.model->radius;
  r.point_a = sph.center() - sph.model->radius * n;
  r.point_b = q + t * d + cyl.model->radius * n;
  r.normal_a = -n;
  r.u_a = sph.model->chart_coordinates(sph.to_body(r.point_a));
  r.u_b = cyl.model->chart_coordinates(cyl.to_body(r.point_b));
  return r;
}

ClosestPointResult cylinder_cylinder(const PosedSurface& a,
                                     const PosedSurface& b) {
  const Eigen::Vector3d da = a.axis(), db = b.axis();
  const Eigen::Vector3d cross = da.cross(db);
  if (cross.norm() < 1e-8) {
    throw DegenerateContactError(
        "parallel cylinder axes: line contact, closest point not unique");
  }
  // Closest points of the two axis lines.
  const Eigen::Vector3d w = b.center() - a.center();
  const double aa = 1.0, bb = da.dot(db), cc = 1.0;
  const double de = da.dot(w), e = db.dot(w);
  const double denom = aa * cc - bb * bb;
  const double ta = (de * cc - bb * e) / denom;
  const double tb = (bb * de - aa * e) / denom;
  const Eigen::Vector3d pa = a.center() + ta * da;
  const Eigen::Vector3d pb = b.center() + tb * db;
  const double dist = (pb - pa).norm();
  if (dist < 1e-12) {
    throw DegenerateContactError("intersecting cylinder axes");
  }
  const Eigen::Vector3d n = (pb - pa) / dist;
  ClosestPointResult r;
  r.gap = dist - a.model->radius - b.model->radius;
  r.point_a = pa + a.model->radius * n;
  r.point_b = pb - b.model->radius * n;
  r.normal_a = n;
  r.u_a = a.model->chart_coordinates(a.to_body(r.point_a));
  r.u_b = b.model->chart_coordinates(b.to_body(r.point_b));
  return r;
}

ClosestPointResult swap_sides(ClosestPointResult r) {
  std::swap(r.point_a, r.point_b);
  std::swap(r.u_a, r.u_b);
  r.normal_a = -r.normal_a;
  return r;
}

}  // namespace

ClosestPointResult closest_point_contact(const SurfaceModel& a,
                                         const Transform& t_wa,
                                         const SurfaceModel& b,
                                         const Transform& t_wb) {
  const PosedSurface pa{&a, &t_wa};
  const PosedSurface pb{&b, &t_wb};
  using K = SurfaceKind;
  if (a.kind == K::kSphere && b.kind == K::kSphere)
    return sphere_sphere(pa, pb);
  if (a.kind == K::kSphere && b.kind == K::kPlane)
    return sphere_plane(pa, pb);
  if (a.kind == K::kPlane && b.kind == K::kSphere)
    return swap_sides(sphere_plane(pb, pa));
  if (a.kind == K::kSphere && b.kind == K::kCylinder)
    return sphere_cylinder(pa, pb);
  if (a.kind == K::kCylinder && b.kind == K::kSphere)
    return swap_sides(sphere_cylinder(pb, pa));
  if (a.kind == K::kCylinder && b.kind == K::kCylinder)
    return cylinder_cylinder(pa, pb);
  if (a.kind == K::kPlane && b.kind == K::kPlane) {
    throw DegenerateContactError(
        "plane-plane contact: closest point not unique");
  }
  // Plane vs cylinder: the lateral surface only touches a plane along a
  // line (parallel axis) or at an unmodeled end cap.
  throw DegenerateContactError(
      "plane-cylinder closest point is degenerate for lateral surfaces");
}

namespace {

double phi_between(const Transform& t_wc1, const Transform& t_wc2) {
  const Eigen::Matrix3d r12 =
      t_wc1.rotation.matrix().transpose() * t_wc2.rotation.matrix();
  if (std::abs(r12(2, 2) + 1.0) > 1e-6) {
    throw InvariantError("contact normals are not antiparallel");
  }
  return std::atan2(r12(1, 0), r12(0, 0));
}

}  // namespace

ContactPair contact_pair_from_coordinates(const SurfaceModel& object,
                                          const Transform& t_wo,
                                          const Eigen::Vector2d& u1,
                                          const SurfaceModel& fingertip,
                                          const Transform& t_wf,
                                          const Eigen::Vector2d& u2,
                                          double phi) {
  ContactPair pair;
  pair.object_side = evaluate_contact_geometry(object, u1);
  pair.finger_side = evaluate_contact_geometry(fingertip, u2);
  pair.world_to_c1 = t_wo * pair.object_side.body_to_contact;
  pair.world_to_c2 = t_wf * pair.finger_side.body_to_contact;
  pair.phi = phi;
  pair.p_wc =
      0.5 * (pair.world_to_c1.translation + pair.world_to_c2.translation);
  pair.gap = 0.0;
  return pair;
}

ContactPair make_contact_pair(const SurfaceModel& object,
                              const Transform& t_wo,
                              const SurfaceModel& fingertip,
                              const Transform& t_wf) {
  const ClosestPointResult cp =
      closest_point_contact(object, t_wo, fingertip, t_wf);
  ContactPair pair;
  pair.object_side = evaluate_contact_geometry(object, cp.u_a);
  pair.finger_side = evaluate_contact_geometry(fingertip, cp.u_b);
  pair.world_to_c1 = t_wo * pair.object_side.body_to_contact;
  pair.world_to_c2 = t_wf * pair.finger_side.body_to_contact;
  pair.phi = phi_between(pair.world_to_c1, pair.world_to_c2);
  pair.p_wc = 0.5 * (cp.point_a + cp.point_b);
  pair.gap = cp.gap;
  return pair;
}

Transform fingertip_pose_from_contact(const Transform& t_wo,
                                      const SurfaceModel& object,
                                      const Eigen::Vector2d& u1,
                                      const SurfaceModel& fingertip,
                                      const Eigen::Vector2d& u2, double phi) {
  const ContactGeometry g1 = evaluate_contact_geometry(object, u1);
  const ContactGeometry g2 = evaluate_contact_geometry(fingertip, u2);

  Transform flip;
  const double c = std::cos(phi), s = std::sin(phi);
  Eigen::Matrix3d rf;
  rf << c, s, 0, s, -c, 0, 0, 0, -1;
  flip.rotation = Rotation::trusted(rf);
  flip.from = object.contact_frame_id();
  flip.to = fingertip.contact_frame_id();

  return t_wo * g1.body_to_contact * flip * g2.body_to_contact.inverse();
}

bool chart_needs_reseat(const SurfaceModel& surface,
                        const Eigen::Vector2d& u) {
  switch (surface.kind) {
    case SurfaceKind::kPlane:
      return false;
    case SurfaceKind::kSphere:
      return std::abs(u.y()) > kSphereReseatLatitude;
    case SurfaceKind::kCylinder:
      return std::abs(u.x()) > kCylinderReseatAzimuth;
  }
  return false;
}

SurfaceModel reseat_chart(const SurfaceModel& surface,
                          const Eigen::Vector3d& p_body) {
  SurfaceModel out = surface;
  switch (surface.kind) {
    case SurfaceKind::kPlane:
      break;
    case SurfaceKind::kSphere: {
      const Eigen::Vector3d d = p_body.normalized();
      // Minimal rotation taking the chart's (1,0,0) direction to d.
      const Eigen::Vector3d from = Eigen::Vector3d::UnitX();
      const Eigen::Quaterniond q =
          Eigen::Quaterniond::FromTwoVectors(from, d);
      out.chart_rotation = Rotation::trusted(q.toRotationMatrix());
      break;
    }
    case SurfaceKind::kCylinder: {
      const Eigen::Vector3d p_chart =
          surface.chart_rotation.transposed() * p_body;
      const double theta = std::atan2(p_chart.y(), p_chart.x());
      out.chart_rotation =
          surface.chart_rotation *
          Rotation::axis_angle(Eigen::Vector3d::UnitZ(), theta);
      break;
    }
  }
  return out;
}

}  // namespace rollgrasp
