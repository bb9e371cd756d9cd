#pragma once

#include "dexsim/common.hpp"

namespace dexsim {

enum class PrimitiveKind { Sphere, Box, Cylinder };

std::string to_string(PrimitiveKind kind);
PrimitiveKind primitive_kind_from_string(const std::string& s);

/// Rigid primitive with pose and velocity state.
///
/// dims is kind-specific but always stores three positive entries so a
/// uniform shape scale multiplies the whole vector:
///   sphere:   (r, r, r)
///   box:      (hx, hy, hz) half-extents
///   cylinder: (r, r, hh)   radius twice, half-height in z; axis is local z
struct ObjectPrimitive {
  std::string name;
  PrimitiveKind kind = PrimitiveKind::Sphere;
  Vec3 dims = Vec3::Constant(0.05);
  double mass = 0.05;       // kg
  double friction = 1.0;    // dimensionless
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();

  double radius() const { return dims.x(); }
  double half_height() const { return dims.z(); }
  const Vec3& half_extents() const { return dims; }

  Isometry pose() const {
    Isometry iso = Isometry::Identity();
    iso.linear() = orientation.toRotationMatrix();
    iso.translation() = position;
    return iso;
  }

  void validate() const {
    require((dims.array() > 0.0).all(), "primitive dims must be positive: " + name);
    require(mass > 0.0, "primitive mass must be positive: " + name);
    require(std::abs(orientation.norm() - 1.0) <= 1e-6,
            "primitive quaternion must be unit-norm: " + name);
  }
};

// ---------------------------------------------------------------------------
// Signed distance, object frame. Negative inside.
// ---------------------------------------------------------------------------

template <typename Derived>
double sdf_sphere(const Eigen::MatrixBase<Derived>& p, double r) {
  return p.norm() - r;
}

template <typename Derived>
double sdf_box(const Eigen::MatrixBase<Derived>& p, const Vec3& half) {
  const Vec3 q = p.cwiseAbs() - half;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

template <typename Derived>
double sdf_cylinder(const Eigen::MatrixBase<Derived>& p, double r, double hh) {
  const double dr = p.template head<2>().norm() - r;
  const double dz = std::abs(p.z()) - hh;
  const Vec2 q(dr, dz);
  return std::min(q.maxCoeff(), 0.0) + q.cwiseMax(0.0).norm();
}

/// Signed distance from a world-frame point to the primitive surface.
inline double signed_distance(const ObjectPrimitive& obj, const Vec3& p_world) {
  const Vec3 p = obj.orientation.conjugate() * (p_world - obj.position);
  switch (obj.kind) {
    case PrimitiveKind::Sphere:
      return sdf_sphere(p, obj.radius());
    case PrimitiveKind::Box:
      return sdf_box(p, obj.half_extents());
    case PrimitiveKind::Cylinder:
      return sdf_cylinder(p, obj.radius(), obj.half_height());
  }
  return 0.0;
}

/// Outward surface normal (world frame) near a point, from the SDF gradient.
inline Vec3 sdf_normal(const ObjectPrimitive& obj, const Vec3& p_world) {
  constexpr double h = 1e-6;
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 dp = Vec3::Zero();
    dp[i] = h;
    g[i] = signed_distance(obj, p_world + dp) - signed_distance(obj, p_world - dp);
  }
  const double n = g.norm();
  return n > 0.0 ? Vec3(g / n) : Vec3::UnitZ();
}

/// Distance from the center to the lowest surface point for the current
/// orientation (support in -z); the resting height above the ground plane.
inline double support_height(const ObjectPrimitive& obj) {
  const Mat3 rot = obj.orientation.toRotationMatrix();
  switch (obj.kind) {
    case PrimitiveKind::Sphere:
      return obj.radius();
    case PrimitiveKind::Box:
      return obj.half_extents().dot(rot.row(2).cwiseAbs().transpose());
    case PrimitiveKind::Cylinder: {
      const double uz = std::abs(rot(2, 2));
      return obj.half_height() * uz + obj.radius() * std::sqrt(std::max(0.0, 1.0 - uz * uz));
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Ray-primitive intersection. Rays are (origin, direction) with direction not
// necessarily normalized; returns the smallest t > 0 with hit = origin + t*dir,
// or +inf on miss.
// ---------------------------------------------------------------------------

inline double ray_sphere(const Vec3& o, const Vec3& d, double r) {
  const double a = d.squaredNorm();
  const double b = 2.0 * o.dot(d);
  const double c = o.squaredNorm() - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  const double t1 = (-b + sq) / (2.0 * a);
  if (t0 > 0.0) return t0;
  if (t1 > 0.0) return t1;
  return std::numeric_limits<double>::infinity();
}

inline double ray_box(const Vec3& o, const Vec3& d, const Vec3& half) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-300) {
      if (std::abs(o[i]) > half[i]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (-half[i] - o[i]) / d[i];
    double t1 = (half[i] - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return std::numeric_limits<double>::infinity();
  }
  if (tmin > 0.0) return tmin;
  if (tmax > 0.0) return tmax;
  return std::numeric_limits<double>::infinity();
}

inline double ray_cylinder(const Vec3& o, const Vec3& d, double r, double hh) {
  double best = std::numeric_limits<double>::infinity();
  // lateral surface
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-300) {
    const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
    const double c = o.x() * o.x() + o.y() * o.y() - r * r;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t > 0.0 && t < best && std::abs(o.z() + t * d.z()) <= hh) best = t;
      }
    }
  }
  // caps
  if (std::abs(d.z()) > 1e-300) {
    for (double zc : {-hh, hh}) {
      const double t = (zc - o.z()) / d.z();
      if (t > 0.0 && t < best) {
        const double x = o.x() + t * d.x();
        const double y = o.y() + t * d.y();
        if (x * x + y * y <= r * r) best = t;
      }
    }
  }
  return best;
}

/// World-frame ray vs primitive; returns smallest positive t or +inf.
inline double ray_intersect(const ObjectPrimitive& obj, const Vec3& origin_world,
                            const Vec3& dir_world) {
  const Quat inv = obj.orientation.conjugate();
  const Vec3 o = inv * (origin_world - obj.position);
  const Vec3 d = inv * dir_world;
  switch (obj.kind) {
    case PrimitiveKind::Sphere:
      return ray_sphere(o, d, obj.radius());
    case PrimitiveKind::Box:
      return ray_box(o, d, obj.half_extents());
    case PrimitiveKind::Cylinder:
      return ray_cylinder(o, d, obj.radius(), obj.half_height());
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace dexsim
