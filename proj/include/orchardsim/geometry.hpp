#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

namespace orchardsim {

/// Self-intersection guard on the ray parameter, in meters.
inline constexpr double kRayEpsilon = 1e-6;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr double squared_norm(const Vec3& a) { return dot(a, a); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
constexpr Vec3 component_min(const Vec3& a, const Vec3& b) {
  return {a.x < b.x ? a.x : b.x, a.y < b.y ? a.y : b.y, a.z < b.z ? a.z : b.z};
}
constexpr Vec3 component_max(const Vec3& a, const Vec3& b) {
  return {a.x > b.x ? a.x : b.x, a.y > b.y ? a.y : b.y, a.z > b.z ? a.z : b.z};
}

/// Camera-to-world rotation. The body frame is forward/left/up (x/y/z), so
/// the columns of the matrix are the world-frame forward, left and up axes.
class Rotation {
 public:
  Rotation() = default;

  /// Yaw about world +z (0 = +x), then pitch about the body left axis
  /// (positive looks up).
  static Rotation from_yaw_pitch(double yaw, double pitch);
  static Rotation from_axes(const Vec3& forward, const Vec3& left, const Vec3& up);

  const Vec3& forward() const { return forward_; }
  const Vec3& left() const { return left_; }
  const Vec3& up() const { return up_; }

  Vec3 to_world(const Vec3& body) const { return forward_ * body.x + left_ * body.y + up_ * body.z; }
  Vec3 to_body(const Vec3& world) const { return {dot(forward_, world), dot(left_, world), dot(up_, world)}; }

  friend bool operator==(const Rotation&, const Rotation&) = default;

 private:
  Vec3 forward_{1, 0, 0};
  Vec3 left_{0, 1, 0};
  Vec3 up_{0, 0, 1};
};

struct Pose {
  Vec3 position;
  Rotation orientation;
};

enum class TriangleKind : std::uint8_t { trunk = 0, branch = 1, leaf = 2, fruit = 3 };

const char* to_string(TriangleKind kind);

/// Trunk, branch and leaf geometry can hide fruit; fruit geometry cannot.
constexpr bool is_occluder(TriangleKind kind) { return kind != TriangleKind::fruit; }

struct Triangle {
  Vec3 v0;
  Vec3 v1;
  Vec3 v2;
  TriangleKind kind = TriangleKind::leaf;
  std::uint32_t tree_id = 0;
  std::optional<std::uint32_t> fruit_id;  // set iff kind == fruit

  Vec3 centroid() const { return (v0 + v1 + v2) / 3.0; }
  double area() const { return 0.5 * norm(cross(v1 - v0, v2 - v0)); }

  friend bool operator==(const Triangle&, const Triangle&) = default;
};

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit length

  /// Ray from `from` towards `to`; `to` sits at t = |to - from|.
  static Ray through(const Vec3& from, const Vec3& to) { return {from, normalized(to - from)}; }

  Vec3 at(double t) const { return origin + dir * t; }
};

/// Möller–Trumbore intersection. Returns t in (kRayEpsilon, t_max) for hits
/// strictly inside the triangle; edge grazes and degenerate triangles miss.
std::optional<double> ray_triangle_intersect(const Ray& ray, const Triangle& tri, double t_max);

/// Euclidean distance from `p` to the closest point of the triangle.
double point_triangle_distance(const Vec3& p, const Triangle& tri);

struct Aabb {
  Vec3 min{INFINITY, INFINITY, INFINITY};
  Vec3 max{-INFINITY, -INFINITY, -INFINITY};

  static Aabb of(const Triangle& tri);

  bool empty() const { return min.x > max.x || min.y > max.y || min.z > max.z; }
  void expand(const Vec3& p) {
    min = component_min(min, p);
    max = component_max(max, p);
  }
  void expand(const Aabb& box) {
    min = component_min(min, box.min);
    max = component_max(max, box.max);
  }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return (min + max) * 0.5; }
  int longest_axis() const;
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
  }
  bool contains(const Aabb& box) const { return contains(box.min) && contains(box.max); }
  Aabb inflated(double pad) const { return {min - Vec3{pad, pad, pad}, max + Vec3{pad, pad, pad}}; }

  /// Squared distance from `p` to the box (zero inside).
  double squared_distance(const Vec3& p) const;

  /// Slab test against the parameter interval [t_lo, t_hi].
  bool intersects(const Ray& ray, const Vec3& inv_dir, double t_lo, double t_hi) const;

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

class Frustum {
 public:
  Frustum(const Vec3& apex, const Rotation& orientation, double hfov, double vfov, double far);

  const Vec3& apex() const { return apex_; }
  const Rotation& orientation() const { return orientation_; }
  double hfov() const { return hfov_; }
  double vfov() const { return vfov_; }
  double far() const { return far_; }

  /// In front of the apex, inside both angular bounds, and no deeper than
  /// `far` along the view axis.
  bool contains(const Vec3& p) const;

 private:
  Vec3 apex_;
  Rotation orientation_;
  double hfov_;
  double vfov_;
  double far_;
  double tan_half_h_;
  double tan_half_v_;
};

bool frustum_contains(const Frustum& f, const Vec3& p);

}  // namespace orchardsim
