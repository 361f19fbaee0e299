#include "orchardsim/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace orchardsim {

Rotation Rotation::from_yaw_pitch(double yaw, double pitch) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  Rotation r;
  r.forward_ = {cp * cy, cp * sy, sp};
  r.left_ = {-sy, cy, 0.0};
  r.up_ = {-sp * cy, -sp * sy, cp};
  return r;
}

Rotation Rotation::from_axes(const Vec3& forward, const Vec3& left, const Vec3& up) {
  Rotation r;
  r.forward_ = forward;
  r.left_ = left;
  r.up_ = up;
  return r;
}

const char* to_string(TriangleKind kind) {
  switch (kind) {
    case TriangleKind::trunk: return "trunk";
    case TriangleKind::branch: return "branch";
    case TriangleKind::leaf: return "leaf";
    case TriangleKind::fruit: return "fruit";
  }
  return "unknown";
}

std::optional<double> ray_triangle_intersect(const Ray& ray, const Triangle& tri, double t_max) {
  const Vec3 e1 = tri.v1 - tri.v0;
  const Vec3 e2 = tri.v2 - tri.v0;
  const Vec3 n = cross(e1, e2);
  const double n_len = norm(n);
  if (!(n_len > 1e-20)) return std::nullopt;  // degenerate

  const Vec3 p = cross(ray.dir, e2);
  const double det = dot(e1, p);
  // |det| / |n| is the cosine between the ray and the plane normal.
  if (std::abs(det) <= 1e-12 * n_len) return std::nullopt;
  const double inv_det = 1.0 / det;

  const Vec3 s = ray.origin - tri.v0;
  const double u = dot(s, p) * inv_det;
  if (!(u > 0.0 && u < 1.0)) return std::nullopt;

  const Vec3 q = cross(s, e1);
  const double v = dot(ray.dir, q) * inv_det;
  if (!(v > 0.0 && u + v < 1.0)) return std::nullopt;

  const double t = dot(e2, q) * inv_det;
  if (!(t > kRayEpsilon && t < t_max)) return std::nullopt;
  return t;
}

double point_triangle_distance(const Vec3& p, const Triangle& tri) {
  // Closest-point-on-triangle by Voronoi region classification.
  const Vec3& a = tri.v0;
  const Vec3& b = tri.v1;
  const Vec3& c = tri.v2;
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return norm(ap);

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return norm(bp);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double w = d1 / (d1 - d3);
    return distance(p, a + ab * w);
  }

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return norm(cp);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return distance(p, a + ac * w);
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return distance(p, b + (c - b) * w);
  }

  const double denom = va + vb + vc;
  if (!(std::abs(denom) > 0.0)) {
    // Degenerate triangle: fall back to the three edges.
    auto seg = [&](const Vec3& s0, const Vec3& s1) {
      const Vec3 d = s1 - s0;
      const double len2 = squared_norm(d);
      const double t = len2 > 0.0 ? std::clamp(dot(p - s0, d) / len2, 0.0, 1.0) : 0.0;
      return distance(p, s0 + d * t);
    };
    return std::min({seg(a, b), seg(b, c), seg(c, a)});
  }
  const double v = vb / denom;
  const double w = vc / denom;
  return distance(p, a + ab * v + ac * w);
}

Aabb Aabb::of(const Triangle& tri) {
  Aabb box;
  box.expand(tri.v0);
  box.expand(tri.v1);
  box.expand(tri.v2);
  return box;
}

int Aabb::longest_axis() const {
  const Vec3 e = extent();
  if (e.x >= e.y && e.x >= e.z) return 0;
  return e.y >= e.z ? 1 : 2;
}

double Aabb::squared_distance(const Vec3& p) const {
  double d2 = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const double v = p[axis];
    if (v < min[axis]) d2 += (min[axis] - v) * (min[axis] - v);
    else if (v > max[axis]) d2 += (v - max[axis]) * (v - max[axis]);
  }
  return d2;
}

bool Aabb::intersects(const Ray& ray, const Vec3& inv_dir, double t_lo, double t_hi) const {
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    if (ray.dir[axis] == 0.0) {
      if (o < min[axis] || o > max[axis]) return false;
      continue;
    }
    double t0 = (min[axis] - o) * inv_dir[axis];
    double t1 = (max[axis] - o) * inv_dir[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_lo = std::max(t_lo, t0);
    t_hi = std::min(t_hi, t1);
    if (t_lo > t_hi) return false;
  }
  return true;
}

Frustum::Frustum(const Vec3& apex, const Rotation& orientation, double hfov, double vfov, double far)
    : apex_(apex),
      orientation_(orientation),
      hfov_(hfov),
      vfov_(vfov),
      far_(far),
      tan_half_h_(std::tan(hfov / 2.0)),
      tan_half_v_(std::tan(vfov / 2.0)) {
  if (!(hfov > 0.0 && hfov < kPi) || !(vfov > 0.0 && vfov < kPi)) {
    throw std::invalid_argument("frustum field of view must lie in (0, pi)");
  }
  if (!(far > 0.0)) throw std::invalid_argument("frustum far distance must be positive");
}

bool Frustum::contains(const Vec3& p) const {
  const Vec3 local = orientation_.to_body(p - apex_);
  // Relative slack so a point placed at exactly `far` along the axis survives rounding.
  if (!(local.x > 0.0) || local.x > far_ * (1.0 + 1e-12)) return false;
  return std::abs(local.y) <= local.x * tan_half_h_ && std::abs(local.z) <= local.x * tan_half_v_;
}

bool frustum_contains(const Frustum& f, const Vec3& p) { return f.contains(p); }

}  // namespace orchardsim
