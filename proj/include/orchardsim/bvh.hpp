#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "orchardsim/geometry.hpp"

namespace orchardsim {

struct BvhNode {
  Aabb bounds;
  // Interior: index of the left child; the right child follows its subtree.
  // Leaf: first slot in the triangle permutation.
  std::uint32_t first = 0;
  std::uint32_t right = 0;  // interior only
  std::uint32_t count = 0;  // > 0 for leaves

  bool is_leaf() const { return count > 0; }
};

struct BvhHit {
  double t = 0.0;
  std::uint32_t triangle = 0;  // index into the input triangle list
};

/// Bounding volume hierarchy over a triangle soup. Median split on the
/// longest axis of the centroid bounds, at most kMaxLeafSize triangles per
/// leaf. Owns a leaf-ordered copy of the triangles.
class Bvh {
 public:
  static constexpr std::uint32_t kMaxLeafSize = 4;

  Bvh() = default;
  explicit Bvh(std::span<const Triangle> triangles);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return triangles_.size(); }
  const std::vector<BvhNode>& nodes() const { return nodes_; }
  /// Original index of the triangle stored in each leaf slot.
  const std::vector<std::uint32_t>& triangle_indices() const { return indices_; }
  /// Triangle by original input index.
  const Triangle& triangle(std::uint32_t input_index) const { return triangles_[slot_of_[input_index]]; }

  /// True iff some triangle accepted by `filter` intersects the ray in
  /// (kRayEpsilon, t_max). `filter` sees the triangle and its input index.
  template <class Filter>
  bool any_hit(const Ray& ray, double t_max, Filter&& filter) const;
  bool any_hit(const Ray& ray, double t_max) const {
    return any_hit(ray, t_max, [](const Triangle&, std::uint32_t) { return true; });
  }

  template <class Filter>
  std::optional<BvhHit> nearest_hit(const Ray& ray, double t_max, Filter&& filter) const;
  std::optional<BvhHit> nearest_hit(const Ray& ray, double t_max) const {
    return nearest_hit(ray, t_max, [](const Triangle&, std::uint32_t) { return true; });
  }

  /// Distance from `p` to the closest triangle, or `max_distance` when
  /// nothing is closer.
  double nearest_distance(const Vec3& p, double max_distance) const;

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

  std::vector<BvhNode> nodes_;
  std::vector<Triangle> triangles_;      // leaf order
  std::vector<std::uint32_t> indices_;   // leaf slot -> input index
  std::vector<std::uint32_t> slot_of_;   // input index -> leaf slot
};

Bvh build_bvh(std::span<const Triangle> triangles);

template <class Filter>
bool bvh_any_hit(const Bvh& bvh, const Ray& ray, double t_max, Filter&& filter) {
  return bvh.any_hit(ray, t_max, [&](const Triangle& tri, std::uint32_t) { return filter(tri); });
}

namespace detail {
inline Vec3 inverse_direction(const Vec3& d) {
  return {d.x != 0.0 ? 1.0 / d.x : 0.0, d.y != 0.0 ? 1.0 / d.y : 0.0, d.z != 0.0 ? 1.0 / d.z : 0.0};
}
}  // namespace detail

template <class Filter>
bool Bvh::any_hit(const Ray& ray, double t_max, Filter&& filter) const {
  if (nodes_.empty()) return false;
  const Vec3 inv = detail::inverse_direction(ray.dir);
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    if (!node.bounds.intersects(ray, inv, 0.0, t_max)) continue;
    if (node.is_leaf()) {
      for (std::uint32_t slot = node.first; slot < node.first + node.count; ++slot) {
        const Triangle& tri = triangles_[slot];
        if (!filter(tri, indices_[slot])) continue;
        if (ray_triangle_intersect(ray, tri, t_max)) return true;
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = node.first;
    }
  }
  return false;
}

template <class Filter>
std::optional<BvhHit> Bvh::nearest_hit(const Ray& ray, double t_max, Filter&& filter) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv = detail::inverse_direction(ray.dir);
  std::optional<BvhHit> best;
  double limit = t_max;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    if (!node.bounds.intersects(ray, inv, 0.0, limit)) continue;
    if (node.is_leaf()) {
      for (std::uint32_t slot = node.first; slot < node.first + node.count; ++slot) {
        const Triangle& tri = triangles_[slot];
        if (!filter(tri, indices_[slot])) continue;
        // Ties in t resolve to the lower input index so results do not
        // depend on traversal order.
        if (auto t = ray_triangle_intersect(ray, tri, std::nextafter(limit, INFINITY))) {
          if (!best || *t < best->t || (*t == best->t && indices_[slot] < best->triangle)) {
            best = BvhHit{*t, indices_[slot]};
            limit = *t;
          }
        }
      }
    } else {
      const BvhNode& left = nodes_[node.first];
      const BvhNode& right = nodes_[node.right];
      // Visit the nearer child first.
      const double dl = dot(left.bounds.center() - ray.origin, ray.dir);
      const double dr = dot(right.bounds.center() - ray.origin, ray.dir);
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = node.first;
      } else {
        stack[top++] = node.first;
        stack[top++] = node.right;
      }
    }
  }
  if (best && !(best->t < t_max)) return std::nullopt;
  return best;
}

}  // namespace orchardsim
