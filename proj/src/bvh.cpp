#include "orchardsim/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace orchardsim {

namespace {

// Pads node bounds so rounding in the slab test never culls a box that
// holds a hit; the triangle test alone decides hits.
double bounds_padding(const Aabb& box) {
  const double scale = std::max({std::abs(box.min.x), std::abs(box.min.y), std::abs(box.min.z),
                                 std::abs(box.max.x), std::abs(box.max.y), std::abs(box.max.z), 1.0});
  return 1e-9 * scale;
}

}  // namespace

Bvh::Bvh(std::span<const Triangle> triangles) {
  if (triangles.empty()) return;
  const auto n = static_cast<std::uint32_t>(triangles.size());
  indices_.resize(n);
  std::iota(indices_.begin(), indices_.end(), 0u);
  std::vector<Vec3> centroids(n);
  for (std::uint32_t i = 0; i < n; ++i) centroids[i] = triangles[i].centroid();

  triangles_.assign(triangles.begin(), triangles.end());  // input order during build
  nodes_.reserve(2 * (n / kMaxLeafSize + 1));
  build(0, n, centroids);

  std::vector<Triangle> ordered;
  ordered.reserve(n);
  slot_of_.resize(n);
  for (std::uint32_t slot = 0; slot < n; ++slot) {
    ordered.push_back(triangles_[indices_[slot]]);
    slot_of_[indices_[slot]] = slot;
  }
  triangles_ = std::move(ordered);
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
  const auto node_index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Aabb bounds;
  Aabb centroid_bounds;
  for (std::uint32_t i = begin; i < end; ++i) {
    bounds.expand(Aabb::of(triangles_[indices_[i]]));
    centroid_bounds.expand(centroids[indices_[i]]);
  }
  nodes_[node_index].bounds = bounds.inflated(bounds_padding(bounds));

  const std::uint32_t count = end - begin;
  if (count <= kMaxLeafSize) {
    nodes_[node_index].first = begin;
    nodes_[node_index].count = count;
    return node_index;
  }

  const int axis = centroid_bounds.longest_axis();
  const std::uint32_t mid = begin + count / 2;
  // Strict total order (centroid, then input index) keeps the split
  // independent of the standard library's selection algorithm.
  std::nth_element(indices_.begin() + begin, indices_.begin() + mid, indices_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroids[a][axis], cb = centroids[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  const std::uint32_t left = build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[node_index].first = left;
  nodes_[node_index].right = right;
  nodes_[node_index].count = 0;
  return node_index;
}

double Bvh::nearest_distance(const Vec3& p, double max_distance) const {
  double best = max_distance;
  if (nodes_.empty()) return best;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    if (node.bounds.squared_distance(p) >= best * best) continue;
    if (node.is_leaf()) {
      for (std::uint32_t slot = node.first; slot < node.first + node.count; ++slot) {
        best = std::min(best, point_triangle_distance(p, triangles_[slot]));
      }
    } else {
      const double dl = nodes_[node.first].bounds.squared_distance(p);
      const double dr = nodes_[node.right].bounds.squared_distance(p);
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = node.first;
      } else {
        stack[top++] = node.first;
        stack[top++] = node.right;
      }
    }
  }
  return best;
}

Bvh build_bvh(std::span<const Triangle> triangles) { return Bvh(triangles); }

}  // namespace orchardsim
