#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orchardsim/geometry.hpp"

namespace orchardsim {

template <class T>
struct Range {
  T min{};
  T max{};

  bool valid() const { return min <= max; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Parameters of the recursive tree generator.
///
/// The trunk counts as the first branching level, so `branching_levels = 1`
/// yields a bare trunk. Level-k branches (k >= 1) spring from the end of
/// their parent, deviate from it by `branch_pitch`, and are
/// `branch_length_ratio` times as long as their parent; the first level is
/// sized so a full chain reaches roughly `canopy_radius` from the trunk top.
/// Leaves cluster around terminal branches; fruits sit inside the leaf
/// clusters of sampled terminal branches.
struct TreeParams {
  double trunk_height = 2.0;
  double trunk_radius = 0.15;
  int branching_levels = 4;
  Range<int> branches_per_node{3, 4};
  double branch_length_ratio = 0.6;
  Range<double> branch_pitch{deg_to_rad(25.0), deg_to_rad(55.0)};
  Range<int> leaf_count_per_terminal{20, 30};
  double leaf_size = 0.12;
  Range<int> fruit_count{40, 80};
  double fruit_radius = 0.03;
  double canopy_radius = 3.0;
  /// 0 = fruits spread evenly over terminal heights; towards 1 = fruits
  /// concentrate around fruit_height_center.
  double fruit_interior_bias = 0.5;
  /// Relative height in the terminal-height range (0 = lowest, 1 = highest)
  /// where fruit placement peaks.
  double fruit_height_center = 0.5;
  /// Radius of the ball, relative to the leaf-cluster radius, around a
  /// terminal branch point in which a fruit center is placed.
  double fruit_cluster_spread = 0.8;

  /// Throws std::invalid_argument on the first violated invariant.
  void validate() const;

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct OrchardLayout {
  int rows = 2;
  int cols = 5;
  double row_spacing = 7.6;   // along y
  double tree_spacing = 7.3;  // along x
  double position_jitter = 0.3;

  void validate() const;

  friend bool operator==(const OrchardLayout&, const OrchardLayout&) = default;
};

struct FruitKey {
  std::uint32_t tree_id = 0;
  std::uint32_t fruit_id = 0;

  friend auto operator<=>(const FruitKey&, const FruitKey&) = default;
};

struct FruitRecord {
  std::uint32_t tree_id = 0;
  std::uint32_t fruit_id = 0;
  Vec3 center;
  double radius = 0.0;

  FruitKey key() const { return {tree_id, fruit_id}; }
  friend bool operator==(const FruitRecord&, const FruitRecord&) = default;
};

struct TreeGeometry {
  std::vector<Triangle> triangles;
  std::vector<FruitRecord> fruits;
};

struct OrchardModel {
  TreeParams params;
  OrchardLayout layout;
  std::uint64_t seed = 0;
  std::vector<Triangle> triangles;
  std::vector<FruitRecord> fruits;
  Aabb bounds;

  friend bool operator==(const OrchardModel&, const OrchardModel&) = default;
};

TreeGeometry generate_tree(const TreeParams& params, std::uint32_t tree_id, const Vec3& base, std::uint64_t seed);

/// rows x cols trees; tree (r, c) gets id r * cols + c and sits at
/// (c * tree_spacing, r * row_spacing, 0) plus uniform jitter.
OrchardModel generate_orchard(const TreeParams& params, const OrchardLayout& layout, std::uint64_t seed);

/// Nominal (unjittered) base position of tree `index`.
Vec3 nominal_tree_base(const OrchardLayout& layout, int index);

/// Named parameter sets ("walnut-like", "orange-like", "almond-like",
/// "apple-like"). Plausible dimensions, not calibrated against any survey.
std::optional<TreeParams> tree_preset(std::string_view name);
std::vector<std::string> tree_preset_names();

Aabb bounds_of(const std::vector<Triangle>& triangles);

}  // namespace orchardsim
