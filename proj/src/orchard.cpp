#include "orchardsim/orchard.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "orchardsim/rng.hpp"

namespace orchardsim {

namespace {

constexpr int kTrunkSides = 8;
constexpr int kBranchSides = 6;
constexpr double kMinBranchRadius = 0.004;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Orthonormal pair perpendicular to unit vector `axis`.
std::pair<Vec3, Vec3> perpendicular_basis(const Vec3& axis) {
  const Vec3 helper = std::abs(axis.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  const Vec3 u = normalized(cross(axis, helper));
  const Vec3 w = cross(axis, u);
  return {u, w};
}

Vec3 random_unit(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Vec3 random_in_ball(Rng& rng, double radius) {
  return random_unit(rng) * (radius * std::cbrt(rng.uniform()));
}

Triangle make_triangle(const Vec3& a, const Vec3& b, const Vec3& c, TriangleKind kind, std::uint32_t tree_id,
                       std::optional<std::uint32_t> fruit_id = std::nullopt) {
  return Triangle{a, b, c, kind, tree_id, fruit_id};
}

void add_cylinder(std::vector<Triangle>& out, const Vec3& start, const Vec3& end, double r0, double r1, int sides,
                  TriangleKind kind, std::uint32_t tree_id) {
  const Vec3 axis = normalized(end - start);
  const auto [u, w] = perpendicular_basis(axis);
  std::vector<Vec3> bottom(sides), top(sides);
  for (int i = 0; i < sides; ++i) {
    const double a = 2.0 * kPi * i / sides;
    const Vec3 radial = u * std::cos(a) + w * std::sin(a);
    bottom[i] = start + radial * r0;
    top[i] = end + radial * r1;
  }
  for (int i = 0; i < sides; ++i) {
    const int j = (i + 1) % sides;
    out.push_back(make_triangle(bottom[i], bottom[j], top[i], kind, tree_id));
    out.push_back(make_triangle(bottom[j], top[j], top[i], kind, tree_id));
  }
}

void add_icosphere(std::vector<Triangle>& out, const Vec3& center, double radius, std::uint32_t tree_id,
                   std::uint32_t fruit_id) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::array<Vec3, 12> v = {Vec3{-1, t, 0}, Vec3{1, t, 0},  Vec3{-1, -t, 0}, Vec3{1, -t, 0},
                            Vec3{0, -1, t}, Vec3{0, 1, t},  Vec3{0, -1, -t}, Vec3{0, 1, -t},
                            Vec3{t, 0, -1}, Vec3{t, 0, 1},  Vec3{-t, 0, -1}, Vec3{-t, 0, 1}};
  for (auto& p : v) p = center + normalized(p) * radius;
  static constexpr int kFaces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (const auto& f : kFaces) {
    out.push_back(make_triangle(v[f[0]], v[f[1]], v[f[2]], TriangleKind::fruit, tree_id, fruit_id));
  }
}

void add_leaf(std::vector<Triangle>& out, Rng& rng, const Vec3& center, double size, std::uint32_t tree_id) {
  const Vec3 normal = random_unit(rng);
  const auto [u0, w0] = perpendicular_basis(normal);
  const double spin = rng.uniform(0.0, 2.0 * kPi);
  const Vec3 along = u0 * std::cos(spin) + w0 * std::sin(spin);
  const Vec3 across = cross(normal, along);
  const Vec3 a = along * (0.5 * size);
  const Vec3 b = across * (0.25 * size);
  const Vec3 p00 = center - a - b, p10 = center + a - b, p11 = center + a + b, p01 = center - a + b;
  out.push_back(make_triangle(p00, p10, p11, TriangleKind::leaf, tree_id));
  out.push_back(make_triangle(p00, p11, p01, TriangleKind::leaf, tree_id));
}

// Rotates `dir` away from itself by `pitch`, around the azimuth `azimuth`.
Vec3 deflect(const Vec3& dir, double pitch, double azimuth) {
  const auto [u, w] = perpendicular_basis(dir);
  const Vec3 radial = u * std::cos(azimuth) + w * std::sin(azimuth);
  return normalized(dir * std::cos(pitch) + radial * std::sin(pitch));
}

struct Terminal {
  Vec3 start;
  Vec3 end;
  double radius;
};

struct BranchGrower {
  const TreeParams& params;
  std::uint32_t tree_id;
  Rng& rng;
  std::vector<Triangle>& out;
  std::vector<Terminal>& terminals;
  int branch_levels;
  double first_length;

  double radius_at(int level) const {
    return std::max(kMinBranchRadius, params.trunk_radius * 0.8 * std::pow(params.branch_length_ratio, level));
  }

  void grow(const Vec3& node, const Vec3& parent_dir, int level) {
    const int count = static_cast<int>(
        rng.uniform_int(params.branches_per_node.min, params.branches_per_node.max));
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    for (int i = 0; i < count; ++i) {
      const double azimuth = phase + 2.0 * kPi * (i + rng.uniform(-0.3, 0.3)) / count;
      const double pitch = rng.uniform(params.branch_pitch.min, params.branch_pitch.max);
      const Vec3 dir = deflect(parent_dir, pitch, azimuth);
      const double length =
          first_length * std::pow(params.branch_length_ratio, level - 1) * rng.uniform(0.85, 1.15);
      const Vec3 end = node + dir * length;
      const double r0 = radius_at(level);
      const double r1 = radius_at(level + 1);
      add_cylinder(out, node, end, r0, r1, kBranchSides, TriangleKind::branch, tree_id);
      if (level >= branch_levels) {
        terminals.push_back({node, end, r1});
      } else {
        grow(end, dir, level + 1);
      }
    }
  }
};

}  // namespace

void TreeParams::validate() const {
  require(trunk_height > 0 && trunk_radius > 0, "trunk dimensions must be positive");
  require(branching_levels >= 1, "branching_levels must be >= 1");
  require(branches_per_node.valid() && branches_per_node.min >= 1, "branches_per_node must be a non-empty range >= 1");
  require(branch_length_ratio > 0 && branch_length_ratio < 1, "branch_length_ratio must lie in (0, 1)");
  require(branch_pitch.valid() && branch_pitch.min >= 0 && branch_pitch.max < kPi, "branch_pitch must be a range in [0, pi)");
  require(leaf_count_per_terminal.valid() && leaf_count_per_terminal.min >= 0, "leaf_count_per_terminal must be a non-negative range");
  require(leaf_size > 0, "leaf_size must be positive");
  require(fruit_count.valid() && fruit_count.min >= 0, "fruit_count must be a non-negative range");
  require(fruit_radius > 0, "fruit_radius must be positive");
  require(canopy_radius > 0, "canopy_radius must be positive");
  require(fruit_interior_bias >= 0 && fruit_interior_bias < 1, "fruit_interior_bias must lie in [0, 1)");
  require(fruit_height_center >= 0 && fruit_height_center <= 1, "fruit_height_center must lie in [0, 1]");
  require(fruit_cluster_spread >= 0, "fruit_cluster_spread must be non-negative");
}

void OrchardLayout::validate() const {
  require(rows >= 1 && cols >= 1, "layout needs at least one row and column");
  require(row_spacing > 0 && tree_spacing > 0, "spacings must be positive");
  require(position_jitter >= 0 && position_jitter < std::min(row_spacing, tree_spacing) / 2,
          "position_jitter must be below half the smaller spacing");
}

TreeGeometry generate_tree(const TreeParams& params, std::uint32_t tree_id, const Vec3& base, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  TreeGeometry tree;
  auto& tris = tree.triangles;

  const Vec3 trunk_top = base + Vec3{0, 0, params.trunk_height};
  add_cylinder(tris, base, trunk_top, params.trunk_radius, params.trunk_radius * 0.8, kTrunkSides,
               TriangleKind::trunk, tree_id);

  std::vector<Terminal> terminals;
  const int branch_levels = params.branching_levels - 1;
  if (branch_levels == 0) {
    terminals.push_back({base, trunk_top, params.trunk_radius * 0.8});
  } else {
    const double r = params.branch_length_ratio;
    const double first_length = params.canopy_radius * (1.0 - r) / (1.0 - std::pow(r, branch_levels));
    BranchGrower grower{params, tree_id, rng, tris, terminals, branch_levels, first_length};
    grower.grow(trunk_top, Vec3{0, 0, 1}, 1);
  }

  for (const Terminal& term : terminals) {
    const int leaves = static_cast<int>(
        rng.uniform_int(params.leaf_count_per_terminal.min, params.leaf_count_per_terminal.max));
    const double spread = std::max(2.0 * params.leaf_size, 0.35 * distance(term.start, term.end));
    for (int i = 0; i < leaves; ++i) {
      const Vec3 on_branch = term.start + (term.end - term.start) * rng.uniform(0.3, 1.0);
      add_leaf(tris, rng, on_branch + random_in_ball(rng, spread), params.leaf_size, tree_id);
    }
  }

  // Fruit placement: terminal chosen with weight peaking at
  // fruit_height_center; the fruit sits inside that terminal's leaf cluster.
  const int fruit_count = static_cast<int>(rng.uniform_int(params.fruit_count.min, params.fruit_count.max));
  if (fruit_count > 0) {
    double lo = INFINITY, hi = -INFINITY;
    for (const Terminal& term : terminals) {
      lo = std::min(lo, term.end.z);
      hi = std::max(hi, term.end.z);
    }
    const double mid = lo + params.fruit_height_center * (hi - lo);
    const double half = std::max(std::max(mid - lo, hi - mid), 1e-9);
    std::vector<double> cumulative;
    cumulative.reserve(terminals.size());
    double total = 0.0;
    for (const Terminal& term : terminals) {
      total += std::max(0.05, 1.0 - params.fruit_interior_bias * std::abs(term.end.z - mid) / half);
      cumulative.push_back(total);
    }
    // Redraw (bounded) while the fruit would come within one radius of another.
    constexpr int kPlacementTries = 64;
    const double min_separation = 3.0 * params.fruit_radius;
    auto draw_center = [&] {
      const double pick = rng.uniform() * total;
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
      const Terminal& term = terminals[std::min<std::size_t>(it - cumulative.begin(), terminals.size() - 1)];
      const double spread = std::max(2.0 * params.leaf_size, 0.35 * distance(term.start, term.end));
      const Vec3 attach = term.start + (term.end - term.start) * rng.uniform(0.4, 1.0);
      return attach + random_in_ball(rng, params.fruit_cluster_spread * spread);
    };
    for (int k = 0; k < fruit_count; ++k) {
      Vec3 center = draw_center();
      for (int attempt = 1; attempt < kPlacementTries; ++attempt) {
        const bool clear = std::none_of(tree.fruits.begin(), tree.fruits.end(), [&](const FruitRecord& f) {
          return distance(f.center, center) < min_separation;
        });
        if (clear) break;
        center = draw_center();
      }
      const auto fruit_id = static_cast<std::uint32_t>(k);
      add_icosphere(tris, center, params.fruit_radius, tree_id, fruit_id);
      tree.fruits.push_back({tree_id, fruit_id, center, params.fruit_radius});
    }
  }
  return tree;
}

Vec3 nominal_tree_base(const OrchardLayout& layout, int index) {
  const int row = index / layout.cols;
  const int col = index % layout.cols;
  return {col * layout.tree_spacing, row * layout.row_spacing, 0.0};
}

OrchardModel generate_orchard(const TreeParams& params, const OrchardLayout& layout, std::uint64_t seed) {
  params.validate();
  layout.validate();
  OrchardModel model;
  model.params = params;
  model.layout = layout;
  model.seed = seed;

  const int n = layout.rows * layout.cols;
  for (int index = 0; index < n; ++index) {
    Rng jitter = Rng::substream(seed, "layout", static_cast<std::uint64_t>(index));
    const Vec3 base = nominal_tree_base(layout, index) +
                      Vec3{jitter.uniform(-1.0, 1.0) * layout.position_jitter,
                           jitter.uniform(-1.0, 1.0) * layout.position_jitter, 0.0};
    TreeGeometry tree = generate_tree(params, static_cast<std::uint32_t>(index), base,
                                      derive_seed(seed, "tree", static_cast<std::uint64_t>(index)));
    model.triangles.insert(model.triangles.end(), tree.triangles.begin(), tree.triangles.end());
    model.fruits.insert(model.fruits.end(), tree.fruits.begin(), tree.fruits.end());
  }
  model.bounds = bounds_of(model.triangles);
  return model;
}

Aabb bounds_of(const std::vector<Triangle>& triangles) {
  Aabb box;
  for (const Triangle& t : triangles) box.expand(Aabb::of(t));
  return box;
}

std::optional<TreeParams> tree_preset(std::string_view name) {
  TreeParams p;
  if (name == "walnut-like") {
    p.trunk_height = 2.5;
    p.trunk_radius = 0.18;
    p.branching_levels = 4;
    p.branches_per_node = {3, 4};
    p.branch_length_ratio = 0.62;
    p.branch_pitch = {deg_to_rad(35.0), deg_to_rad(70.0)};
    p.leaf_count_per_terminal = {60, 80};
    p.leaf_size = 0.14;
    p.fruit_count = {40, 70};
    p.fruit_radius = 0.025;
    p.canopy_radius = 3.6;
    p.fruit_interior_bias = 0.6;
    p.fruit_height_center = 0.7;
    p.fruit_cluster_spread = 0.5;
    return p;
  }
  if (name == "orange-like") {
    p.trunk_height = 0.8;
    p.trunk_radius = 0.12;
    p.branching_levels = 4;
    p.branches_per_node = {3, 4};
    p.branch_length_ratio = 0.6;
    p.branch_pitch = {deg_to_rad(30.0), deg_to_rad(60.0)};
    p.leaf_count_per_terminal = {30, 40};
    p.leaf_size = 0.09;
    p.fruit_count = {60, 100};
    p.fruit_radius = 0.04;
    p.canopy_radius = 1.8;
    p.fruit_interior_bias = 0.3;
    return p;
  }
  if (name == "almond-like") {
    p.trunk_height = 1.0;
    p.trunk_radius = 0.14;
    p.branching_levels = 4;
    p.branches_per_node = {2, 4};
    p.branch_length_ratio = 0.62;
    p.branch_pitch = {deg_to_rad(20.0), deg_to_rad(45.0)};
    p.leaf_count_per_terminal = {18, 28};
    p.leaf_size = 0.08;
    p.fruit_count = {80, 140};
    p.fruit_radius = 0.015;
    p.canopy_radius = 2.4;
    p.fruit_interior_bias = 0.4;
    return p;
  }
  if (name == "apple-like") {
    p.trunk_height = 0.9;
    p.trunk_radius = 0.1;
    p.branching_levels = 3;
    p.branches_per_node = {3, 5};
    p.branch_length_ratio = 0.6;
    p.branch_pitch = {deg_to_rad(35.0), deg_to_rad(65.0)};
    p.leaf_count_per_terminal = {20, 30};
    p.leaf_size = 0.08;
    p.fruit_count = {30, 60};
    p.fruit_radius = 0.04;
    p.canopy_radius = 1.3;
    p.fruit_interior_bias = 0.3;
    return p;
  }
  return std::nullopt;
}

std::vector<std::string> tree_preset_names() { return {"walnut-like", "orange-like", "almond-like", "apple-like"}; }

}  // namespace orchardsim
