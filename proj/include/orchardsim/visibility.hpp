#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "orchardsim/bvh.hpp"
#include "orchardsim/camera.hpp"
#include "orchardsim/orchard.hpp"

namespace orchardsim {

struct VisibilityOptions {
  /// When set, other fruits' geometry also blocks the line of sight.
  bool fruits_occlude = false;
};

struct Observation {
  std::uint32_t tree_id = 0;
  std::uint32_t fruit_id = 0;
  std::uint32_t camera_index = 0;

  FruitKey key() const { return {tree_id, fruit_id}; }
  friend bool operator==(const Observation&, const Observation&) = default;
};

struct VisibilityReport {
  std::vector<Observation> observations;  // camera order, then fruit key order
  std::size_t n_visible = 0;
  std::vector<FruitKey> visible_fruits;   // sorted, deduplicated
  std::vector<Vec3> visible_fruit_positions;  // parallel to visible_fruits
  std::size_t total_fruits = 0;
  double fraction_visible = 0.0;
};

/// Fruits seen by one camera: center inside the frustum and no occluder
/// crossing the apex-to-center segment in (eps, t_center - eps). Sorted.
std::vector<FruitKey> visible_fruits_one(const CameraConfig& cam, const OrchardModel& orchard, const Bvh& bvh,
                                         const VisibilityOptions& options = {});

VisibilityReport count_visible(std::span<const CameraConfig> cams, const OrchardModel& orchard, const Bvh& bvh,
                               const VisibilityOptions& options = {}, int threads = 1);
VisibilityReport count_visible(std::span<const CameraConfig> cams, const OrchardModel& orchard);

/// Sparse 3D histogram of visible fruit centers on a grid anchored at the
/// world origin; bin (i, j, k) covers [i*b, (i+1)*b) x ... .
struct VisibilityHeatmap {
  double bin_size = 0.5;
  std::map<std::array<std::int64_t, 3>, std::uint32_t> bins;

  std::uint64_t total() const;
};

VisibilityHeatmap visibility_heatmap(const VisibilityReport& report, double bin_size = 0.5);

nlohmann::json to_json(const VisibilityReport& report);
/// Columns: camera_index, tree_id, fruit_id, x, y, z (one row per observation).
std::string to_csv(const VisibilityReport& report, const OrchardModel& orchard);
nlohmann::json to_json(const VisibilityHeatmap& heatmap);

}  // namespace orchardsim
