#include "orchardsim/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "orchardsim/parallel.hpp"
#include "orchardsim/text_format.hpp"

namespace orchardsim {

namespace {

const FruitRecord& find_fruit(const OrchardModel& orchard, const FruitKey& key) {
  const auto it = std::lower_bound(orchard.fruits.begin(), orchard.fruits.end(), key,
                                   [](const FruitRecord& f, const FruitKey& k) { return f.key() < k; });
  if (it != orchard.fruits.end() && it->key() == key) return *it;
  // Registry not sorted by key (hand-built scenes): fall back to a scan.
  for (const FruitRecord& f : orchard.fruits) {
    if (f.key() == key) return f;
  }
  throw std::out_of_range("fruit key not in orchard registry");
}

}  // namespace

std::vector<FruitKey> visible_fruits_one(const CameraConfig& cam, const OrchardModel& orchard, const Bvh& bvh,
                                         const VisibilityOptions& options) {
  const Frustum frustum = cam.frustum();
  const Vec3& apex = cam.pose.position;
  std::vector<FruitKey> visible;
  for (const FruitRecord& fruit : orchard.fruits) {
    if (!frustum.contains(fruit.center)) continue;
    const double t_center = distance(apex, fruit.center);
    const Ray ray = Ray::through(apex, fruit.center);
    const double t_max = t_center - kRayEpsilon;
    bool occluded = false;
    if (t_max > kRayEpsilon) {
      if (options.fruits_occlude) {
        occluded = bvh.any_hit(ray, t_max, [&](const Triangle& tri, std::uint32_t) {
          return is_occluder(tri.kind) || tri.tree_id != fruit.tree_id || tri.fruit_id != fruit.fruit_id;
        });
      } else {
        occluded = bvh.any_hit(ray, t_max, [](const Triangle& tri, std::uint32_t) { return is_occluder(tri.kind); });
      }
    }
    if (!occluded) visible.push_back(fruit.key());
  }
  std::sort(visible.begin(), visible.end());
  return visible;
}

VisibilityReport count_visible(std::span<const CameraConfig> cams, const OrchardModel& orchard, const Bvh& bvh,
                               const VisibilityOptions& options, int threads) {
  std::vector<std::vector<FruitKey>> per_camera(cams.size());
  parallel_for(cams.size(), threads,
               [&](std::size_t i) { per_camera[i] = visible_fruits_one(cams[i], orchard, bvh, options); });

  VisibilityReport report;
  report.total_fruits = orchard.fruits.size();
  for (std::size_t i = 0; i < per_camera.size(); ++i) {
    for (const FruitKey& key : per_camera[i]) {
      report.observations.push_back({key.tree_id, key.fruit_id, static_cast<std::uint32_t>(i)});
      report.visible_fruits.push_back(key);
    }
  }
  std::sort(report.visible_fruits.begin(), report.visible_fruits.end());
  report.visible_fruits.erase(std::unique(report.visible_fruits.begin(), report.visible_fruits.end()),
                              report.visible_fruits.end());
  report.n_visible = report.visible_fruits.size();
  for (const FruitKey& key : report.visible_fruits) {
    report.visible_fruit_positions.push_back(find_fruit(orchard, key).center);
  }
  report.fraction_visible =
      report.total_fruits == 0 ? 0.0 : static_cast<double>(report.n_visible) / static_cast<double>(report.total_fruits);
  return report;
}

VisibilityReport count_visible(std::span<const CameraConfig> cams, const OrchardModel& orchard) {
  const Bvh bvh(orchard.triangles);
  return count_visible(cams, orchard, bvh);
}

std::uint64_t VisibilityHeatmap::total() const {
  std::uint64_t sum = 0;
  for (const auto& [bin, count] : bins) sum += count;
  return sum;
}

VisibilityHeatmap visibility_heatmap(const VisibilityReport& report, double bin_size) {
  if (!(bin_size > 0.0)) throw std::invalid_argument("heatmap bin size must be positive");
  VisibilityHeatmap map;
  map.bin_size = bin_size;
  for (const Vec3& p : report.visible_fruit_positions) {
    const std::array<std::int64_t, 3> bin = {static_cast<std::int64_t>(std::floor(p.x / bin_size)),
                                             static_cast<std::int64_t>(std::floor(p.y / bin_size)),
                                             static_cast<std::int64_t>(std::floor(p.z / bin_size))};
    ++map.bins[bin];
  }
  return map;
}

nlohmann::json to_json(const VisibilityReport& report) {
  nlohmann::json j;
  j["n_visible"] = report.n_visible;
  j["total_fruits"] = report.total_fruits;
  j["fraction_visible"] = report.fraction_visible;
  auto& obs = j["observations"] = nlohmann::json::array();
  for (const Observation& o : report.observations) obs.push_back({o.camera_index, o.tree_id, o.fruit_id});
  auto& fruits = j["visible_fruits"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.visible_fruits.size(); ++i) {
    const Vec3& p = report.visible_fruit_positions[i];
    fruits.push_back({{"tree_id", report.visible_fruits[i].tree_id},
                      {"fruit_id", report.visible_fruits[i].fruit_id},
                      {"position", {p.x, p.y, p.z}}});
  }
  return j;
}

std::string to_csv(const VisibilityReport& report, const OrchardModel& orchard) {
  std::ostringstream out;
  out << "camera_index,tree_id,fruit_id,x,y,z\n";
  for (const Observation& o : report.observations) {
    const Vec3& p = find_fruit(orchard, o.key()).center;
    out << o.camera_index << ',' << o.tree_id << ',' << o.fruit_id << ',' << format_number(p.x) << ','
        << format_number(p.y) << ',' << format_number(p.z) << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const VisibilityHeatmap& heatmap) {
  nlohmann::json j;
  j["bin_size"] = heatmap.bin_size;
  auto& bins = j["bins"] = nlohmann::json::array();
  for (const auto& [bin, count] : heatmap.bins) bins.push_back({{"bin", bin}, {"count", count}});
  return j;
}

}  // namespace orchardsim
