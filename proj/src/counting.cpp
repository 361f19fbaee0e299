#include "orchardsim/counting.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "orchardsim/parallel.hpp"
#include "orchardsim/text_format.hpp"

namespace orchardsim {

namespace {

std::optional<FruitKey> majority_fruit(std::span<const Detection> dets) {
  std::map<FruitKey, std::size_t> votes;
  std::size_t fp = 0;
  for (const Detection& d : dets) {
    if (d.gt) {
      ++votes[*d.gt];
    } else {
      ++fp;
    }
  }
  std::optional<FruitKey> best;
  std::size_t best_n = 0;
  for (const auto& [key, n] : votes) {  // key order: lowest key wins ties
    if (n > best_n) {
      best = key;
      best_n = n;
    }
  }
  if (best_n == 0 || fp > best_n) return std::nullopt;
  return best;
}

}  // namespace

TriangulationConfig PipelineConfig::effective_triangulation() const {
  TriangulationConfig t = triangulation;
  if (noise_scaled_gate) t.max_reprojection_px = std::max(0.1, 3.0 * noise.jitter_px);
  return t;
}

CountResult count_pipeline(std::span<const CameraConfig> cams, const OrchardModel& orchard, const Bvh& bvh,
                           const PipelineConfig& cfg, int threads) {
  CountResult r;
  const std::vector<FruitKey> annotated = annotated_fruits(cams, orchard, bvh, threads);
  r.ground_truth_visible = annotated.size();
  r.detections = synth_detections(cams, orchard, bvh, cfg.noise, threads);
  r.tracks = track(r.detections, cfg.tracker);

  const TriangulationConfig tri_cfg = cfg.effective_triangulation();
  std::vector<std::vector<PieceLandmark>> tri(r.tracks.size());
  parallel_for(r.tracks.size(), threads,
               [&](std::size_t i) { tri[i] = triangulate_pieces(r.tracks[i], cams, tri_cfg); });
  double max_radius = 0.0;
  for (const FruitRecord& f : orchard.fruits) max_radius = std::max(max_radius, f.radius);
  r.eps = cfg.cluster.eps.value_or(2.0 * max_radius);
  if (!(r.eps > 0.0)) r.eps = 0.1;  // fruitless scene and no explicit eps

  for (std::size_t i = 0; i < tri.size(); ++i) {
    const std::span<const Detection> dets(r.tracks[i].detections);
    for (const PieceLandmark& p : tri[i]) {
      if (cfg.noise.jitter_px * p.landmark.sigma_per_px > cfg.max_sigma_fraction * r.eps) continue;
      r.landmarks.push_back(p.landmark);
      r.landmark_fruit.push_back(majority_fruit(dets.subspan(p.begin, p.end - p.begin)));
    }
  }
  std::vector<Vec3> pts;
  for (const Landmark& l : r.landmarks) pts.push_back(l.position);
  r.clusters = dbscan(pts, r.eps, cfg.cluster.min_pts);
  r.estimated_count = r.clusters.estimated_count;

  for (const FruitKey& k : annotated) r.fruit_clusters[k];
  for (std::size_t c = 0; c < r.clusters.clusters.size(); ++c) {
    std::set<FruitKey> fruits;
    for (std::size_t m : r.clusters.clusters[c].members) {
      if (r.landmark_fruit[m]) fruits.insert(*r.landmark_fruit[m]);
    }
    if (fruits.empty()) ++r.confusion.phantom_clusters;
    if (fruits.size() >= 2) ++r.confusion.merged_clusters;
    for (const FruitKey& k : fruits) r.fruit_clusters[k].push_back(c);
  }
  for (const auto& [key, clusters] : r.fruit_clusters) {
    if (clusters.empty()) {
      ++r.confusion.missed_fruits;
    } else {
      ++r.confusion.matched_fruits;
      if (clusters.size() >= 2) ++r.confusion.split_fruits;
    }
  }
  return r;
}

nlohmann::json summary_json(const CountResult& r) {
  std::size_t n_det = 0;
  for (const auto& f : r.detections) n_det += f.size();
  nlohmann::json per_fruit = nlohmann::json::array();
  for (const auto& [key, clusters] : r.fruit_clusters) {
    per_fruit.push_back({{"tree_id", key.tree_id}, {"fruit_id", key.fruit_id}, {"clusters", clusters}});
  }
  return {{"estimated_count", r.estimated_count},
          {"ground_truth_visible", r.ground_truth_visible},
          {"error", static_cast<double>(r.estimated_count) - static_cast<double>(r.ground_truth_visible)},
          {"frames", r.detections.size()},
          {"detections", n_det},
          {"tracks", r.tracks.size()},
          {"landmarks", r.landmarks.size()},
          {"noise_landmarks", r.clusters.noise.size()},
          {"eps", r.eps},
          {"confusion",
           {{"matched_fruits", r.confusion.matched_fruits},
            {"missed_fruits", r.confusion.missed_fruits},
            {"split_fruits", r.confusion.split_fruits},
            {"merged_clusters", r.confusion.merged_clusters},
            {"phantom_clusters", r.confusion.phantom_clusters}}},
          {"per_fruit", per_fruit}};
}

std::string to_jsonl(const CountResult& r) {
  std::ostringstream out;
  for (const auto& frame : r.detections) {
    for (const Detection& d : frame) out << nlohmann::json{{"type", "detection"}, {"data", to_json(d)}}.dump() << '\n';
  }
  for (const Track& t : r.tracks) out << nlohmann::json{{"type", "track"}, {"data", to_json(t)}}.dump() << '\n';
  for (const Landmark& l : r.landmarks) out << nlohmann::json{{"type", "landmark"}, {"data", to_json(l)}}.dump() << '\n';
  return out.str();
}

std::string landmarks_csv(const CountResult& r) {
  std::ostringstream out;
  out << "x,y,z,track_id,cluster_id\n";
  for (std::size_t i = 0; i < r.landmarks.size(); ++i) {
    const Landmark& l = r.landmarks[i];
    out << format_number(l.position.x) << ',' << format_number(l.position.y) << ',' << format_number(l.position.z)
        << ',' << l.track_id << ',' << r.clusters.labels[i] << '\n';
  }
  return out.str();
}

}  // namespace orchardsim
