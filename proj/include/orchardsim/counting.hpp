#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "orchardsim/clustering.hpp"
#include "orchardsim/detection.hpp"
#include "orchardsim/tracker.hpp"
#include "orchardsim/triangulation.hpp"

namespace orchardsim {

struct ClusterConfig {
  std::optional<double> eps;  // defaults to twice the orchard's largest fruit radius
  std::size_t min_pts = 1;
};

/// Two-view tracks are excluded by default: two rays almost always pass the
/// reprojection test, even when the track mixes two fruits. With
/// noise_scaled_gate the reprojection gate becomes max(0.1 px, 3 jitter_px),
/// so noiseless runs reject any piece that mixes fruits.
struct PipelineConfig {
  NoiseModel noise;
  TrackerConfig tracker;
  TriangulationConfig triangulation{.min_views = 3};
  bool noise_scaled_gate = true;
  // Landmarks whose predicted position std dev (jitter_px * sigma_per_px)
  // exceeds this fraction of eps are dropped before clustering.
  double max_sigma_fraction = 0.5;
  ClusterConfig cluster;

  TriangulationConfig effective_triangulation() const;
};

/// Scoring against the detections' ground-truth ids. A landmark is
/// attributed to the fruit that supplied most of its detections
/// (lowest key on ties), or to nothing when false positives are the
/// majority.
struct Confusion {
  std::size_t matched_fruits = 0;   // annotated fruits that own >= 1 cluster
  std::size_t missed_fruits = 0;    // annotated fruits that own none
  std::size_t split_fruits = 0;     // fruits spread over >= 2 clusters
  std::size_t merged_clusters = 0;  // clusters holding >= 2 fruits
  std::size_t phantom_clusters = 0; // clusters holding no fruit
};

struct CountResult {
  std::size_t estimated_count = 0;
  std::size_t ground_truth_visible = 0;
  DetectionFrames detections;
  std::vector<Track> tracks;
  std::vector<Landmark> landmarks;
  std::vector<std::optional<FruitKey>> landmark_fruit;  // attribution per landmark
  ClusterReport clusters;
  double eps = 0.0;
  Confusion confusion;
  std::map<FruitKey, std::vector<std::size_t>> fruit_clusters;  // annotated fruit -> cluster indices
};

/// detect -> track -> triangulate_pieces -> cluster. Ground truth is the set of
/// fruits annotated (visible and fully inside the image) in at least one
/// frame before the noise model is applied.
CountResult count_pipeline(std::span<const CameraConfig> cams, const OrchardModel& orchard, const Bvh& bvh,
                           const PipelineConfig& cfg, int threads = 1);

nlohmann::json summary_json(const CountResult& r);
/// One JSON object per line: detections, then tracks, then landmarks.
std::string to_jsonl(const CountResult& r);
/// Header: x,y,z,track_id,cluster_id (cluster_id -1 for noise).
std::string landmarks_csv(const CountResult& r);

}  // namespace orchardsim
