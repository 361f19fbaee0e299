#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "orchardsim/camera.hpp"
#include "orchardsim/tracker.hpp"

namespace orchardsim {

struct TriangulationConfig {
  double max_reprojection_px = 3.0;
  double min_parallax = deg_to_rad(1.0);  // widest angle between two viewing rays
  double min_baseline = 0.02;             // widest camera-centre separation, m
  int min_views = 2;

  void validate() const;
};

struct Landmark {
  Vec3 position;
  int track_id = 0;
  int n_views = 0;
  double reprojection_px = 0.0;  // mean over views
  double sigma_per_px = 0.0;     // worst-axis position std dev per pixel of box-centre noise, m
};

/// Point minimising the summed squared distance to the viewing rays through
/// the box centres of `track`'s detections; frame k is seen by cams[k].
/// Nullopt when the track has fewer than min_views views, the geometry is
/// degenerate, the point is behind a camera, or a threshold fails.
std::optional<Landmark> triangulate(const Track& track, std::span<const CameraConfig> cams,
                                    const TriangulationConfig& cfg = {});

struct PieceLandmark {
  Landmark landmark;
  std::size_t begin = 0, end = 0;  // detection index range [begin, end) of the track
};

/// Triangulation robust to identity swaps across tracking gaps. The track is
/// cut wherever frames skip; maximal runs of consecutive pieces are
/// triangulated, and a run only grows while its landmark also meets
/// max_reprojection_px on every piece taken separately. Pieces that fit no
/// run are dropped.
std::vector<PieceLandmark> triangulate_pieces(const Track& track, std::span<const CameraConfig> cams,
                                              const TriangulationConfig& cfg = {});

nlohmann::json to_json(const Landmark& l);

}  // namespace orchardsim
