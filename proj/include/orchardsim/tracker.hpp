#pragma once

#include <vector>

#include <json.hpp>

#include "orchardsim/detection.hpp"

namespace orchardsim {

struct TrackerConfig {
  double tau_high = 0.6;
  double tau_low = 0.1;
  double iou_min = 0.2;
  int max_age = 30;     // frames without a match before a track finishes
  double gain = 0.8;    // blend of the box centre towards the measurement
  bool two_stage = true;  // false: low-confidence detections are ignored

  void validate() const;
};

enum class TrackState { active, lost, finished };

const char* to_string(TrackState state);

struct Track {
  int track_id = 0;
  std::vector<Detection> detections;
  TrackState state = TrackState::active;
};

/// IoU tracker with two-stage association. Per frame: predict every
/// unfinished track with constant centre velocity; match high-confidence
/// detections (>= tau_high) to all unfinished tracks by optimal assignment
/// on 1 - IoU, keeping pairs with IoU >= iou_min; in two-stage mode match
/// the leftover tracks to detections in [tau_low, tau_high) the same way;
/// unmatched high-confidence detections start tracks. Track ids count up
/// from 0 in creation order.
std::vector<Track> track(const DetectionFrames& frames, const TrackerConfig& cfg);

nlohmann::json to_json(const Track& t);

}  // namespace orchardsim
