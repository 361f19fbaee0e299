#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "orchardsim/bvh.hpp"
#include "orchardsim/camera.hpp"
#include "orchardsim/orchard.hpp"

namespace orchardsim {

struct BBox {
  double u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;

  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  double area() const { return width() * height(); }
  double cu() const { return 0.5 * (u_min + u_max); }
  double cv() const { return 0.5 * (v_min + v_max); }

  static BBox centered(double cu, double cv, double half_w, double half_h) {
    return {cu - half_w, cv - half_h, cu + half_w, cv + half_h};
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

double iou(const BBox& a, const BBox& b);

struct Detection {
  int frame = 0;
  BBox bbox;
  double confidence = 1.0;
  std::optional<FruitKey> gt;  // absent for false positives
};

using DetectionFrames = std::vector<std::vector<Detection>>;

/// Detector stand-in. Visible fruits are jittered (Gaussian, jitter_px per
/// axis), dropped with p_miss and scored in [conf_true_min, 1]; false
/// positives arrive Poisson(fp_rate) per frame with a uniform centre, a
/// side length in fp_size_px and a score in [0, conf_fp_max].
struct NoiseModel {
  double jitter_px = 0.0;
  double p_miss = 0.0;
  double fp_rate = 0.0;
  double conf_true_min = 1.0;
  double conf_fp_max = 0.5;
  Range<double> fp_size_px{6.0, 30.0};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Box of the fruit sphere in the image: projected centre +- f * r / depth.
/// Nullopt when the centre does not project or the box leaves the image.
std::optional<BBox> fruit_bbox(const CameraConfig& cam, const FruitRecord& fruit);

/// Per-frame detections, frame k taken by cams[k]. Noise for frame k comes
/// from its own substream, so results do not depend on `threads`.
DetectionFrames synth_detections(std::span<const CameraConfig> cams, const OrchardModel& orchard, const Bvh& bvh,
                                 const NoiseModel& noise, int threads = 1);

/// Unique fruits that would be annotated in at least one frame without noise.
std::vector<FruitKey> annotated_fruits(std::span<const CameraConfig> cams, const OrchardModel& orchard,
                                       const Bvh& bvh, int threads = 1);

nlohmann::json to_json(const Detection& d);

}  // namespace orchardsim
