#include "orchardsim/detection.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "orchardsim/depthrender.hpp"
#include "orchardsim/parallel.hpp"
#include "orchardsim/rng.hpp"
#include "orchardsim/visibility.hpp"

namespace orchardsim {

double iou(const BBox& a, const BBox& b) {
  const double w = std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min);
  const double h = std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double inter = w * h;
  return inter / (a.area() + b.area() - inter);
}

void NoiseModel::validate() const {
  if (!(jitter_px >= 0.0 && fp_rate >= 0.0)) throw std::invalid_argument("noise jitter and fp rate must be >= 0");
  if (!(p_miss >= 0.0 && p_miss <= 1.0)) throw std::invalid_argument("p_miss must lie in [0, 1]");
  if (!(conf_true_min >= 0.0 && conf_true_min <= 1.0 && conf_fp_max >= 0.0 && conf_fp_max <= 1.0)) {
    throw std::invalid_argument("confidence bounds must lie in [0, 1]");
  }
  if (!(fp_size_px.valid() && fp_size_px.min > 0.0)) throw std::invalid_argument("fp size range must be positive");
}

std::optional<BBox> fruit_bbox(const CameraConfig& cam, const FruitRecord& fruit) {
  const auto proj = project_point(cam, fruit.center);
  if (!proj) return std::nullopt;
  const BBox box = BBox::centered(proj->u, proj->v, cam.fx() * fruit.radius / proj->depth,
                                  cam.fy() * fruit.radius / proj->depth);
  if (box.u_min < 0.0 || box.v_min < 0.0 || box.u_max > cam.image_width || box.v_max > cam.image_height) {
    return std::nullopt;
  }
  return box;
}

namespace {

std::map<FruitKey, const FruitRecord*> index_fruits(const OrchardModel& orchard) {
  std::map<FruitKey, const FruitRecord*> index;
  for (const FruitRecord& f : orchard.fruits) index.emplace(f.key(), &f);
  return index;
}

// Noiseless annotations of one frame, in fruit-key order.
std::vector<Detection> annotate(const CameraConfig& cam, int frame, const OrchardModel& orchard, const Bvh& bvh,
                                const std::map<FruitKey, const FruitRecord*>& index) {
  std::vector<Detection> out;
  for (const FruitKey& key : visible_fruits_one(cam, orchard, bvh)) {
    const auto box = fruit_bbox(cam, *index.at(key));
    if (box) out.push_back({frame, *box, 1.0, key});
  }
  return out;
}

}  // namespace

DetectionFrames synth_detections(std::span<const CameraConfig> cams, const OrchardModel& orchard, const Bvh& bvh,
                                 const NoiseModel& noise, int threads) {
  noise.validate();
  const auto index = index_fruits(orchard);
  DetectionFrames frames(cams.size());
  parallel_for(cams.size(), threads, [&](std::size_t k) {
    const CameraConfig& cam = cams[k];
    const int frame = static_cast<int>(k);
    Rng rng = Rng::substream(noise.seed, "noise", k);
    std::vector<Detection>& out = frames[k];
    for (Detection d : annotate(cam, frame, orchard, bvh, index)) {
      // Draws happen in a fixed order so each fruit consumes the same stream.
      const bool missed = rng.bernoulli(noise.p_miss);
      const double du = noise.jitter_px > 0.0 ? rng.normal(0.0, noise.jitter_px) : 0.0;
      const double dv = noise.jitter_px > 0.0 ? rng.normal(0.0, noise.jitter_px) : 0.0;
      const double conf = noise.conf_true_min < 1.0 ? rng.uniform(noise.conf_true_min, 1.0) : 1.0;
      if (missed) continue;
      const double hw = 0.5 * d.bbox.width(), hh = 0.5 * d.bbox.height();
      const double cu = std::clamp(d.bbox.cu() + du, hw, cam.image_width - hw);
      const double cv = std::clamp(d.bbox.cv() + dv, hh, cam.image_height - hh);
      d.bbox = BBox::centered(cu, cv, hw, hh);
      d.confidence = conf;
      out.push_back(d);
    }
    const int n_fp = noise.fp_rate > 0.0 ? rng.poisson(noise.fp_rate) : 0;
    for (int i = 0; i < n_fp; ++i) {
      const double side = std::min({rng.uniform(noise.fp_size_px.min, noise.fp_size_px.max),
                                    static_cast<double>(cam.image_width), static_cast<double>(cam.image_height)});
      const double cu = rng.uniform(0.5 * side, cam.image_width - 0.5 * side);
      const double cv = rng.uniform(0.5 * side, cam.image_height - 0.5 * side);
      const double conf = rng.uniform(0.0, noise.conf_fp_max);
      out.push_back({frame, BBox::centered(cu, cv, 0.5 * side, 0.5 * side), conf, std::nullopt});
    }
  });
  return frames;
}

std::vector<FruitKey> annotated_fruits(std::span<const CameraConfig> cams, const OrchardModel& orchard,
                                       const Bvh& bvh, int threads) {
  const auto index = index_fruits(orchard);
  std::vector<std::vector<FruitKey>> per_frame(cams.size());
  parallel_for(cams.size(), threads, [&](std::size_t k) {
    for (const Detection& d : annotate(cams[k], static_cast<int>(k), orchard, bvh, index)) per_frame[k].push_back(*d.gt);
  });
  std::vector<FruitKey> keys;
  for (const auto& f : per_frame) keys.insert(keys.end(), f.begin(), f.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

nlohmann::json to_json(const Detection& d) {
  nlohmann::json j{{"frame", d.frame},
                   {"bbox", {d.bbox.u_min, d.bbox.v_min, d.bbox.u_max, d.bbox.v_max}},
                   {"confidence", d.confidence}};
  j["gt"] = d.gt ? nlohmann::json{d.gt->tree_id, d.gt->fruit_id} : nlohmann::json(nullptr);
  return j;
}

}  // namespace orchardsim
