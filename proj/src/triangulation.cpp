#include "orchardsim/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace orchardsim {

void TriangulationConfig::validate() const {
  if (!(max_reprojection_px > 0.0 && min_parallax >= 0.0 && min_baseline >= 0.0 && min_views >= 2)) {
    throw std::invalid_argument("bad triangulation thresholds");
  }
}

namespace {

// Pixel distance between the projection of X and the detection's box centre,
// without the image-bounds test; nullopt when X is not in front of the camera.
std::optional<double> reprojection_px(const CameraConfig& cam, const Vec3& X, const Detection& d) {
  const Vec3 body = cam.pose.orientation.to_body(X - cam.pose.position);
  if (!(body.x > 0.0)) return std::nullopt;
  const double u = cam.cx() - cam.fx() * body.y / body.x;
  const double v = cam.cy() - cam.fy() * body.z / body.x;
  return std::hypot(u - d.bbox.cu(), v - d.bbox.cv());
}

const CameraConfig& camera_of(std::span<const CameraConfig> cams, const Detection& d) {
  if (d.frame < 0 || static_cast<std::size_t>(d.frame) >= cams.size()) {
    throw std::out_of_range("detection frame has no camera");
  }
  return cams[static_cast<std::size_t>(d.frame)];
}

std::optional<double> mean_reprojection_px(std::span<const Detection> dets, std::span<const CameraConfig> cams,
                                           const Vec3& X) {
  double err = 0.0;
  for (const Detection& d : dets) {
    const auto e = reprojection_px(camera_of(cams, d), X, d);
    if (!e) return std::nullopt;
    err += *e;
  }
  return err / static_cast<double>(dets.size());
}

std::optional<Landmark> fit(std::span<const Detection> dets, std::span<const CameraConfig> cams,
                            const TriangulationConfig& cfg, int track_id) {
  if (dets.size() < static_cast<std::size_t>(cfg.min_views)) return std::nullopt;

  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  std::vector<Vec3> centres;
  for (const Detection& d : dets) {
    const CameraConfig& cam = camera_of(cams, d);
    const Vec3 dir = normalized(cam.pixel_direction(d.bbox.cu(), d.bbox.cv()));
    const Eigen::Vector3d e(dir.x, dir.y, dir.z);
    const Eigen::Vector3d c(cam.pose.position.x, cam.pose.position.y, cam.pose.position.z);
    const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - e * e.transpose();
    A += P;
    b += P * c;
    centres.push_back(cam.pose.position);
  }

  double baseline = 0.0;
  for (std::size_t i = 0; i < centres.size(); ++i) {
    for (std::size_t j = i + 1; j < centres.size(); ++j) baseline = std::max(baseline, distance(centres[i], centres[j]));
  }
  if (baseline < cfg.min_baseline) return std::nullopt;

  const Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
  if (lu.rank() < 3) return std::nullopt;
  const Eigen::Vector3d x = lu.solve(b);
  const Vec3 X{x.x(), x.y(), x.z()};
  if (!std::isfinite(X.x) || !std::isfinite(X.y) || !std::isfinite(X.z)) return std::nullopt;

  double parallax = 0.0;
  for (std::size_t i = 0; i < centres.size(); ++i) {
    const Vec3 a = normalized(X - centres[i]);
    for (std::size_t j = i + 1; j < centres.size(); ++j) {
      const Vec3 c = normalized(X - centres[j]);
      parallax = std::max(parallax, std::acos(std::clamp(dot(a, c), -1.0, 1.0)));
    }
  }
  if (parallax < cfg.min_parallax) return std::nullopt;

  const auto err = mean_reprojection_px(dets, cams, X);
  if (!err || *err > cfg.max_reprojection_px) return std::nullopt;

  // Each box centre displaced by one pixel moves its ray sideways by
  // range / f; propagated through the normal equations as A^-1 B A^-1.
  Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
  for (const Detection& d : dets) {
    const CameraConfig& cam = camera_of(cams, d);
    const Vec3 r = X - cam.pose.position;
    const Vec3 u = normalized(r);
    const Eigen::Vector3d e(u.x, u.y, u.z);
    const double s = norm(r) / std::min(cam.fx(), cam.fy());
    B += s * s * (Eigen::Matrix3d::Identity() - e * e.transpose());
  }
  const Eigen::Matrix3d Ainv = lu.inverse();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Ainv * B * Ainv.transpose(), Eigen::EigenvaluesOnly);
  const double sigma = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  return Landmark{X, track_id, static_cast<int>(dets.size()), *err, sigma};
}

}  // namespace

std::optional<Landmark> triangulate(const Track& track, std::span<const CameraConfig> cams,
                                    const TriangulationConfig& cfg) {
  cfg.validate();
  return fit(track.detections, cams, cfg, track.track_id);
}

std::vector<PieceLandmark> triangulate_pieces(const Track& track, std::span<const CameraConfig> cams,
                                              const TriangulationConfig& cfg) {
  cfg.validate();
  const std::vector<Detection>& dets = track.detections;
  std::vector<std::size_t> starts;  // piece i is [starts[i], starts[i + 1])
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (i == 0 || dets[i].frame != dets[i - 1].frame + 1) starts.push_back(i);
  }
  starts.push_back(dets.size());
  const std::size_t n_pieces = starts.size() - 1;
  auto span_of = [&](std::size_t a, std::size_t b) {
    return std::span<const Detection>(dets).subspan(starts[a], starts[b] - starts[a]);
  };

  std::vector<PieceLandmark> out;
  std::size_t first = 0;
  while (first < n_pieces) {
    std::optional<Landmark> best;
    std::size_t last = first + 1;  // run is pieces [first, last)
    for (std::size_t next = first + 1; next <= n_pieces; ++next) {
      auto l = fit(span_of(first, next), cams, cfg, track.track_id);
      bool consistent = l.has_value();
      for (std::size_t p = first; consistent && p < next; ++p) {
        const auto e = mean_reprojection_px(span_of(p, p + 1), cams, l->position);
        consistent = e && *e <= cfg.max_reprojection_px;
      }
      if (consistent) {
        best = l;
        last = next;
      } else if (best) {
        break;
      }
    }
    if (best) {
      out.push_back({*best, starts[first], starts[last]});
      first = last;
    } else {
      ++first;
    }
  }
  return out;
}

nlohmann::json to_json(const Landmark& l) {
  return {{"track_id", l.track_id},
          {"position", {l.position.x, l.position.y, l.position.z}},
          {"n_views", l.n_views},
          {"reprojection_px", l.reprojection_px}};
}

}  // namespace orchardsim
