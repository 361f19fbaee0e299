#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "orchardsim/bvh.hpp"
#include "orchardsim/camera.hpp"

namespace orchardsim {

/// Value stored for pixels whose ray hits nothing within the far plane.
inline constexpr double kNoDepth = std::numeric_limits<double>::infinity();

/// Planar depth image: each value is the depth of the first surface along the
/// optical axis (not the ray length), or kNoDepth.
struct DepthImage {
  CameraConfig camera;
  std::vector<double> depths;  // row-major, width * height

  int width() const { return camera.image_width; }
  int height() const { return camera.image_height; }
  double at(int u, int v) const { return depths[static_cast<std::size_t>(v) * width() + u]; }
  double& at(int u, int v) { return depths[static_cast<std::size_t>(v) * width() + u]; }
};

/// Depth of the nearest surface on the ray through the centre of pixel
/// (u, v), or kNoDepth.
double pixel_depth(const CameraConfig& cam, const Bvh& bvh, int u, int v);

DepthImage render_depth(const CameraConfig& cam, const Bvh& bvh, int threads = 1);

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Pinhole projection; nullopt behind the camera or outside [0, W) x [0, H).
std::optional<Projection> project_point(const CameraConfig& cam, const Vec3& p);

/// World point at image position (u, v) and planar depth `depth`.
Vec3 back_project(const CameraConfig& cam, double u, double v, double depth);

/// Grayscale PFM: "Pf\n<W> <H>\n-1.0\n" followed by little-endian float32
/// rows, bottom row first. No-hit pixels are written as +inf.
void write_pfm(std::ostream& out, const DepthImage& image);
void write_pfm(const std::string& path, const DepthImage& image);

/// Reads back the pixel grid of a grayscale PFM (row-major, top row first).
/// Throws std::runtime_error on malformed input.
std::vector<float> read_pfm(std::istream& in, int& width, int& height);

}  // namespace orchardsim
