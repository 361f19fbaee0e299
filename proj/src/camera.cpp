#include "orchardsim/camera.hpp"

#include <stdexcept>

namespace orchardsim {

void CameraConfig::validate() const {
  if (!(far > 0.0)) throw std::invalid_argument("camera far distance must be positive");
  if (image_width <= 0 || image_height <= 0) throw std::invalid_argument("camera resolution must be positive");
  if (!(hfov > 0.0 && hfov < kPi && vfov > 0.0 && vfov < kPi)) {
    throw std::invalid_argument("camera field of view must lie in (0, pi)");
  }
}

double CameraConfig::fx() const { return 0.5 * image_width / std::tan(0.5 * hfov); }
double CameraConfig::fy() const { return 0.5 * image_height / std::tan(0.5 * vfov); }

Vec3 CameraConfig::pixel_direction(double u, double v) const {
  const Vec3 body{1.0, -(u - cx()) / fx(), -(v - cy()) / fy()};
  return pose.orientation.to_world(body);
}

}  // namespace orchardsim
