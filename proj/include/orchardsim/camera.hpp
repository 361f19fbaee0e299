#pragma once

#include "orchardsim/geometry.hpp"

namespace orchardsim {

/// Pinhole camera: pose, field of view, maximum capture depth and
/// resolution. Image u grows to the right (towards -left), v grows
/// downwards (towards -up); pixel (i, j) covers [i, i+1) x [j, j+1).
struct CameraConfig {
  Pose pose;
  double hfov = deg_to_rad(90.0);
  double vfov = deg_to_rad(60.0);
  double far = 10.0;
  int image_width = 640;
  int image_height = 480;

  void validate() const;

  Frustum frustum() const { return Frustum(pose.position, pose.orientation, hfov, vfov, far); }
  double fx() const;
  double fy() const;
  double cx() const { return 0.5 * image_width; }
  double cy() const { return 0.5 * image_height; }

  /// World-space direction through image point (u, v), scaled so its
  /// component along the optical axis is 1.
  Vec3 pixel_direction(double u, double v) const;
};

}  // namespace orchardsim
