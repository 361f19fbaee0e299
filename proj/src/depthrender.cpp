#include "orchardsim/depthrender.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "orchardsim/parallel.hpp"

namespace orchardsim {

double pixel_depth(const CameraConfig& cam, const Bvh& bvh, int u, int v) {
  const Vec3 dir = cam.pixel_direction(u + 0.5, v + 0.5);  // forward component 1
  const double scale = norm(dir);
  const Ray ray{cam.pose.position, dir / scale};
  // Planar depth = t / scale, so the far plane sits at t = far * scale.
  const auto hit = bvh.nearest_hit(ray, cam.far * scale);
  return hit ? hit->t / scale : kNoDepth;
}

DepthImage render_depth(const CameraConfig& cam, const Bvh& bvh, int threads) {
  cam.validate();
  DepthImage image;
  image.camera = cam;
  image.depths.assign(static_cast<std::size_t>(cam.image_width) * cam.image_height, kNoDepth);
  if (bvh.empty()) return image;
  parallel_for(static_cast<std::size_t>(cam.image_height), threads, [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < cam.image_width; ++u) image.at(u, v) = pixel_depth(cam, bvh, u, v);
  });
  return image;
}

std::optional<Projection> project_point(const CameraConfig& cam, const Vec3& p) {
  const Vec3 body = cam.pose.orientation.to_body(p - cam.pose.position);
  if (!(body.x > 0.0)) return std::nullopt;
  const double u = cam.cx() - cam.fx() * body.y / body.x;
  const double v = cam.cy() - cam.fy() * body.z / body.x;
  if (!(u >= 0.0 && u < cam.image_width && v >= 0.0 && v < cam.image_height)) return std::nullopt;
  return Projection{u, v, body.x};
}

Vec3 back_project(const CameraConfig& cam, double u, double v, double depth) {
  return cam.pose.position + cam.pixel_direction(u, v) * depth;
}

void write_pfm(std::ostream& out, const DepthImage& image) {
  out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
  std::vector<char> row(static_cast<std::size_t>(image.width()) * 4);
  for (int v = image.height() - 1; v >= 0; --v) {
    for (int u = 0; u < image.width(); ++u) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(image.at(u, v)));
      for (int b = 0; b < 4; ++b) row[static_cast<std::size_t>(u) * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

void write_pfm(const std::string& path, const DepthImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_pfm(out, image);
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<float> read_pfm(std::istream& in, int& width, int& height) {
  std::string magic;
  double scale = 0.0;
  if (!(in >> magic >> width >> height >> scale) || magic != "Pf" || width <= 0 || height <= 0) {
    throw std::runtime_error("not a grayscale PFM");
  }
  if (scale >= 0.0) throw std::runtime_error("only little-endian PFM is supported");
  in.get();  // single whitespace byte before the raster
  std::vector<float> pixels(static_cast<std::size_t>(width) * height);
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 4);
  for (int v = height - 1; v >= 0; --v) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()))) {
      throw std::runtime_error("truncated PFM raster");
    }
    for (int u = 0; u < width; ++u) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(row[static_cast<std::size_t>(u) * 4 + b]) << (8 * b);
      pixels[static_cast<std::size_t>(v) * width + u] = std::bit_cast<float>(bits);
    }
  }
  return pixels;
}

}  // namespace orchardsim
