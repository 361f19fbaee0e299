#include <doctest.h>

#include <cmath>
#include <sstream>

#include "orchardsim/depthrender.hpp"
#include "orchardsim/orchard.hpp"
#include "orchardsim/rng.hpp"

using namespace orchardsim;

namespace {

CameraConfig small_camera(const Vec3& p, double yaw, double pitch = 0.0) {
  CameraConfig cam;
  cam.pose = {p, Rotation::from_yaw_pitch(yaw, pitch)};
  cam.image_width = 64;
  cam.image_height = 48;
  cam.far = 10.0;
  return cam;
}

std::vector<Triangle> wall_at(double x, double half) {
  const Vec3 a{x, -half, -half}, b{x, half, -half}, c{x, half, half}, d{x, -half, half};
  return {{a, b, c, TriangleKind::trunk, 0, std::nullopt}, {a, c, d, TriangleKind::trunk, 0, std::nullopt}};
}

// Nearest hit over every triangle, converted to planar depth.
double oracle_depth(const CameraConfig& cam, const std::vector<Triangle>& tris, int u, int v) {
  const Vec3 dir = cam.pixel_direction(u + 0.5, v + 0.5);
  const double scale = norm(dir);
  const Ray ray{cam.pose.position, dir / scale};
  double best = cam.far * scale;
  bool hit = false;
  for (const Triangle& t : tris) {
    if (const auto h = ray_triangle_intersect(ray, t, best)) {
      best = *h;
      hit = true;
    }
  }
  return hit ? best / scale : kNoDepth;
}

std::vector<Triangle> random_scene(std::uint64_t seed) {
  TreeParams p = *tree_preset("apple-like");
  p.branching_levels = 3;
  OrchardLayout l;
  l.rows = 1;
  l.cols = 1;
  return generate_orchard(p, l, seed).triangles;
}

}  // namespace

TEST_CASE("empty scene renders no depth") {
  const DepthImage img = render_depth(small_camera({0, 0, 0}, 0.0), Bvh());
  REQUIRE(img.depths.size() == 64u * 48u);
  for (double d : img.depths) CHECK(d == kNoDepth);
}

TEST_CASE("fronto-parallel wall has constant planar depth") {
  const auto tris = wall_at(3.0, 20.0);
  const DepthImage img = render_depth(small_camera({0, 0, 0}, 0.0), Bvh(tris));
  for (double d : img.depths) CHECK(std::abs(d - 3.0) < 1e-6);

  const DepthImage far = render_depth(small_camera({-8, 0, 0}, 0.0), Bvh(tris));
  for (double d : far.depths) CHECK(d == kNoDepth);
}

TEST_CASE("every pixel matches a linear-scan ray cast") {
  const auto tris = random_scene(3);
  const Bvh bvh(tris);
  Rng rng(31);
  int hits = 0;
  for (int k = 0; k < 4; ++k) {
    const CameraConfig cam =
        small_camera({rng.uniform(-4, -2.5), rng.uniform(-1, 1), rng.uniform(1, 3)}, rng.uniform(-0.3, 0.3),
                     rng.uniform(-0.2, 0.3));
    const DepthImage img = render_depth(cam, bvh);
    for (int v = 0; v < cam.image_height; ++v) {
      for (int u = 0; u < cam.image_width; ++u) {
        const double expect = oracle_depth(cam, tris, u, v);
        if (expect == kNoDepth) {
          CHECK(img.at(u, v) == kNoDepth);
        } else {
          ++hits;
          CHECK(img.at(u, v) == doctest::Approx(expect).epsilon(1e-12));
        }
      }
    }
  }
  CHECK(hits > 500);
}

TEST_CASE("rendering is thread independent") {
  const Bvh bvh(random_scene(4));
  const CameraConfig cam = small_camera({-3, 0, 2}, 0.0);
  CHECK(render_depth(cam, bvh, 1).depths == render_depth(cam, bvh, 4).depths);
}

TEST_CASE("projection and back projection are inverse") {
  const CameraConfig axis = small_camera({0, 0, 0}, 0.0);
  const auto centre = project_point(axis, {2, 0, 0});
  REQUIRE(centre);
  CHECK(centre->u == doctest::Approx(32.0));
  CHECK(centre->v == doctest::Approx(24.0));
  CHECK(centre->depth == doctest::Approx(2.0));
  CHECK_FALSE(project_point(axis, {-2, 0, 0}));
  CHECK_FALSE(project_point(axis, {1, 5, 0}));

  const auto left = project_point(axis, {2, 0.5, 0.3});
  REQUIRE(left);
  CHECK(left->u < 32.0);
  CHECK(left->v < 24.0);

  Rng rng(32);
  for (int i = 0; i < 200; ++i) {
    const CameraConfig cam = small_camera({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 3)},
                                          rng.uniform(-kPi, kPi), rng.uniform(-0.5, 0.5));
    const double u = rng.uniform(0, 64), v = rng.uniform(0, 48), d = rng.uniform(0.5, 9);
    const Vec3 p = back_project(cam, u, v, d);
    const auto q = project_point(cam, p);
    REQUIRE(q);
    CHECK(q->u == doctest::Approx(u));
    CHECK(q->v == doctest::Approx(v));
    CHECK(q->depth == doctest::Approx(d));
  }
}

TEST_CASE("pfm round trip keeps every pixel") {
  const DepthImage img = render_depth(small_camera({-3, 0, 2}, 0.0), Bvh(random_scene(5)));
  std::stringstream buf;
  write_pfm(buf, img);
  CHECK(buf.str().rfind("Pf\n64 48\n-1.0\n", 0) == 0);
  CHECK(buf.str().size() == std::string("Pf\n64 48\n-1.0\n").size() + 64u * 48u * 4u);
  int w = 0, h = 0;
  const std::vector<float> px = read_pfm(buf, w, h);
  REQUIRE(w == 64);
  REQUIRE(h == 48);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) CHECK(px[static_cast<std::size_t>(v) * w + u] == static_cast<float>(img.at(u, v)));
  }

  std::stringstream bad("P6\n2 2\n255\n");
  CHECK_THROWS_AS(read_pfm(bad, w, h), std::runtime_error);
  std::stringstream truncated("Pf\n4 4\n-1.0\n0000");
  CHECK_THROWS_AS(read_pfm(truncated, w, h), std::runtime_error);
}
