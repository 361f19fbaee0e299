#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "orchardsim/bvh.hpp"
#include "orchardsim/rng.hpp"

using namespace orchardsim;

namespace {

struct PlaneHit {
  double t;
  double min_bary;  // smallest barycentric coordinate of the plane hit
};

// Plane intersection followed by barycentric coordinates from dot products.
std::optional<PlaneHit> plane_barycentric(const Ray& ray, const Triangle& tri) {
  const Vec3 e1 = tri.v1 - tri.v0, e2 = tri.v2 - tri.v0;
  const Vec3 n = cross(e1, e2);
  const double denom = dot(n, ray.dir);
  if (std::abs(denom) < 1e-14) return std::nullopt;
  const double t = dot(n, tri.v0 - ray.origin) / denom;
  const Vec3 w = ray.at(t) - tri.v0;
  const double d00 = dot(e1, e1), d01 = dot(e1, e2), d11 = dot(e2, e2);
  const double d20 = dot(w, e1), d21 = dot(w, e2);
  const double det = d00 * d11 - d01 * d01;
  const double b1 = (d11 * d20 - d01 * d21) / det;
  const double b2 = (d00 * d21 - d01 * d20) / det;
  return PlaneHit{t, std::min({1.0 - b1 - b2, b1, b2})};
}

Vec3 random_point(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

Triangle random_triangle(Rng& rng, double lo, double hi, double size) {
  const Vec3 c = random_point(rng, lo, hi);
  Triangle t;
  t.v0 = c + random_point(rng, -size, size);
  t.v1 = c + random_point(rng, -size, size);
  t.v2 = c + random_point(rng, -size, size);
  t.kind = rng.bernoulli(0.5) ? TriangleKind::leaf : TriangleKind::fruit;
  return t;
}

Ray random_ray(Rng& rng, double lo, double hi) {
  const Vec3 from = random_point(rng, lo, hi);
  Vec3 to = random_point(rng, lo, hi);
  while (distance(from, to) < 1e-3) to = random_point(rng, lo, hi);
  return Ray::through(from, to);
}

}  // namespace

TEST_CASE("ray_triangle_intersect axis-aligned examples") {
  const Triangle tri{{-1, -1, 1}, {1, -1, 1}, {0, 1, 1}, TriangleKind::leaf, 0, std::nullopt};
  const auto hit = ray_triangle_intersect({{0, 0, 0}, {0, 0, 1}}, tri, 10.0);
  REQUIRE(hit);
  CHECK(*hit == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(ray_triangle_intersect({{0, 0, 0}, {0, 0, -1}}, tri, 10.0));
  CHECK_FALSE(ray_triangle_intersect({{0, 0, 0}, {0, 0, 1}}, tri, 0.5));
}

TEST_CASE("degenerate triangles never hit") {
  const Triangle line{{-1, 0, 1}, {0, 0, 1}, {1, 0, 1}, TriangleKind::leaf, 0, std::nullopt};
  CHECK_FALSE(ray_triangle_intersect({{0, 0, 0}, {0, 0, 1}}, line, 10.0));
  const Triangle point{{0, 0, 1}, {0, 0, 1}, {0, 0, 1}, TriangleKind::leaf, 0, std::nullopt};
  CHECK_FALSE(ray_triangle_intersect({{0, 0, 0}, {0, 0, 1}}, point, 10.0));
}

TEST_CASE("ray_triangle_intersect matches the plane and barycentric oracle") {
  Rng rng(11);
  int compared = 0, hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Triangle tri = random_triangle(rng, -1.0, 1.0, 1.0);
    // Aim at a point near the triangle so both outcomes are common.
    const Vec3 target = tri.v0 * rng.uniform(-0.3, 1.0) + tri.v1 * rng.uniform(-0.3, 1.0) + tri.v2 * rng.uniform(-0.3, 1.0);
    const Vec3 origin = random_point(rng, -4.0, 4.0);
    if (distance(origin, target) < 1e-3) continue;
    const Ray ray = Ray::through(origin, target);
    const double t_max = 10.0;
    const auto oracle = plane_barycentric(ray, tri);
    // Skip measure-zero boundary cases where either side may round differently.
    if (oracle && (std::abs(oracle->min_bary) < 1e-9 || std::abs(oracle->t - kRayEpsilon) < 1e-9 ||
                   std::abs(oracle->t - t_max) < 1e-9)) {
      continue;
    }
    const bool expect = oracle && oracle->min_bary > 0.0 && oracle->t > kRayEpsilon && oracle->t < t_max;
    const auto got = ray_triangle_intersect(ray, tri, t_max);
    ++compared;
    REQUIRE(got.has_value() == expect);
    if (expect) {
      ++hits;
      CHECK(std::abs(*got - oracle->t) < 1e-9);
    }
  }
  CHECK(compared > 990);
  CHECK(hits > 100);
}

TEST_CASE("ray_triangle_intersect is invariant under cyclic vertex permutation") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Triangle a = random_triangle(rng, -1.0, 1.0, 1.0);
    const Triangle b{a.v1, a.v2, a.v0, a.kind, a.tree_id, a.fruit_id};
    const Triangle c{a.v2, a.v0, a.v1, a.kind, a.tree_id, a.fruit_id};
    const Ray ray = Ray::through(random_point(rng, -3, 3), a.centroid() + random_point(rng, -0.5, 0.5));
    const auto ha = ray_triangle_intersect(ray, a, 20.0);
    const auto hb = ray_triangle_intersect(ray, b, 20.0);
    const auto hc = ray_triangle_intersect(ray, c, 20.0);
    REQUIRE(ha.has_value() == hb.has_value());
    REQUIRE(ha.has_value() == hc.has_value());
    if (ha) {
      CHECK(std::abs(*ha - *hb) < 1e-9);
      CHECK(std::abs(*ha - *hc) < 1e-9);
    }
  }
}

TEST_CASE("frustum_contains examples") {
  const Frustum f({0, 0, 0}, Rotation::from_yaw_pitch(0, 0), deg_to_rad(90), deg_to_rad(90), 20.0);
  CHECK(frustum_contains(f, {1, 0, 0}));
  CHECK_FALSE(frustum_contains(f, {-1, 0, 0}));
  CHECK_FALSE(frustum_contains(f, {20.01, 0, 0}));
  CHECK(frustum_contains(f, {20.0, 0, 0}));
  CHECK(frustum_contains(f, {5, 4.9, 0}));
  CHECK_FALSE(frustum_contains(f, {5, 5.1, 0}));
  CHECK_FALSE(frustum_contains(f, {5, 0, -5.1}));
}

TEST_CASE("on-axis points are inside for every depth up to far") {
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const Rotation r = Rotation::from_yaw_pitch(rng.uniform(-kPi, kPi), rng.uniform(-1.5, 1.5));
    const Vec3 apex = random_point(rng, -5, 5);
    const double far = rng.uniform(0.5, 30.0);
    const Frustum f(apex, r, rng.uniform(0.01, 3.0), rng.uniform(0.01, 3.0), far);
    for (double d : {1e-6, 0.3 * far, far}) CHECK(f.contains(apex + r.forward() * d));
  }
}

TEST_CASE("rotation columns are an orthonormal forward/left/up frame") {
  const Rotation r = Rotation::from_yaw_pitch(kPi / 2, 0.0);
  CHECK(distance(r.forward(), {0, 1, 0}) < 1e-12);
  CHECK(distance(r.left(), {-1, 0, 0}) < 1e-12);
  const Rotation down = Rotation::from_yaw_pitch(0.0, -kPi / 2);
  CHECK(distance(down.forward(), {0, 0, -1}) < 1e-12);
  const Vec3 p{0.3, -1.2, 2.5};
  CHECK(distance(r.to_world(r.to_body(p)), p) < 1e-12);
}

TEST_CASE("single-triangle bvh is one leaf") {
  const Triangle tri{{-1, -1, 1}, {1, -1, 1}, {0, 1, 1}, TriangleKind::leaf, 0, std::nullopt};
  const Bvh bvh(std::span(&tri, 1));
  REQUIRE(bvh.nodes().size() == 1);
  CHECK(bvh.nodes()[0].is_leaf());
  CHECK(bvh.nodes()[0].count == 1);
  CHECK(bvh.any_hit({{0, 0, 0}, {0, 0, 1}}, 10.0));
}

TEST_CASE("empty bvh misses every query") {
  const Bvh bvh = build_bvh({});
  CHECK(bvh.empty());
  CHECK_FALSE(bvh.any_hit({{0, 0, 0}, {1, 0, 0}}, 100.0));
  CHECK_FALSE(bvh.nearest_hit({{0, 0, 0}, {1, 0, 0}}, 100.0));
  CHECK(bvh.nearest_distance({0, 0, 0}, 5.0) == 5.0);
}

TEST_CASE("occluder filter on a leaf midway along the ray") {
  std::vector<Triangle> tris{{{1.5, -1, -1}, {1.5, 1, -1}, {1.5, 0, 1}, TriangleKind::leaf, 0, std::nullopt}};
  const Bvh bvh(tris);
  const Ray ray = Ray::through({0, 0, 0}, {3, 0, 0});
  CHECK(bvh_any_hit(bvh, ray, 3.0, [](const Triangle& t) { return is_occluder(t.kind); }));
  tris[0].kind = TriangleKind::fruit;
  tris[0].fruit_id = 0;
  const Bvh fruit_only(tris);
  CHECK_FALSE(bvh_any_hit(fruit_only, ray, 3.0, [](const Triangle& t) { return is_occluder(t.kind); }));
}

TEST_CASE("bvh queries equal a linear scan on 10k random triangles") {
  Rng rng(14);
  std::vector<Triangle> tris;
  for (int i = 0; i < 10000; ++i) tris.push_back(random_triangle(rng, -10.0, 10.0, 0.4));
  const Bvh bvh(tris);
  const auto occluder = [](const Triangle& t) { return is_occluder(t.kind); };
  for (int i = 0; i < 1000; ++i) {
    const Ray ray = random_ray(rng, -12.0, 12.0);
    const double t_max = rng.uniform(1.0, 30.0);
    bool any = false, any_occluder = false;
    std::optional<double> nearest;
    for (const Triangle& t : tris) {
      if (const auto h = ray_triangle_intersect(ray, t, t_max)) {
        any = true;
        any_occluder = any_occluder || occluder(t);
        if (!nearest || *h < *nearest) nearest = *h;
      }
    }
    REQUIRE(bvh.any_hit(ray, t_max) == any);
    REQUIRE(bvh_any_hit(bvh, ray, t_max, occluder) == any_occluder);
    const auto hit = bvh.nearest_hit(ray, t_max);
    REQUIRE(hit.has_value() == nearest.has_value());
    if (hit) {
      CHECK(hit->t == *nearest);
      CHECK(ray_triangle_intersect(ray, tris[hit->triangle], t_max) == hit->t);
    }
  }
}

TEST_CASE("duplicate triangles are both retained") {
  const Triangle tri{{-1, -1, 1}, {1, -1, 1}, {0, 1, 1}, TriangleKind::leaf, 0, std::nullopt};
  const std::vector<Triangle> tris{tri, tri};
  const Bvh bvh(tris);
  CHECK(bvh.size() == 2);
  CHECK(bvh.any_hit({{0, 0, 0}, {0, 0, 1}}, 10.0));
  CHECK(bvh.triangle(0) == tri);
  CHECK(bvh.triangle(1) == tri);
}

TEST_CASE("bvh construction is deterministic") {
  Rng rng(15);
  std::vector<Triangle> tris;
  for (int i = 0; i < 2000; ++i) tris.push_back(random_triangle(rng, -5.0, 5.0, 0.5));
  const Bvh a(tris), b(tris);
  CHECK(a.triangle_indices() == b.triangle_indices());
  REQUIRE(a.nodes().size() == b.nodes().size());
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    CHECK(a.nodes()[i].bounds == b.nodes()[i].bounds);
    CHECK(a.nodes()[i].count == b.nodes()[i].count);
    CHECK(a.nodes()[i].count <= Bvh::kMaxLeafSize);
  }
}

TEST_CASE("nearest_distance equals the brute-force minimum") {
  Rng rng(16);
  std::vector<Triangle> tris;
  for (int i = 0; i < 3000; ++i) tris.push_back(random_triangle(rng, -5.0, 5.0, 0.3));
  const Bvh bvh(tris);
  for (int i = 0; i < 300; ++i) {
    const Vec3 p = random_point(rng, -6.0, 6.0);
    double best = 2.0;
    for (const Triangle& t : tris) best = std::min(best, point_triangle_distance(p, t));
    CHECK(bvh.nearest_distance(p, 2.0) == best);
  }
}

TEST_CASE("point_triangle_distance agrees with dense barycentric sampling") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const Triangle tri = random_triangle(rng, -1.0, 1.0, 1.0);
    const Vec3 p = random_point(rng, -2.0, 2.0);
    const int n = 200;
    double sampled = INFINITY;
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; a + b <= n; ++b) {
        const double u = static_cast<double>(a) / n, v = static_cast<double>(b) / n;
        sampled = std::min(sampled, distance(p, tri.v0 + (tri.v1 - tri.v0) * u + (tri.v2 - tri.v0) * v));
      }
    }
    const double d = point_triangle_distance(p, tri);
    const double spacing = 2.0 * std::max({norm(tri.v1 - tri.v0), norm(tri.v2 - tri.v0), norm(tri.v2 - tri.v1)}) / n;
    CHECK(d <= sampled + 1e-12);
    CHECK(d >= sampled - spacing);
  }
}

TEST_CASE("rng streams are reproducible and named substreams differ") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng s1 = Rng::substream(42, "tree", 0), s2 = Rng::substream(42, "tree", 1), s3 = Rng::substream(42, "noise", 0);
  const auto x1 = s1.next_u64(), x2 = s2.next_u64(), x3 = s3.next_u64();
  CHECK(x1 != x2);
  CHECK(x1 != x3);
  CHECK(Rng::substream(42, "tree", 0).next_u64() == x1);
}

TEST_CASE("rng distributions have the expected range and moments") {
  Rng rng(5);
  const int n = 200000;
  double sum = 0, sum_sq = 0, usum = 0;
  std::int64_t lo = 100, hi = -100;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    usum += u;
    const auto k = rng.uniform_int(-3, 4);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
  CHECK(std::abs(usum / n - 0.5) < 0.005);
  CHECK(lo == -3);
  CHECK(hi == 4);
  double psum = 0;
  for (int i = 0; i < 20000; ++i) psum += rng.poisson(2.5);
  CHECK(std::abs(psum / 20000 - 2.5) < 0.05);
}
