#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "orchardsim/rng.hpp"
#include "orchardsim/trajectory.hpp"
#include "orchardsim/visibility.hpp"

using namespace orchardsim;

namespace {

CameraConfig camera_at(const Vec3& p, double yaw, double pitch = 0.0, double far = 10.0) {
  CameraConfig cam;
  cam.pose = {p, Rotation::from_yaw_pitch(yaw, pitch)};
  cam.far = far;
  return cam;
}

// Tetrahedron of fruit triangles around a fruit centre.
void add_fruit(OrchardModel& m, std::uint32_t tree, std::uint32_t id, const Vec3& c, double r) {
  m.fruits.push_back({tree, id, c, r});
  const Vec3 a = c + Vec3{r, 0, -r}, b = c + Vec3{-r, r, -r}, d = c + Vec3{-r, -r, -r}, top = c + Vec3{0, 0, r};
  for (const auto& [p, q, s] : {std::array{a, b, d}, std::array{a, b, top}, std::array{b, d, top}, std::array{d, a, top}}) {
    m.triangles.push_back({p, q, s, TriangleKind::fruit, tree, id});
  }
}

void add_leaf(OrchardModel& m, const Vec3& c, double half) {
  m.triangles.push_back({c + Vec3{0, -half, -half}, c + Vec3{0, half, -half}, c + Vec3{0, 0, half}, TriangleKind::leaf, 0,
                         std::nullopt});
}

// Every fruit against every triangle, frustum by angles.
std::set<FruitKey> brute_force_visible(const CameraConfig& cam, const OrchardModel& m) {
  std::set<FruitKey> out;
  const Rotation& r = cam.pose.orientation;
  for (const FruitRecord& f : m.fruits) {
    const Vec3 d = f.center - cam.pose.position;
    const double x = dot(d, r.forward()), y = dot(d, r.left()), z = dot(d, r.up());
    if (!(x > 0.0) || x > cam.far) continue;
    if (std::atan2(std::abs(y), x) > 0.5 * cam.hfov || std::atan2(std::abs(z), x) > 0.5 * cam.vfov) continue;
    const double t_center = norm(d);
    const Ray ray{cam.pose.position, d / t_center};
    bool blocked = false;
    for (const Triangle& t : m.triangles) {
      if (is_occluder(t.kind) && ray_triangle_intersect(ray, t, t_center - kRayEpsilon)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) out.insert(f.key());
  }
  return out;
}

OrchardModel small_orchard(std::uint64_t seed) {
  TreeParams p = *tree_preset("apple-like");
  p.branching_levels = 3;
  p.leaf_count_per_terminal = {4, 8};
  p.fruit_count = {10, 20};
  OrchardLayout l;
  l.rows = 1;
  l.cols = 2;
  l.tree_spacing = 3.0;
  l.position_jitter = 0.2;
  return generate_orchard(p, l, seed);
}

std::vector<CameraConfig> random_cameras(Rng& rng, const Aabb& box, int n) {
  std::vector<CameraConfig> cams;
  for (int i = 0; i < n; ++i) {
    const Vec3 p{rng.uniform(box.min.x - 3, box.max.x + 3), rng.uniform(box.min.y - 3, box.max.y + 3),
                 rng.uniform(0.5, box.max.z + 1)};
    const Vec3 aim = box.center() - p;
    CameraConfig cam = camera_at(p, std::atan2(aim.y, aim.x) + rng.uniform(-0.5, 0.5), rng.uniform(-0.4, 0.4));
    cam.far = rng.uniform(2.0, 10.0);
    cam.hfov = deg_to_rad(rng.uniform(40, 100));
    cam.vfov = deg_to_rad(rng.uniform(30, 80));
    cams.push_back(cam);
  }
  return cams;
}

}  // namespace

TEST_CASE("fruit on the axis is visible until a leaf blocks it") {
  OrchardModel m;
  add_fruit(m, 0, 0, {3, 0, 0}, 0.04);
  const CameraConfig cam = camera_at({0, 0, 0}, 0.0);
  CHECK(visible_fruits_one(cam, m, Bvh(m.triangles)).size() == 1);
  add_leaf(m, {1.5, 0, 0}, 0.5);
  CHECK(visible_fruits_one(cam, m, Bvh(m.triangles)).empty());
}

TEST_CASE("fruit geometry never occludes unless requested") {
  OrchardModel m;
  add_fruit(m, 0, 0, {3, 0, 0}, 0.04);
  add_fruit(m, 0, 1, {1.5, 0, 0}, 0.3);
  const Bvh bvh(m.triangles);
  const CameraConfig cam = camera_at({0, 0, 0}, 0.0);
  CHECK(visible_fruits_one(cam, m, bvh).size() == 2);
  const auto with_fruit = visible_fruits_one(cam, m, bvh, {.fruits_occlude = true});
  REQUIRE(with_fruit.size() == 1);
  CHECK(with_fruit[0] == FruitKey{0, 1});
}

TEST_CASE("fruits outside the frustum or beyond far are not counted") {
  OrchardModel m;
  add_fruit(m, 0, 0, {-3, 0, 0}, 0.04);
  add_fruit(m, 0, 1, {12, 0, 0}, 0.04);
  add_fruit(m, 0, 2, {3, 5, 0}, 0.04);
  CHECK(visible_fruits_one(camera_at({0, 0, 0}, 0.0), m, Bvh(m.triangles)).empty());
}

TEST_CASE("observations keep duplicates and n_visible deduplicates") {
  OrchardModel m;
  add_fruit(m, 0, 0, {3, 0, 0}, 0.04);
  const std::vector<CameraConfig> cams{camera_at({0, 0, 0}, 0.0), camera_at({0, 0.5, 0}, 0.0)};
  const VisibilityReport r = count_visible(cams, m, Bvh(m.triangles));
  CHECK(r.observations.size() == 2);
  CHECK(r.observations[1].camera_index == 1);
  CHECK(r.n_visible == 1);
  CHECK(r.fraction_visible == 1.0);
  CHECK(r.visible_fruit_positions.at(0) == Vec3{3, 0, 0});
}

TEST_CASE("zero cameras see nothing") {
  const OrchardModel m = small_orchard(1);
  const VisibilityReport r = count_visible({}, m, Bvh(m.triangles));
  CHECK(r.n_visible == 0);
  CHECK(r.fraction_visible == 0.0);
  CHECK(r.total_fruits == m.fruits.size());
}

TEST_CASE("bvh visibility equals the brute-force oracle on random orchards") {
  Rng rng(21);
  std::size_t seen = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const OrchardModel m = small_orchard(seed);
    REQUIRE(m.triangles.size() <= 5000);
    const Bvh bvh(m.triangles);
    for (const CameraConfig& cam : random_cameras(rng, m.bounds, 20)) {
      const auto got = visible_fruits_one(cam, m, bvh);
      const std::set<FruitKey> expect = brute_force_visible(cam, m);
      CHECK(std::set<FruitKey>(got.begin(), got.end()) == expect);
      seen += expect.size();
    }
  }
  CHECK(seen > 50);
}

TEST_CASE("count_visible is the union of per-camera sets and is thread independent") {
  const OrchardModel m = small_orchard(3);
  const Bvh bvh(m.triangles);
  Rng rng(22);
  const auto cams = random_cameras(rng, m.bounds, 15);
  std::set<FruitKey> uni;
  std::size_t obs = 0;
  for (const CameraConfig& c : cams) {
    const auto v = visible_fruits_one(c, m, bvh);
    obs += v.size();
    uni.insert(v.begin(), v.end());
  }
  const VisibilityReport r = count_visible(cams, m, bvh);
  CHECK(r.n_visible == uni.size());
  CHECK(r.observations.size() == obs);
  const VisibilityReport r4 = count_visible(cams, m, bvh, {}, 4);
  CHECK(r4.observations == r.observations);
  CHECK(to_json(r4) == to_json(r));
}

TEST_CASE("adding a camera never decreases n_visible") {
  const OrchardModel m = small_orchard(4);
  const Bvh bvh(m.triangles);
  Rng rng(23);
  const auto cams = random_cameras(rng, m.bounds, 25);
  std::size_t prev = 0;
  for (std::size_t n = 1; n <= cams.size(); ++n) {
    const std::size_t now = count_visible(std::span(cams).first(n), m, bvh).n_visible;
    CHECK(now >= prev);
    prev = now;
  }
}

TEST_CASE("removing occluders leaves the frustum-only count") {
  OrchardModel m = small_orchard(5);
  std::erase_if(m.triangles, [](const Triangle& t) { return is_occluder(t.kind); });
  const Bvh bvh(m.triangles);
  Rng rng(24);
  for (const CameraConfig& cam : random_cameras(rng, m.bounds, 10)) {
    std::size_t inside = 0;
    for (const FruitRecord& f : m.fruits) inside += cam.frustum().contains(f.center);
    CHECK(visible_fruits_one(cam, m, bvh).size() == inside);
  }
}

TEST_CASE("heatmap conserves counts and shifts with the fruits") {
  OrchardModel one;
  add_fruit(one, 0, 0, {3.2, 0.1, 0.1}, 0.04);
  const CameraConfig cam = camera_at({0, 0, 0}, 0.0);
  const VisibilityHeatmap single = visibility_heatmap(count_visible(std::span(&cam, 1), one, Bvh(one.triangles)));
  REQUIRE(single.bins.size() == 1);
  CHECK(single.bins.begin()->second == 1);
  CHECK(single.bins.begin()->first == std::array<std::int64_t, 3>{6, 0, 0});

  const OrchardModel m = small_orchard(6);
  Rng rng(25);
  const auto cams = random_cameras(rng, m.bounds, 12);
  const VisibilityReport r = count_visible(cams, m, Bvh(m.triangles));
  const VisibilityHeatmap h = visibility_heatmap(r, 0.5);
  CHECK(h.total() == r.n_visible);

  VisibilityReport shifted = r;
  for (Vec3& p : shifted.visible_fruit_positions) p += Vec3{0.5, 0, 0};
  const VisibilityHeatmap hs = visibility_heatmap(shifted, 0.5);
  CHECK(hs.total() == h.total());
  for (const auto& [bin, n] : h.bins) {
    const auto it = hs.bins.find({bin[0] + 1, bin[1], bin[2]});
    REQUIRE(it != hs.bins.end());
    CHECK(it->second == n);
  }
}

TEST_CASE("csv lists one row per observation") {
  OrchardModel m;
  add_fruit(m, 2, 5, {3, 0, 0}, 0.04);
  const std::vector<CameraConfig> cams{camera_at({0, 0, 0}, 0.0), camera_at({0, 0.2, 0}, 0.0)};
  const std::string csv = to_csv(count_visible(cams, m, Bvh(m.triangles)), m);
  CHECK(csv.rfind("camera_index,tree_id,fruit_id,x,y,z\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("1,2,5,3,0,0\n") != std::string::npos);
}
