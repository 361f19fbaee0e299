#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "orchardsim/assignment.hpp"
#include "orchardsim/counting.hpp"
#include "orchardsim/depthrender.hpp"
#include "orchardsim/rng.hpp"
#include "orchardsim/trajectory.hpp"

using namespace orchardsim;

namespace {

CameraConfig camera_at(const Vec3& p, double yaw) {
  CameraConfig cam;
  cam.pose = {p, Rotation::from_yaw_pitch(yaw, 0.0)};
  cam.hfov = deg_to_rad(60.0);
  cam.vfov = deg_to_rad(45.0);
  return cam;
}

OrchardModel one_fruit(const Vec3& c, double r) {
  OrchardModel m;
  m.fruits.push_back({0, 0, c, r});
  const Vec3 a = c + Vec3{r, 0, -r}, b = c + Vec3{-r, r, -r}, d = c + Vec3{-r, -r, -r}, top = c + Vec3{0, 0, r};
  for (const auto& [p, q, s] : {std::array{a, b, d}, std::array{a, b, top}, std::array{b, d, top}, std::array{d, a, top}}) {
    m.triangles.push_back({p, q, s, TriangleKind::fruit, 0, 0});
  }
  m.bounds.expand(c - Vec3{r, r, r});
  m.bounds.expand(c + Vec3{r, r, r});
  return m;
}

Detection det(int frame, double cu, double cv, double conf, double half = 6.0) {
  return {frame, BBox::centered(cu, cv, half, half), conf, std::nullopt};
}

double brute_force_assignment(const CostMatrix& m) {
  const bool transpose = m.rows > m.cols;
  const std::size_t n = transpose ? m.cols : m.rows, k = transpose ? m.rows : m.cols;
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += transpose ? m.at(perm[i], i) : m.at(i, perm[i]);
    best = std::min(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Density connectivity by definition: core points, union-find over core
// pairs within eps, border points to the nearest core (lowest index on ties).
std::vector<int> dbscan_oracle(const std::vector<Vec3>& pts, double eps, std::size_t min_pts) {
  const std::size_t n = pts.size();
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) c += distance(pts[i], pts[j]) <= eps;
    core[i] = c >= min_pts;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (core[i] && core[j] && distance(pts[i], pts[j]) <= eps) parent[find(i)] = find(j);
    }
  }
  std::vector<int> label(n, -1);
  std::map<std::size_t, int> ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) label[i] = ids.emplace(find(i), static_cast<int>(ids.size())).first->second;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = distance(pts[i], pts[j]);
      if (core[j] && d <= eps && d < best) {
        best = d;
        label[i] = label[j];
      }
    }
  }
  return label;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    if (ab.emplace(a[i], b[i]).first->second != b[i] || ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

std::vector<Vec3> random_points(Rng& rng, std::size_t n) {
  std::vector<Vec3> pts;
  const int blobs = static_cast<int>(rng.uniform_int(1, 8));
  std::vector<Vec3> centres;
  for (int b = 0; b < blobs; ++b) centres.push_back({rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)});
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < 0.2) {
      pts.push_back({rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)});
    } else {
      const Vec3& c = centres[rng.uniform_int(0, blobs - 1)];
      pts.push_back(c + Vec3{rng.normal(0, 0.1), rng.normal(0, 0.1), rng.normal(0, 0.1)});
    }
  }
  return pts;
}

}  // namespace

TEST_CASE("iou of boxes") {
  const BBox a{0, 0, 2, 2};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {3, 3, 4, 4}) == 0.0);
  CHECK(iou(a, {1, 0, 3, 2}) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(a, {0, 0, 1, 1}) == doctest::Approx(0.25));
}

TEST_CASE("noiseless detection boxes sit on the projected centre") {
  const OrchardModel m = one_fruit({3, 0.2, -0.1}, 0.04);
  const Bvh bvh(m.triangles);
  std::vector<CameraConfig> cams;
  for (int k = 0; k < 5; ++k) cams.push_back(camera_at({0, -0.2 + 0.1 * k, 0}, 0.0));
  const DetectionFrames frames = synth_detections(cams, m, bvh, {});
  REQUIRE(frames.size() == 5);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    REQUIRE(frames[k].size() == 1);
    const Detection& d = frames[k][0];
    const auto p = project_point(cams[k], m.fruits[0].center);
    REQUIRE(p);
    CHECK(std::abs(d.bbox.cu() - p->u) < 0.5);
    CHECK(std::abs(d.bbox.cv() - p->v) < 0.5);
    CHECK(d.bbox.width() == doctest::Approx(2 * cams[k].fx() * 0.04 / p->depth));
    CHECK(d.gt == FruitKey{0, 0});
    CHECK(d.confidence == 1.0);
    CHECK(d.frame == static_cast<int>(k));
  }
  CHECK(annotated_fruits(cams, m, bvh).size() == 1);

  NoiseModel miss;
  miss.p_miss = 1.0;
  for (const auto& f : synth_detections(cams, m, bvh, miss)) CHECK(f.empty());

  NoiseModel noisy;
  noisy.jitter_px = 2.0;
  noisy.fp_rate = 3.0;
  noisy.p_miss = 0.3;
  noisy.seed = 5;
  const DetectionFrames a = synth_detections(cams, m, bvh, noisy, 1), b = synth_detections(cams, m, bvh, noisy, 3);
  REQUIRE(a.size() == b.size());
  std::size_t fps = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    REQUIRE(a[k].size() == b[k].size());
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      CHECK(a[k][i].bbox == b[k][i].bbox);
      if (!a[k][i].gt) {
        ++fps;
        CHECK(a[k][i].confidence <= noisy.conf_fp_max);
      }
    }
  }
  CHECK(fps > 0);
}

TEST_CASE("assignment matches brute force") {
  Rng rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    CostMatrix m;
    m.rows = static_cast<std::size_t>(rng.uniform_int(1, 6));
    m.cols = static_cast<std::size_t>(rng.uniform_int(1, 6));
    for (std::size_t i = 0; i < m.rows * m.cols; ++i) m.cost.push_back(trial % 3 == 0 ? rng.uniform_int(0, 3) : rng.uniform());
    const std::vector<int> a = solve_assignment(m);
    REQUIRE(a.size() == m.rows);
    double sum = 0;
    std::vector<int> used;
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (a[r] < 0) continue;
      used.push_back(a[r]);
      sum += m.at(r, static_cast<std::size_t>(a[r]));
    }
    CHECK(used.size() == std::min(m.rows, m.cols));
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    CHECK(sum == doctest::Approx(brute_force_assignment(m)));
  }
  CHECK(solve_assignment({}).empty());
}

TEST_CASE("tracker follows steady boxes") {
  DetectionFrames one(10), two(10);
  for (int f = 0; f < 10; ++f) {
    one[f].push_back(det(f, 100 + 2 * f, 100, 0.9));
    two[f].push_back(det(f, 100 + 2 * f, 100, 0.9));
    two[f].push_back(det(f, 300 - 2 * f, 200, 0.9));
  }
  const auto t1 = track(one, {});
  REQUIRE(t1.size() == 1);
  CHECK(t1[0].detections.size() == 10);
  CHECK(t1[0].track_id == 0);
  const auto t2 = track(two, {});
  REQUIRE(t2.size() == 2);
  CHECK(t2[0].detections.size() == 10);
  CHECK(t2[1].detections.size() == 10);
  for (const Detection& d : t2[1].detections) CHECK(d.bbox.cv() == 200.0);

  DetectionFrames low(5);
  for (int f = 0; f < 5; ++f) low[f].push_back(det(f, 100, 100, 0.3));
  CHECK(track(low, {}).empty());
  CHECK(track({}, {}).empty());
}

TEST_CASE("low-confidence stage bridges a dip on a curved path") {
  DetectionFrames frames(40);
  for (int f = 0; f < 40; ++f) {
    const double a = 0.32 * f;
    frames[f].push_back(det(f, 320 + 16 * std::cos(a), 240 + 16 * std::sin(a), f >= 18 && f < 21 ? 0.2 : 0.9));
  }
  TrackerConfig high_only;
  high_only.two_stage = false;
  const auto two = track(frames, {});
  const auto one = track(frames, high_only);
  CHECK(two.size() == 1);
  CHECK(one.size() > two.size());
  CHECK(two[0].detections.size() == 40);
}

TEST_CASE("two noiseless views triangulate the fruit") {
  const Vec3 fruit{0.3, 3.0, 1.2};
  std::vector<CameraConfig> cams{camera_at({0, 0, 1}, kPi / 2), camera_at({0.8, 0, 1.1}, kPi / 2)};
  Track t;
  for (int k = 0; k < 2; ++k) {
    const auto p = project_point(cams[k], fruit);
    REQUIRE(p);
    t.detections.push_back(det(k, p->u, p->v, 1.0));
  }
  const auto lm = triangulate(t, cams, {.min_views = 2});
  REQUIRE(lm);
  CHECK(distance(lm->position, fruit) < 1e-3);
  CHECK(lm->n_views == 2);
  CHECK(lm->reprojection_px < 1e-6);
  CHECK_FALSE(triangulate(t, cams, {.min_views = 3}));

  std::vector<CameraConfig> same{cams[0], cams[0]};
  Track still;
  const auto p = project_point(cams[0], fruit);
  for (int k = 0; k < 2; ++k) still.detections.push_back(det(k, p->u, p->v, 1.0));
  CHECK_FALSE(triangulate(still, same, {.min_views = 2}));
}

TEST_CASE("triangulation error under one pixel of noise") {
  const Vec3 fruit{0, 0, 1.5};
  std::vector<CameraConfig> cams;
  for (int k = 0; k < 10; ++k) {
    cams.push_back(camera_at({-2.25 + 0.5 * k, -3, 1.5}, kPi / 2));
    cams.back().hfov = deg_to_rad(90.0);
  }
  Rng rng(52);
  int good = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    Track t;
    for (int k = 0; k < 10; ++k) {
      const auto p = project_point(cams[k], fruit);
      REQUIRE(p);
      t.detections.push_back(det(k, p->u + rng.normal(0, 1), p->v + rng.normal(0, 1), 1.0));
    }
    const auto lm = triangulate(t, cams, {.max_reprojection_px = 5.0});
    if (lm && distance(lm->position, fruit) < 0.05) ++good;
  }
  CHECK(good >= 0.95 * trials);
}

TEST_CASE("pieces split a track that swaps fruits") {
  const Vec3 f0{0, 3, 1.5}, f1{0.6, 3.4, 1.3};
  std::vector<CameraConfig> cams;
  for (int k = 0; k < 12; ++k) cams.push_back(camera_at({-1.5 + 0.25 * k, 0, 1.5}, kPi / 2));
  Track t;
  for (int k = 0; k < 12; ++k) {
    if (k == 6) continue;
    const auto p = project_point(cams[k], k < 6 ? f0 : f1);
    REQUIRE(p);
    t.detections.push_back(det(k, p->u, p->v, 1.0));
  }
  const auto pieces = triangulate_pieces(t, cams, {.max_reprojection_px = 0.5, .min_views = 3});
  REQUIRE(pieces.size() == 2);
  CHECK(distance(pieces[0].landmark.position, f0) < 1e-6);
  CHECK(distance(pieces[1].landmark.position, f1) < 1e-6);
  CHECK(pieces[0].begin == 0);
  CHECK(pieces[0].end == 6);
  CHECK(pieces[1].end == 11);
}

TEST_CASE("dbscan equals the density-connectivity oracle") {
  Rng rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    const std::vector<Vec3> pts = random_points(rng, static_cast<std::size_t>(rng.uniform_int(1, 150)));
    const double eps = rng.uniform(0.05, 0.4);
    const std::size_t min_pts = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const ClusterReport r = dbscan(pts, eps, min_pts);
    const std::vector<int> expect = dbscan_oracle(pts, eps, min_pts);
    CHECK(same_partition(r.labels, expect));
    CHECK(r.estimated_count == r.clusters.size());
    std::size_t members = r.noise.size();
    for (const Cluster& c : r.clusters) members += c.members.size();
    CHECK(members == pts.size());

    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(0, i - 1)]);
    std::vector<Vec3> shuffled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);
    const ClusterReport s = dbscan(shuffled, eps, min_pts);
    CHECK(s.estimated_count == r.estimated_count);
    if (min_pts == 1) {
      std::vector<int> back(pts.size());
      for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = s.labels[i];
      CHECK(same_partition(back, r.labels));
    }
  }
}

TEST_CASE("dbscan groups 33 landmarks around 12 fruits") {
  Rng rng(54);
  std::vector<Vec3> pts;
  for (int c = 0; c < 12; ++c) {
    const Vec3 centre{0.5 * (c % 4), 0.5 * (c / 4), 1.0};
    for (int k = 0; k < (c < 9 ? 3 : 2); ++k) pts.push_back(centre + Vec3{rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), 0});
  }
  REQUIRE(pts.size() == 33);
  const ClusterReport r = dbscan(pts, 0.1, 1);
  CHECK(r.estimated_count == 12);
  CHECK(r.noise.empty());
  for (const Cluster& c : r.clusters) CHECK(c.members.size() >= 2);
  CHECK(dbscan(pts, 0.1, 3).estimated_count == 9);
  CHECK(dbscan(pts, 1e-4, 1).estimated_count == 33);
  CHECK(dbscan(pts, 10.0, 1).estimated_count == 1);
  CHECK(dbscan({}, 0.1, 1).estimated_count == 0);
}

TEST_CASE("fruitless scene counts zero") {
  TreeParams p = *tree_preset("apple-like");
  p.fruit_count = {0, 0};
  OrchardLayout l;
  l.rows = 1;
  l.cols = 1;
  const OrchardModel m = generate_orchard(p, l, 1);
  const Bvh bvh(m.triangles);
  const auto cams = mount_cameras(orbit_path({0, 0, 2}, 3, 3, 2, 60), std::vector<MountConfig>{{}});
  const CountResult r = count_pipeline(cams, m, bvh, {});
  CHECK(r.estimated_count == 0);
  CHECK(r.ground_truth_visible == 0);
  CHECK(r.landmarks.empty());
}

TEST_CASE("noisy two-tree count stays within ten percent") {
  TreeParams p = *tree_preset("apple-like");
  p.fruit_count = {25, 25};
  OrchardLayout l;
  l.rows = 1;
  l.cols = 2;
  l.tree_spacing = 3.0;
  l.position_jitter = 0.2;
  const OrchardModel m = generate_orchard(p, l, 1);
  const Bvh bvh(m.triangles);
  MountConfig mount;
  mount.mount = MountKind::side_left;
  mount.intrinsics = {deg_to_rad(60.0), deg_to_rad(45.0), 10.0, 640, 480};
  const double height = 0.5 * (p.trunk_height + m.bounds.max.z);
  const auto cams = mount_cameras(row_pass_path(m.bounds, 2.5, 2.0, height, 0.02, 2), std::span(&mount, 1));
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PipelineConfig cfg;
    cfg.noise.jitter_px = 1.0;
    cfg.noise.p_miss = 0.1;
    cfg.noise.fp_rate = 0.2;
    cfg.noise.seed = seed;
    const CountResult r = count_pipeline(cams, m, bvh, cfg);
    REQUIRE(r.ground_truth_visible > 0);
    const double err = std::abs(static_cast<double>(r.estimated_count) - static_cast<double>(r.ground_truth_visible)) /
                       static_cast<double>(r.ground_truth_visible);
    MESSAGE("seed " << seed << " estimate " << r.estimated_count << " truth " << r.ground_truth_visible);
    within += err <= 0.10;
  }
  CHECK(within >= 4);
}

TEST_CASE("pipeline output is thread independent") {
  TreeParams p = *tree_preset("apple-like");
  p.fruit_count = {12, 12};
  OrchardLayout l;
  l.rows = 1;
  l.cols = 1;
  const OrchardModel m = generate_orchard(p, l, 2);
  const Bvh bvh(m.triangles);
  MountConfig mount;
  mount.intrinsics = {deg_to_rad(60.0), deg_to_rad(45.0), 8.0, 640, 480};
  const double height = 0.5 * (p.trunk_height + m.bounds.max.z);
  const auto cams = mount_cameras(orbit_path({0, 0, height}, 3.5, 3.5, height, 144), std::span(&mount, 1));
  PipelineConfig cfg;
  const CountResult a = count_pipeline(cams, m, bvh, cfg, 1);
  const CountResult b = count_pipeline(cams, m, bvh, cfg, 4);
  CHECK(a.estimated_count == a.ground_truth_visible);
  CHECK(to_jsonl(a) == to_jsonl(b));
  CHECK(landmarks_csv(a).rfind("x,y,z,track_id,cluster_id\n", 0) == 0);
  CHECK(summary_json(a) == summary_json(b));
}
