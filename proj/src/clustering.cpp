#include "orchardsim/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace orchardsim {

namespace {

// Neighbour lists (self included) within eps. Bucketing on an eps grid; if
// eps is so small that cell indices would overflow, all pairs are scanned.
std::vector<std::vector<std::size_t>> neighbours(std::span<const Vec3> pts, double eps) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> out(n);
  constexpr double kMaxCell = 1e15;
  bool grid_ok = true;
  std::vector<std::array<std::int64_t, 3>> cell(n);
  for (std::size_t i = 0; i < n && grid_ok; ++i) {
    const double c[3] = {std::floor(pts[i].x / eps), std::floor(pts[i].y / eps), std::floor(pts[i].z / eps)};
    for (int a = 0; a < 3; ++a) {
      if (!(std::abs(c[a]) < kMaxCell)) grid_ok = false;
      cell[i][a] = grid_ok ? static_cast<std::int64_t>(c[a]) : 0;
    }
  }
  const double eps2 = eps * eps;
  auto close = [&](std::size_t i, std::size_t j) {
    const Vec3 d = pts[i] - pts[j];
    return dot(d, d) <= eps2;
  };
  if (!grid_ok) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (close(i, j)) out[i].push_back(j);
      }
    }
    return out;
  }
  std::map<std::array<std::int64_t, 3>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < n; ++i) buckets[cell[i]].push_back(i);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = buckets.find({cell[i][0] + dx, cell[i][1] + dy, cell[i][2] + dz});
          if (it == buckets.end()) continue;
          for (std::size_t j : it->second) {
            if (close(i, j)) out[i].push_back(j);
          }
        }
      }
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

}  // namespace

ClusterReport dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (min_pts < 1) throw std::invalid_argument("min_pts must be >= 1");
  const std::size_t n = points.size();
  const auto nb = neighbours(points, eps);
  std::vector<char> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = nb[i].size() >= min_pts;

  ClusterReport report;
  report.labels.assign(n, -1);
  int next_label = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || report.labels[seed] >= 0) continue;
    const int label = next_label++;
    std::deque<std::size_t> queue{seed};
    report.labels[seed] = label;
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      for (std::size_t j : nb[i]) {
        if (core[j] && report.labels[j] < 0) {
          report.labels[j] = label;
          queue.push_back(j);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = INFINITY;
    for (std::size_t j : nb[i]) {  // ascending, so the first minimum is the lowest index
      if (!core[j]) continue;
      const double d = distance(points[i], points[j]);
      if (d < best) {
        best = d;
        report.labels[i] = report.labels[j];
      }
    }
  }

  // Relabel by smallest member so labels follow point order, not seed order.
  std::vector<int> remap(static_cast<std::size_t>(next_label), -1);
  int renamed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int& l = report.labels[i];
    if (l < 0) {
      report.noise.push_back(i);
      continue;
    }
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = renamed++;
    l = remap[static_cast<std::size_t>(l)];
  }
  report.clusters.resize(static_cast<std::size_t>(renamed));
  for (std::size_t i = 0; i < n; ++i) {
    if (report.labels[i] >= 0) report.clusters[static_cast<std::size_t>(report.labels[i])].members.push_back(i);
  }
  for (Cluster& c : report.clusters) {
    Vec3 sum;
    for (std::size_t i : c.members) sum = sum + points[i];
    c.centroid = sum / static_cast<double>(c.members.size());
  }
  report.estimated_count = report.clusters.size();
  return report;
}

}  // namespace orchardsim
