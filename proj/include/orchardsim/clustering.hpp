#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "orchardsim/geometry.hpp"

namespace orchardsim {

struct Cluster {
  std::vector<std::size_t> members;  // ascending input indices
  Vec3 centroid;
};

struct ClusterReport {
  std::vector<Cluster> clusters;  // ordered by smallest member
  std::vector<std::size_t> noise;
  std::vector<int> labels;  // per point: cluster index or -1
  std::size_t estimated_count = 0;
};

/// DBSCAN. A point is core when at least min_pts points (itself included)
/// lie within eps. Clusters are connected components of core points linked
/// at distance <= eps; each non-core point within eps of a core point joins
/// the cluster of its nearest such core point (lowest index on ties), the
/// rest is noise. Labels do not depend on input order beyond those ties.
ClusterReport dbscan(std::span<const Vec3> points, double eps, std::size_t min_pts);

}  // namespace orchardsim
