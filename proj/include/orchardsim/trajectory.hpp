#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orchardsim/camera.hpp"
#include "orchardsim/orchard.hpp"

namespace orchardsim {

enum class MountKind { front, side_left, side_right, down, up_angled };

const char* to_string(MountKind kind);
std::optional<MountKind> parse_mount_kind(std::string_view name);

struct CameraIntrinsics {
  double hfov = deg_to_rad(90.0);
  double vfov = deg_to_rad(60.0);
  double far = 8.0;
  int image_width = 640;
  int image_height = 480;
};

/// Camera fixed to the vehicle. Base orientation by kind: front looks along
/// the heading, side mounts yaw +-90 degrees, down pitches -90 degrees,
/// up_angled starts level; the offsets are added on top.
struct MountConfig {
  MountKind mount = MountKind::front;
  double pitch_offset = 0.0;
  double yaw_offset = 0.0;
  CameraIntrinsics intrinsics;
};

struct PoseSample {
  Vec3 position;
  double yaw = 0.0;
  double time = 0.0;
};

struct PoseSequence {
  std::vector<PoseSample> samples;
  double sample_spacing = 0.5;
};

/// Nominal vehicle speed used to time-stamp path samples.
inline constexpr double kPathSpeed = 1.0;

/// Boustrophedon passes along x, stepping in y. Uses
/// max(1, ceil(extent_y / row_spacing)) passes centred on the region, so a
/// spacing at or above the extent gives one pass through the middle.
/// Consecutive passes are joined by sampled transits that already carry the
/// next pass's heading.
PoseSequence lawnmower_path(const Aabb& region, double row_spacing, double height, double sample_spacing);

/// Evenly spaced samples from `start` to `end` (both included) at `height`.
PoseSequence straight_row_path(const Vec3& start, const Vec3& end, double height, double sample_spacing);

/// `frames` samples on the ellipse centre + (radius_x cos a, radius_y sin a),
/// each heading towards the centre (pair with a front mount).
PoseSequence orbit_path(const Vec3& center, double radius_x, double radius_y, double height, int frames);

/// Pass along x at y = mid - offset (heading +x), then with sides = 2 back
/// along y = mid + offset (heading -x), each running `margin` past the region
/// ends. A side_left mount faces the region on both passes.
PoseSequence row_pass_path(const Aabb& region, double offset, double margin, double height, double sample_spacing,
                           int sides);

std::vector<CameraConfig> mount_cameras(const PoseSequence& seq, std::span<const MountConfig> mounts);

struct MountSet {
  std::string name;
  std::vector<MountConfig> mounts;
};

enum class PathPattern { lawnmower, straight_rows };

const char* to_string(PathPattern pattern);
std::optional<PathPattern> parse_path_pattern(std::string_view name);

struct SweepSpec {
  std::vector<double> heights;
  std::vector<MountSet> mount_sets;
  std::vector<std::uint64_t> seeds;
  PathPattern pattern = PathPattern::straight_rows;
  double sample_spacing = 0.5;

  void validate() const;
};

/// Path through an orchard at `height`. lawnmower: passes along the tree
/// rows, midway between rows and outside the outer rows. straight_rows: one
/// line down the centre of the gap between the first two rows (or beside a
/// single row), spanning the block lengthwise.
PoseSequence orchard_path(const OrchardLayout& layout, PathPattern pattern, double height, double sample_spacing);

struct SweepRow {
  double height = 0.0;
  std::string mounts;
  std::uint64_t seed = 0;
  std::size_t n_visible = 0;
  std::size_t total_fruits = 0;
  double fraction = 0.0;
};

struct SweepCell {
  double height = 0.0;
  std::string mounts;
  double mean_fraction = 0.0;
  double stddev_fraction = 0.0;  // sample standard deviation; 0 for a single seed
  std::size_t seeds = 0;
};

struct SweepTable {
  std::vector<SweepRow> rows;    // height-major, then mount set, then seed
  std::vector<SweepCell> cells;  // height-major, then mount set
};

SweepTable run_sweep(const SweepSpec& spec, const TreeParams& params, const OrchardLayout& layout, int threads = 1);

/// Header: height_m,mounts,seed,n_visible,total_fruits,fraction
std::string to_csv(const SweepTable& table);
nlohmann::json to_json(const SweepTable& table);

}  // namespace orchardsim
