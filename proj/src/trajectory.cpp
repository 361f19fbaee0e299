#include "orchardsim/trajectory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "orchardsim/bvh.hpp"
#include "orchardsim/parallel.hpp"
#include "orchardsim/text_format.hpp"
#include "orchardsim/visibility.hpp"

namespace orchardsim {

namespace {

// Slack so an exact multiple of the spacing does not add a step.
constexpr double kStepSlack = 1e-9;

int steps_for(double length, double spacing) {
  return std::max(1, static_cast<int>(std::ceil(length / spacing - kStepSlack)));
}

void append_sample(PoseSequence& seq, const Vec3& position, double yaw) {
  double time = 0.0;
  if (!seq.samples.empty()) {
    const PoseSample& last = seq.samples.back();
    time = last.time + distance(last.position, position) / kPathSpeed;
  }
  seq.samples.push_back({position, yaw, time});
}

}  // namespace

const char* to_string(MountKind kind) {
  switch (kind) {
    case MountKind::front: return "front";
    case MountKind::side_left: return "side_left";
    case MountKind::side_right: return "side_right";
    case MountKind::down: return "down";
    case MountKind::up_angled: return "up_angled";
  }
  return "unknown";
}

std::optional<MountKind> parse_mount_kind(std::string_view name) {
  for (MountKind k : {MountKind::front, MountKind::side_left, MountKind::side_right, MountKind::down,
                      MountKind::up_angled}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

const char* to_string(PathPattern pattern) {
  return pattern == PathPattern::lawnmower ? "lawnmower" : "straight_rows";
}

std::optional<PathPattern> parse_path_pattern(std::string_view name) {
  if (name == "lawnmower") return PathPattern::lawnmower;
  if (name == "straight_rows") return PathPattern::straight_rows;
  return std::nullopt;
}

PoseSequence lawnmower_path(const Aabb& region, double row_spacing, double height, double sample_spacing) {
  const Vec3 extent = region.extent();
  if (!(extent.x > 0.0 && extent.y > 0.0)) throw std::invalid_argument("lawnmower region must have positive x/y extent");
  if (!(row_spacing > 0.0 && sample_spacing > 0.0)) throw std::invalid_argument("spacings must be positive");

  const int passes = steps_for(extent.y, row_spacing);
  const double y_mid = 0.5 * (region.min.y + region.max.y);
  const int along = steps_for(extent.x, sample_spacing);

  PoseSequence seq;
  seq.sample_spacing = sample_spacing;
  for (int k = 0; k < passes; ++k) {
    const double y = y_mid + (k - 0.5 * (passes - 1)) * row_spacing;
    const bool forward = k % 2 == 0;
    const double yaw = forward ? 0.0 : kPi;
    const double x0 = forward ? region.min.x : region.max.x;
    const double x1 = forward ? region.max.x : region.min.x;
    if (k > 0) {
      // Transit from the previous pass end, already facing the new pass.
      const Vec3 from = seq.samples.back().position;
      const Vec3 to{x0, y, height};
      const int steps = steps_for(distance(from, to), sample_spacing);
      for (int s = 1; s < steps; ++s) append_sample(seq, from + (to - from) * (static_cast<double>(s) / steps), yaw);
    }
    for (int s = 0; s <= along; ++s) {
      const double x = s == along ? x1 : x0 + (x1 - x0) * (static_cast<double>(s) / along);
      append_sample(seq, {x, y, height}, yaw);
    }
  }
  return seq;
}

PoseSequence straight_row_path(const Vec3& start, const Vec3& end, double height, double sample_spacing) {
  const Vec3 a{start.x, start.y, height};
  const Vec3 b{end.x, end.y, height};
  const double length = distance(a, b);
  if (!(length > 0.0)) throw std::invalid_argument("straight row path needs a line of positive length");
  if (!(sample_spacing > 0.0)) throw std::invalid_argument("sample spacing must be positive");
  const double yaw = std::atan2(b.y - a.y, b.x - a.x);
  const int steps = steps_for(length, sample_spacing);
  PoseSequence seq;
  seq.sample_spacing = sample_spacing;
  for (int s = 0; s <= steps; ++s) {
    append_sample(seq, s == steps ? b : a + (b - a) * (static_cast<double>(s) / steps), yaw);
  }
  return seq;
}

PoseSequence orbit_path(const Vec3& center, double radius_x, double radius_y, double height, int frames) {
  if (!(radius_x > 0.0 && radius_y > 0.0)) throw std::invalid_argument("orbit radii must be positive");
  if (frames < 2) throw std::invalid_argument("orbit needs at least 2 frames");
  PoseSequence seq;
  for (int k = 0; k < frames; ++k) {
    const double a = 2.0 * kPi * k / frames;
    const Vec3 p{center.x + radius_x * std::cos(a), center.y + radius_y * std::sin(a), height};
    append_sample(seq, p, std::atan2(center.y - p.y, center.x - p.x));
  }
  seq.sample_spacing = distance(seq.samples[0].position, seq.samples[1].position);
  return seq;
}

PoseSequence row_pass_path(const Aabb& region, double offset, double margin, double height, double sample_spacing,
                           int sides) {
  if (sides != 1 && sides != 2) throw std::invalid_argument("row pass sides must be 1 or 2");
  if (!(offset >= 0.0 && margin >= 0.0)) throw std::invalid_argument("row pass offset and margin must be >= 0");
  const double y_mid = 0.5 * (region.min.y + region.max.y);
  const double x0 = region.min.x - margin;
  const double x1 = region.max.x + margin;
  PoseSequence seq = straight_row_path({x0, y_mid - offset, height}, {x1, y_mid - offset, height}, height, sample_spacing);
  if (sides == 2) {
    const PoseSequence back =
        straight_row_path({x1, y_mid + offset, height}, {x0, y_mid + offset, height}, height, sample_spacing);
    for (const PoseSample& s : back.samples) append_sample(seq, s.position, s.yaw);
  }
  return seq;
}

std::vector<CameraConfig> mount_cameras(const PoseSequence& seq, std::span<const MountConfig> mounts) {
  std::vector<CameraConfig> cams;
  cams.reserve(seq.samples.size() * mounts.size());
  for (const PoseSample& sample : seq.samples) {
    for (const MountConfig& m : mounts) {
      double yaw = sample.yaw + m.yaw_offset;
      double pitch = m.pitch_offset;
      switch (m.mount) {
        case MountKind::side_left: yaw += kPi / 2; break;
        case MountKind::side_right: yaw -= kPi / 2; break;
        case MountKind::down: pitch -= kPi / 2; break;
        case MountKind::front:
        case MountKind::up_angled: break;
      }
      CameraConfig cam;
      cam.pose = {sample.position, Rotation::from_yaw_pitch(yaw, pitch)};
      cam.hfov = m.intrinsics.hfov;
      cam.vfov = m.intrinsics.vfov;
      cam.far = m.intrinsics.far;
      cam.image_width = m.intrinsics.image_width;
      cam.image_height = m.intrinsics.image_height;
      cams.push_back(cam);
    }
  }
  return cams;
}

void SweepSpec::validate() const {
  if (heights.empty() || mount_sets.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep needs at least one height, mount set and seed");
  }
  for (const MountSet& set : mount_sets) {
    if (set.mounts.empty()) throw std::invalid_argument("mount set '" + set.name + "' is empty");
  }
  if (!(sample_spacing > 0.0)) throw std::invalid_argument("sample spacing must be positive");
}

PoseSequence orchard_path(const OrchardLayout& layout, PathPattern pattern, double height, double sample_spacing) {
  const double x0 = -0.5 * layout.tree_spacing;
  const double x1 = (layout.cols - 1) * layout.tree_spacing + 0.5 * layout.tree_spacing;
  if (pattern == PathPattern::straight_rows) {
    const double y = 0.5 * layout.row_spacing;
    return straight_row_path({x0, y, height}, {x1, y, height}, height, sample_spacing);
  }
  Aabb region;
  region.expand(Vec3{x0, -layout.row_spacing, height});
  region.expand(Vec3{x1, layout.rows * layout.row_spacing, height});
  return lawnmower_path(region, layout.row_spacing, height, sample_spacing);
}

SweepTable run_sweep(const SweepSpec& spec, const TreeParams& params, const OrchardLayout& layout, int threads) {
  spec.validate();
  const std::size_t n_heights = spec.heights.size();
  const std::size_t n_sets = spec.mount_sets.size();
  const std::size_t n_seeds = spec.seeds.size();

  // Paths and camera lists depend only on (height, mount set).
  std::vector<std::vector<CameraConfig>> cameras(n_heights * n_sets);
  for (std::size_t h = 0; h < n_heights; ++h) {
    const PoseSequence path = orchard_path(layout, spec.pattern, spec.heights[h], spec.sample_spacing);
    for (std::size_t m = 0; m < n_sets; ++m) cameras[h * n_sets + m] = mount_cameras(path, spec.mount_sets[m].mounts);
  }

  std::vector<SweepRow> rows(n_heights * n_sets * n_seeds);
  parallel_for(n_seeds, threads, [&](std::size_t s) {
    const OrchardModel orchard = generate_orchard(params, layout, spec.seeds[s]);
    const Bvh bvh(orchard.triangles);
    for (std::size_t h = 0; h < n_heights; ++h) {
      for (std::size_t m = 0; m < n_sets; ++m) {
        const VisibilityReport report = count_visible(cameras[h * n_sets + m], orchard, bvh);
        rows[(h * n_sets + m) * n_seeds + s] = {spec.heights[h], spec.mount_sets[m].name, spec.seeds[s],
                                                report.n_visible, report.total_fruits, report.fraction_visible};
      }
    }
  });

  SweepTable table;
  table.rows = std::move(rows);
  for (std::size_t h = 0; h < n_heights; ++h) {
    for (std::size_t m = 0; m < n_sets; ++m) {
      SweepCell cell{spec.heights[h], spec.mount_sets[m].name, 0.0, 0.0, n_seeds};
      double sum = 0.0;
      for (std::size_t s = 0; s < n_seeds; ++s) sum += table.rows[(h * n_sets + m) * n_seeds + s].fraction;
      cell.mean_fraction = sum / n_seeds;
      if (n_seeds > 1) {
        double ss = 0.0;
        for (std::size_t s = 0; s < n_seeds; ++s) {
          const double d = table.rows[(h * n_sets + m) * n_seeds + s].fraction - cell.mean_fraction;
          ss += d * d;
        }
        cell.stddev_fraction = std::sqrt(ss / (n_seeds - 1));
      }
      table.cells.push_back(cell);
    }
  }
  return table;
}

std::string to_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "height_m,mounts,seed,n_visible,total_fruits,fraction\n";
  for (const SweepRow& r : table.rows) {
    out << format_number(r.height) << ',' << r.mounts << ',' << r.seed << ',' << r.n_visible << ','
        << r.total_fruits << ',' << format_number(r.fraction) << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const SweepTable& table) {
  nlohmann::json j;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const SweepRow& r : table.rows) {
    rows.push_back({{"height_m", r.height},
                    {"mounts", r.mounts},
                    {"seed", r.seed},
                    {"n_visible", r.n_visible},
                    {"total_fruits", r.total_fruits},
                    {"fraction", r.fraction}});
  }
  auto& cells = j["summary"] = nlohmann::json::array();
  for (const SweepCell& c : table.cells) {
    cells.push_back({{"height_m", c.height},
                     {"mounts", c.mounts},
                     {"mean_fraction", c.mean_fraction},
                     {"stddev_fraction", c.stddev_fraction},
                     {"seeds", c.seeds}});
  }
  return j;
}

}  // namespace orchardsim
