#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "orchardsim/counting.hpp"
#include "orchardsim/flight.hpp"
#include "orchardsim/orchard.hpp"
#include "orchardsim/trajectory.hpp"
#include "orchardsim/visibility.hpp"

namespace orchardsim {

inline constexpr int kConfigVersion = 1;

/// Bad experiment config: unreadable JSON, schema violation or a value out
/// of range. `path()` names the offending field ("<root>" for the document).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Flight height, either absolute or relative to the scene's canopy.
struct HeightSpec {
  enum class Reference { absolute, canopy_mid, canopy_top };
  Reference reference = Reference::absolute;
  double value = 0.0;  // metres, or offset from the reference

  /// canopy_mid is halfway between trunk top and the highest triangle;
  /// canopy_top is the highest triangle.
  double resolve(const OrchardModel& scene) const;
};

struct OrchardSection {
  std::string preset = "walnut-like";
  TreeParams params;  // preset with overrides applied
  OrchardLayout layout;
  std::uint64_t seed = 1;
};

struct StrategySection {
  PathPattern pattern = PathPattern::lawnmower;
  std::vector<double> heights{2.0, 4.0, 6.0};
  double sample_spacing = 0.5;
  std::vector<std::uint64_t> seeds;  // empty: the orchard seed alone
  std::vector<MountSet> mount_sets;
  /// Parallel to mount_sets. A fixed height replaces `heights` for that set
  /// in the visibility command; sweeps always use the height grid.
  std::vector<std::optional<HeightSpec>> fixed_heights;
  VisibilityOptions visibility;

  SweepSpec sweep_spec(std::uint64_t orchard_seed) const;
};

struct PlannerSection {
  FlightConfig flight;
  /// Missing start or goal: ends of the straight_rows path at this height.
  std::optional<Vec3> start, goal;
  double height = 1.5;
};

enum class CountPathKind { orbit, row_pass, strategy };

struct CountPathSpec {
  CountPathKind kind = CountPathKind::orbit;
  HeightSpec height{HeightSpec::Reference::canopy_mid, 0.0};
  CameraIntrinsics camera{deg_to_rad(60.0), deg_to_rad(45.0), 10.0, 640, 480};
  double margin = 2.5;   // orbit: beyond the scene's half extents; row_pass: past the row ends
  int frames = 480;      // orbit
  double offset = 2.5;   // row_pass: distance from the block centre line
  double step = 0.02;    // row_pass sample spacing
  int sides = 2;         // row_pass
};

struct CountingSection {
  PipelineConfig pipeline;
  CountPathSpec path;
  std::vector<std::uint64_t> noise_seeds;  // non-empty: Monte Carlo over noise seeds
};

struct OutputSection {
  std::string directory = "out";
  bool json = true;
  bool csv = true;
  bool text = true;
};

struct ExperimentConfig {
  int version = kConfigVersion;
  OrchardSection orchard;
  StrategySection strategy;
  PlannerSection planner;
  CountingSection counting;
  OutputSection output;
};

/// Defaults for every omitted field; unknown keys anywhere are rejected.
ExperimentConfig default_config();
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved config, accepted back by parse_config.
nlohmann::json to_json(const ExperimentConfig& config);

/// Replaces the orchard, sampler and noise seeds and the sweep seed list.
void apply_seed_override(ExperimentConfig& config, std::uint64_t seed);

}  // namespace orchardsim
