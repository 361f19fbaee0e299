#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orchardsim/config.hpp"

namespace orchardsim {

struct CommandContext {
  ExperimentConfig config;
  std::optional<std::filesystem::path> scene;  // absent: generate from config.orchard
  std::filesystem::path out_dir;
  int threads = 1;
};

/// What a command prints: a JSON summary (also written to <command>.json
/// when json output is on) and a human-readable text block.
struct CommandResult {
  nlohmann::json summary;
  std::string text;
  std::vector<std::filesystem::path> files;  // written, in write order
};

/// Every command writes config.resolved.json next to its outputs.
CommandResult cmd_generate(const CommandContext& ctx);
/// Per mount set: at its fixed height, otherwise at every height of the grid.
CommandResult cmd_visibility(const CommandContext& ctx);
/// Orchards are regenerated per sweep seed from config.orchard; --scene is ignored.
CommandResult cmd_sweep(const CommandContext& ctx);
CommandResult cmd_fly(const CommandContext& ctx);
CommandResult cmd_count(const CommandContext& ctx);
/// Collects the JSON summaries already present in out_dir.
CommandResult cmd_report(const CommandContext& ctx);

/// Scene from ctx.scene, or generated from the config.
OrchardModel load_or_generate(const CommandContext& ctx);

/// Camera stream for the count command; one camera per frame.
std::vector<CameraConfig> count_cameras(const ExperimentConfig& config, const OrchardModel& scene);

/// Default flight endpoints: ends of the straight_rows path at planner.height.
std::pair<Vec3, Vec3> flight_endpoints(const ExperimentConfig& config, const OrchardModel& scene);

}  // namespace orchardsim
