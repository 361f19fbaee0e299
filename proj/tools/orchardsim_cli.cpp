#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "orchardsim/commands.hpp"
#include "orchardsim/json_fields.hpp"
#include "orchardsim/scene_io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int fail(int code, const std::string& kind, const std::string& message, const std::string& path = "") {
  nlohmann::json err{{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!path.empty()) err["path"] = path;
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace orchardsim;

  CLI::App app{"Orchard fruit-visibility, flight and counting simulator"};
  app.require_subcommand(1);
  std::string config_path;
  std::string scene_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
  app.add_option("--config", config_path, "Experiment config (JSON); defaults apply when omitted");
  app.add_option("--scene", scene_path, "Scene file from `generate`; otherwise generated from the config");
  app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
  app.add_option("--seed-override", seed_override, "Replace the orchard, sweep, sampler and noise seeds");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));

  const std::map<std::string, std::function<CommandResult(const CommandContext&)>> commands{
      {"generate", cmd_generate}, {"visibility", cmd_visibility}, {"sweep", cmd_sweep},
      {"fly", cmd_fly},           {"count", cmd_count},           {"report", cmd_report}};
  const std::map<std::string, std::string> help{
      {"generate", "Generate an orchard scene and save it"},
      {"visibility", "Count visible fruits for each mount set along the strategy path"},
      {"sweep", "Visibility over the height grid, mount sets and seeds"},
      {"fly", "Closed-loop planner flight through the scene"},
      {"count", "Detection, tracking, triangulation and clustering fruit count"},
      {"report", "Summarise the command outputs in the output directory"}};
  for (const auto& [name, text] : help) app.add_subcommand(name, text)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfig, "usage", e.what());
  }

  CommandContext ctx;
  try {
    ctx.config = config_path.empty() ? default_config() : load_config(config_path);
    if (seed_override) apply_seed_override(ctx.config, *seed_override);
  } catch (const ConfigError& e) {
    return fail(kExitConfig, "config", e.what(), e.path());
  }
  ctx.out_dir = out_dir.empty() ? ctx.config.output.directory : out_dir;
  if (!scene_path.empty()) ctx.scene = scene_path;
  ctx.threads = threads;

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const CommandResult result = commands.at(name)(ctx);
    std::cout << result.text;
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
  } catch (const ConfigError& e) {
    return fail(kExitConfig, "config", e.what(), e.path());
  } catch (const JsonSchemaError& e) {
    return fail(kExitConfig, "config", e.what(), e.path());
  } catch (const SceneFormatError& e) {
    return fail(kExitRuntime, "scene", e.what());
  } catch (const std::exception& e) {
    return fail(kExitRuntime, "runtime", e.what());
  }
  return 0;
}
