#include "orchardsim/commands.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "orchardsim/bvh.hpp"
#include "orchardsim/scene_io.hpp"
#include "orchardsim/text_format.hpp"

namespace orchardsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSceneFile = "scene.orchard";

json vec_json(const Vec3& v) { return {v.x, v.y, v.z}; }

std::string percent(double fraction) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << 100.0 * fraction << '%';
  return out.str();
}

std::string fixed(double value, int digits) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << value;
  return out.str();
}

class OutputWriter {
 public:
  explicit OutputWriter(const CommandContext& ctx) : ctx_(ctx) {
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + ctx.out_dir.string() + ": " + ec.message());
    write("config.resolved.json", to_json(ctx.config).dump(2) + "\n");
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = ctx_.out_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    files.push_back(path);
  }
  void json_file(const std::string& name, const json& j) {
    if (ctx_.config.output.json) write(name, j.dump(2) + "\n");
  }
  void csv_file(const std::string& name, const std::string& content) {
    if (ctx_.config.output.csv) write(name, content);
  }
  void text_file(const std::string& name, const std::string& content) {
    if (ctx_.config.output.text) write(name, content);
  }

  CommandResult finish(const std::string& command, json summary, std::string text) {
    json_file(command + ".json", summary);
    text_file(command + ".txt", text);
    return {std::move(summary), std::move(text), std::move(files)};
  }

  std::vector<fs::path> files;

 private:
  const CommandContext& ctx_;
};

// One text line per summary; shared by each command and the report.
std::string headline(const json& s) {
  const std::string command = s.value("command", "");
  std::ostringstream out;
  if (command == "generate") {
    out << "generate: " << s["trees"].get<int>() << " trees, " << s["triangles"].get<std::size_t>() << " triangles, "
        << s["fruits"].get<std::size_t>() << " fruits (" << s["preset"].get<std::string>() << ", seed "
        << s["seed"].get<std::uint64_t>() << ")\n";
  } else if (command == "visibility") {
    for (const json& run : s["runs"]) {
      out << "visibility: " << run["mounts"].get<std::string>() << " at " << fixed(run["height_m"].get<double>(), 2)
          << " m: " << run["n_visible"].get<std::size_t>() << "/" << s["total_fruits"].get<std::size_t>()
          << " fruits visible (" << percent(run["fraction"].get<double>()) << ")\n";
    }
  } else if (command == "sweep") {
    for (const json& m : s["mount_sets"]) {
      out << "sweep: " << m["mounts"].get<std::string>() << " peaks at " << fixed(m["best_height_m"].get<double>(), 2)
          << " m (mean " << percent(m["best_mean_fraction"].get<double>()) << ", "
          << (m["interior"].get<bool>() ? "interior" : "at the grid edge") << ")\n";
    }
  } else if (command == "fly") {
    out << "fly: goal " << (s["reached"].get<bool>() ? "reached" : "not reached") << " at t = "
        << fixed(s["time"].get<double>(), 2) << " s, min clearance " << fixed(s["min_clearance"].get<double>(), 3)
        << " m (radius " << fixed(s["vehicle_radius"].get<double>(), 3) << " m), "
        << (s["contact"].get<bool>() ? "contact" : "no contact") << ", " << s["fallbacks"].get<int>()
        << " fallbacks\n";
  } else if (command == "count") {
    out << "count: estimated " << s["estimated_count"].get<std::size_t>() << ", ground truth "
        << s["ground_truth_visible"].get<std::size_t>() << " (error " << s["error"].get<double>() << ")\n";
    if (s.contains("monte_carlo")) {
      const json& mc = s["monte_carlo"];
      out << "count: " << mc["runs"].get<std::size_t>() << " noise seeds, mean error "
          << fixed(mc["mean_error"].get<double>(), 2) << ", mean |relative error| "
          << percent(mc["mean_abs_relative_error"].get<double>()) << ", error range ["
          << mc["min_error"].get<double>() << ", " << mc["max_error"].get<double>() << "]\n";
    }
  }
  return out.str();
}

MountConfig single_mount(MountKind kind, const CameraIntrinsics& intrinsics) {
  MountConfig m;
  m.mount = kind;
  m.intrinsics = intrinsics;
  return m;
}

}  // namespace

OrchardModel load_or_generate(const CommandContext& ctx) {
  if (ctx.scene) return load_orchard(*ctx.scene);
  const OrchardSection& o = ctx.config.orchard;
  return generate_orchard(o.params, o.layout, o.seed);
}

std::vector<CameraConfig> count_cameras(const ExperimentConfig& config, const OrchardModel& scene) {
  const CountPathSpec& p = config.counting.path;
  const double height = p.height.resolve(scene);
  switch (p.kind) {
    case CountPathKind::orbit: {
      const Vec3 center = (scene.bounds.min + scene.bounds.max) * 0.5;
      const double rx = 0.5 * (scene.bounds.max.x - scene.bounds.min.x) + p.margin;
      const double ry = 0.5 * (scene.bounds.max.y - scene.bounds.min.y) + p.margin;
      const MountConfig m = single_mount(MountKind::front, p.camera);
      return mount_cameras(orbit_path(center, rx, ry, height, p.frames), std::span(&m, 1));
    }
    case CountPathKind::row_pass: {
      const MountConfig m = single_mount(MountKind::side_left, p.camera);
      return mount_cameras(row_pass_path(scene.bounds, p.offset, p.margin, height, p.step, p.sides), std::span(&m, 1));
    }
    case CountPathKind::strategy: {
      const MountConfig m = single_mount(MountKind::side_left, p.camera);
      return mount_cameras(orchard_path(scene.layout, config.strategy.pattern, height, p.step), std::span(&m, 1));
    }
  }
  return {};
}

std::pair<Vec3, Vec3> flight_endpoints(const ExperimentConfig& config, const OrchardModel& scene) {
  const PoseSequence path =
      orchard_path(scene.layout, PathPattern::straight_rows, config.planner.height, config.strategy.sample_spacing);
  return {config.planner.start.value_or(path.samples.front().position),
          config.planner.goal.value_or(path.samples.back().position)};
}

CommandResult cmd_generate(const CommandContext& ctx) {
  OutputWriter out(ctx);
  const OrchardSection& o = ctx.config.orchard;
  const OrchardModel scene = generate_orchard(o.params, o.layout, o.seed);
  save_orchard(scene, ctx.out_dir / kSceneFile);
  out.files.push_back(ctx.out_dir / kSceneFile);

  std::array<std::size_t, 4> by_kind{};
  for (const Triangle& t : scene.triangles) ++by_kind[static_cast<std::size_t>(t.kind)];
  json kinds;
  for (std::size_t k = 0; k < by_kind.size(); ++k) kinds[to_string(static_cast<TriangleKind>(k))] = by_kind[k];
  const json summary{{"command", "generate"},
                     {"preset", o.preset},
                     {"seed", o.seed},
                     {"trees", o.layout.rows * o.layout.cols},
                     {"triangles", scene.triangles.size()},
                     {"triangles_by_kind", kinds},
                     {"fruits", scene.fruits.size()},
                     {"bounds", {{"min", vec_json(scene.bounds.min)}, {"max", vec_json(scene.bounds.max)}}},
                     {"scene_file", kSceneFile}};
  return out.finish("generate", summary, headline(summary));
}

CommandResult cmd_visibility(const CommandContext& ctx) {
  OutputWriter out(ctx);
  const OrchardModel scene = load_or_generate(ctx);
  const Bvh bvh(scene.triangles);
  const StrategySection& s = ctx.config.strategy;

  json runs = json::array();
  json details = json::array();
  std::ostringstream table;
  table << "mounts,height_m,cameras,n_visible,total_fruits,fraction\n";
  for (std::size_t i = 0; i < s.mount_sets.size(); ++i) {
    const MountSet& set = s.mount_sets[i];
    const std::vector<double> heights = s.fixed_heights[i] ? std::vector{s.fixed_heights[i]->resolve(scene)} : s.heights;
    for (double h : heights) {
      const std::vector<CameraConfig> cams =
          mount_cameras(orchard_path(scene.layout, s.pattern, h, s.sample_spacing), set.mounts);
      const VisibilityReport report = count_visible(cams, scene, bvh, s.visibility, ctx.threads);
      const std::string obs_file = "observations_" + std::to_string(runs.size()) + ".csv";
      out.csv_file(obs_file, to_csv(report, scene));
      runs.push_back({{"mounts", set.name},
                      {"height_m", h},
                      {"cameras", cams.size()},
                      {"n_visible", report.n_visible},
                      {"fraction", report.fraction_visible},
                      {"observations_file", obs_file}});
      details.push_back({{"mounts", set.name},
                         {"height_m", h},
                         {"report", to_json(report)},
                         {"heatmap", to_json(visibility_heatmap(report))}});
      table << set.name << ',' << format_number(h) << ',' << cams.size() << ',' << report.n_visible << ','
            << report.total_fruits << ',' << format_number(report.fraction_visible) << '\n';
    }
  }
  out.csv_file("visibility.csv", table.str());
  out.json_file("visibility_reports.json", details);
  const json summary{{"command", "visibility"}, {"total_fruits", scene.fruits.size()}, {"runs", runs}};
  return out.finish("visibility", summary, headline(summary));
}

CommandResult cmd_sweep(const CommandContext& ctx) {
  OutputWriter out(ctx);
  const SweepSpec spec = ctx.config.strategy.sweep_spec(ctx.config.orchard.seed);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("strategy", e.what());
  }
  const SweepTable table = run_sweep(spec, ctx.config.orchard.params, ctx.config.orchard.layout, ctx.threads);
  out.csv_file("sweep.csv", to_csv(table));
  out.json_file("sweep_table.json", to_json(table));

  json sets = json::array();
  for (const MountSet& set : spec.mount_sets) {
    const SweepCell* best = nullptr;
    for (const SweepCell& c : table.cells) {
      if (c.mounts == set.name && (!best || c.mean_fraction > best->mean_fraction)) best = &c;
    }
    const double lo = *std::min_element(spec.heights.begin(), spec.heights.end());
    const double hi = *std::max_element(spec.heights.begin(), spec.heights.end());
    sets.push_back({{"mounts", set.name},
                    {"best_height_m", best->height},
                    {"best_mean_fraction", best->mean_fraction},
                    {"interior", best->height != lo && best->height != hi}});
  }
  const json summary{{"command", "sweep"},
                     {"heights", spec.heights},
                     {"seeds", spec.seeds},
                     {"pattern", to_string(spec.pattern)},
                     {"mount_sets", sets}};
  return out.finish("sweep", summary, headline(summary));
}

CommandResult cmd_fly(const CommandContext& ctx) {
  OutputWriter out(ctx);
  const OrchardModel scene = load_or_generate(ctx);
  const Bvh bvh(scene.triangles);
  FlightConfig flight = ctx.config.planner.flight;
  std::tie(flight.start, flight.goal) = flight_endpoints(ctx.config, scene);
  const FlightResult result = simulate_flight(flight, bvh, ctx.threads);

  std::string trace;
  for (const PlanStepLog& step : result.trace) trace += to_json(step).dump() + "\n";
  if (ctx.config.output.json) out.write("flight_trace.jsonl", trace);
  std::ostringstream samples;
  samples << "time,x,y,z,clearance\n";
  for (const FlightSample& s : result.samples) {
    samples << format_number(s.time) << ',' << format_number(s.position.x) << ',' << format_number(s.position.y)
            << ',' << format_number(s.position.z) << ',' << format_number(s.clearance) << '\n';
  }
  out.csv_file("flight_samples.csv", samples.str());

  json summary = to_json(result, flight);
  summary["command"] = "fly";
  summary["start"] = vec_json(flight.start);
  return out.finish("fly", summary, headline(summary));
}

CommandResult cmd_count(const CommandContext& ctx) {
  OutputWriter out(ctx);
  const OrchardModel scene = load_or_generate(ctx);
  const Bvh bvh(scene.triangles);
  const std::vector<CameraConfig> cams = count_cameras(ctx.config, scene);
  const PipelineConfig& pipeline = ctx.config.counting.pipeline;
  const CountResult r = count_pipeline(cams, scene, bvh, pipeline, ctx.threads);

  if (ctx.config.output.json) out.write("count.jsonl", to_jsonl(r));
  out.csv_file("landmarks.csv", landmarks_csv(r));

  json summary = summary_json(r);
  summary["command"] = "count";
  const CountPathKind kind = ctx.config.counting.path.kind;
  summary["path"] = {{"kind", kind == CountPathKind::orbit      ? "orbit"
                              : kind == CountPathKind::row_pass ? "row_pass"
                                                                : "strategy"},
                     {"frames", cams.size()}};

  const std::vector<std::uint64_t>& seeds = ctx.config.counting.noise_seeds;
  if (!seeds.empty()) {
    std::ostringstream csv;
    csv << "noise_seed,estimated_count,ground_truth_visible,error,relative_error\n";
    json runs = json::array();
    double sum = 0.0, sum_abs_rel = 0.0, lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      PipelineConfig cfg = pipeline;
      cfg.noise.seed = seeds[i];
      const CountResult mc = count_pipeline(cams, scene, bvh, cfg, ctx.threads);
      const double error = static_cast<double>(mc.estimated_count) - static_cast<double>(mc.ground_truth_visible);
      const double rel = mc.ground_truth_visible > 0 ? error / static_cast<double>(mc.ground_truth_visible) : 0.0;
      sum += error;
      sum_abs_rel += std::abs(rel);
      lo = i == 0 ? error : std::min(lo, error);
      hi = i == 0 ? error : std::max(hi, error);
      runs.push_back({{"noise_seed", seeds[i]},
                      {"estimated_count", mc.estimated_count},
                      {"ground_truth_visible", mc.ground_truth_visible},
                      {"error", error}});
      csv << seeds[i] << ',' << mc.estimated_count << ',' << mc.ground_truth_visible << ',' << format_number(error)
          << ',' << format_number(rel) << '\n';
    }
    const double n = static_cast<double>(seeds.size());
    double var = 0.0;
    for (const json& run : runs) var += std::pow(run["error"].get<double>() - sum / n, 2);
    summary["monte_carlo"] = {{"runs", seeds.size()},
                              {"mean_error", sum / n},
                              {"stddev_error", seeds.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0},
                              {"mean_abs_relative_error", sum_abs_rel / n},
                              {"min_error", lo},
                              {"max_error", hi},
                              {"per_seed", runs}};
    out.csv_file("count_monte_carlo.csv", csv.str());
  }
  return out.finish("count", summary, headline(summary));
}

CommandResult cmd_report(const CommandContext& ctx) {
  OutputWriter out(ctx);
  json sections = json::object();
  std::string text;
  for (const char* command : {"generate", "visibility", "sweep", "fly", "count"}) {
    const fs::path path = ctx.out_dir / (std::string(command) + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) continue;
    json s;
    try {
      s = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
    }
    text += headline(s);
    sections[command] = std::move(s);
  }
  if (sections.empty()) text = "report: no command summaries in " + ctx.out_dir.string() + "\n";
  const json summary{{"command", "report"}, {"sections", sections}};
  return out.finish("report", summary, text);
}

}  // namespace orchardsim
