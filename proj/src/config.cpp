#include "orchardsim/config.hpp"

#include <fstream>
#include <sstream>

#include "orchardsim/json_fields.hpp"

namespace orchardsim {

using nlohmann::json;
using namespace json_fields;

namespace {

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Runs a validate() call, reporting its message against `path`.
template <class Fn>
void checked(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

const json* find(const json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

Vec3 vec3_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
    throw ConfigError(path, "expected [x, y, z]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Vec3& v) { return {v.x, v.y, v.z}; }

std::vector<double> numbers_from(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

std::vector<std::uint64_t> seeds_from(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of seeds");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_unsigned()) {
      throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a non-negative integer");
    }
    out.push_back(j[i].get<std::uint64_t>());
  }
  return out;
}

CameraIntrinsics intrinsics_from(const json& j, const CameraIntrinsics& base, const std::string& path) {
  check_keys(j, {"hfov_deg", "vfov_deg", "far", "image_width", "image_height"}, path);
  CameraIntrinsics c = base;
  c.hfov = deg_to_rad(get_number(j, "hfov_deg", path, rad_to_deg(c.hfov)));
  c.vfov = deg_to_rad(get_number(j, "vfov_deg", path, rad_to_deg(c.vfov)));
  c.far = get_number(j, "far", path, c.far);
  c.image_width = static_cast<int>(get_integer(j, "image_width", path, c.image_width));
  c.image_height = static_cast<int>(get_integer(j, "image_height", path, c.image_height));
  checked(path, [&] {
    CameraConfig cam;
    cam.hfov = c.hfov;
    cam.vfov = c.vfov;
    cam.far = c.far;
    cam.image_width = c.image_width;
    cam.image_height = c.image_height;
    cam.validate();
  });
  return c;
}

json to_json(const CameraIntrinsics& c) {
  return {{"hfov_deg", rad_to_deg(c.hfov)},
          {"vfov_deg", rad_to_deg(c.vfov)},
          {"far", c.far},
          {"image_width", c.image_width},
          {"image_height", c.image_height}};
}

HeightSpec height_from(const json& j, const std::string& path) {
  if (j.is_number()) return {HeightSpec::Reference::absolute, j.get<double>()};
  check_keys(j, {"relative_to", "offset"}, path);
  const std::string ref = get_string(j, "relative_to", path);
  HeightSpec h;
  if (ref == "canopy_mid") {
    h.reference = HeightSpec::Reference::canopy_mid;
  } else if (ref == "canopy_top") {
    h.reference = HeightSpec::Reference::canopy_top;
  } else {
    throw ConfigError(child(path, "relative_to"), "expected \"canopy_mid\" or \"canopy_top\"");
  }
  h.value = get_number(j, "offset", path, 0.0);
  return h;
}

json to_json(const HeightSpec& h) {
  switch (h.reference) {
    case HeightSpec::Reference::absolute: return h.value;
    case HeightSpec::Reference::canopy_mid: return {{"relative_to", "canopy_mid"}, {"offset", h.value}};
    case HeightSpec::Reference::canopy_top: return {{"relative_to", "canopy_top"}, {"offset", h.value}};
  }
  return h.value;
}

MountConfig mount_from(const json& j, const CameraIntrinsics& intrinsics, const std::string& path) {
  check_keys(j, {"kind", "pitch_offset_deg", "yaw_offset_deg", "intrinsics"}, path);
  MountConfig m;
  const auto kind = parse_mount_kind(get_string(j, "kind", path));
  if (!kind) throw ConfigError(child(path, "kind"), "unknown mount kind");
  m.mount = *kind;
  m.pitch_offset = deg_to_rad(get_number(j, "pitch_offset_deg", path, 0.0));
  m.yaw_offset = deg_to_rad(get_number(j, "yaw_offset_deg", path, 0.0));
  m.intrinsics = intrinsics;
  if (const json* v = find(j, "intrinsics")) m.intrinsics = intrinsics_from(*v, intrinsics, child(path, "intrinsics"));
  return m;
}

json to_json(const MountConfig& m) {
  return {{"kind", to_string(m.mount)},
          {"pitch_offset_deg", rad_to_deg(m.pitch_offset)},
          {"yaw_offset_deg", rad_to_deg(m.yaw_offset)},
          {"intrinsics", to_json(m.intrinsics)}};
}

std::vector<MountSet> default_mount_sets(const CameraIntrinsics& intrinsics) {
  MountConfig left{MountKind::side_left, 0.0, 0.0, intrinsics};
  MountConfig right{MountKind::side_right, 0.0, 0.0, intrinsics};
  MountConfig front{MountKind::front, 0.0, 0.0, intrinsics};
  return {{"dual_side", {left, right}}, {"front", {front}}};
}

OrchardSection orchard_from(const json& j, const std::string& path) {
  check_keys(j, {"preset", "params", "layout", "seed"}, path);
  OrchardSection o;
  if (find(j, "preset")) o.preset = get_string(j, "preset", path);
  const auto preset = tree_preset(o.preset);
  if (!preset) throw ConfigError(child(path, "preset"), "unknown preset \"" + o.preset + "\"");
  o.params = *preset;
  if (const json* v = find(j, "params")) {
    o.params = tree_params_from_json(*v, o.params, AngleUnit::degrees, child(path, "params"));
  }
  checked(child(path, "params"), [&] { o.params.validate(); });
  if (const json* v = find(j, "layout")) o.layout = layout_from_json(*v, o.layout, child(path, "layout"));
  checked(child(path, "layout"), [&] { o.layout.validate(); });
  if (find(j, "seed")) o.seed = get_u64(j, "seed", path);
  return o;
}

StrategySection strategy_from(const json& j, const std::string& path) {
  check_keys(j, {"pattern", "heights", "sample_spacing", "seeds", "intrinsics", "mount_sets", "fruits_occlude"}, path);
  StrategySection s;
  if (find(j, "pattern")) {
    const auto p = parse_path_pattern(get_string(j, "pattern", path));
    if (!p) throw ConfigError(child(path, "pattern"), "expected \"lawnmower\" or \"straight_rows\"");
    s.pattern = *p;
  }
  if (const json* v = find(j, "heights")) s.heights = numbers_from(*v, child(path, "heights"));
  s.sample_spacing = get_number(j, "sample_spacing", path, s.sample_spacing);
  if (const json* v = find(j, "seeds")) s.seeds = seeds_from(*v, child(path, "seeds"));
  CameraIntrinsics intrinsics;
  if (const json* v = find(j, "intrinsics")) intrinsics = intrinsics_from(*v, intrinsics, child(path, "intrinsics"));
  if (const json* v = find(j, "mount_sets")) {
    const std::string sets_path = child(path, "mount_sets");
    if (!v->is_array()) throw ConfigError(sets_path, "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string set_path = sets_path + "[" + std::to_string(i) + "]";
      const json& sj = (*v)[i];
      check_keys(sj, {"name", "mounts", "height"}, set_path);
      MountSet set;
      set.name = get_string(sj, "name", set_path);
      const json* mounts = find(sj, "mounts");
      if (!mounts || !mounts->is_array()) throw ConfigError(child(set_path, "mounts"), "expected an array");
      for (std::size_t m = 0; m < mounts->size(); ++m) {
        set.mounts.push_back(mount_from((*mounts)[m], intrinsics, child(set_path, "mounts") + "[" + std::to_string(m) + "]"));
      }
      s.mount_sets.push_back(std::move(set));
      const json* h = find(sj, "height");
      s.fixed_heights.push_back(h ? std::optional(height_from(*h, child(set_path, "height"))) : std::nullopt);
    }
  } else {
    s.mount_sets = default_mount_sets(intrinsics);
    s.fixed_heights.assign(s.mount_sets.size(), std::nullopt);
  }
  s.visibility.fruits_occlude = get_bool(j, "fruits_occlude", path, false);
  if (s.heights.empty()) throw ConfigError(child(path, "heights"), "need at least one height");
  if (!(s.sample_spacing > 0.0)) throw ConfigError(child(path, "sample_spacing"), "must be positive");
  if (s.mount_sets.empty()) throw ConfigError(child(path, "mount_sets"), "need at least one mount set");
  return s;
}

PlannerSection planner_from(const json& j, const std::string& path) {
  check_keys(j,
             {"limits", "sampler", "camera", "replan_period", "sim_dt", "max_time", "goal_tolerance",
              "start_clear_radius", "start", "goal", "height"},
             path);
  PlannerSection p;
  FlightConfig& f = p.flight;
  if (const json* v = find(j, "limits")) {
    const std::string lp = child(path, "limits");
    check_keys(*v, {"v_max", "a_max", "radius"}, lp);
    f.limits.v_max = get_number(*v, "v_max", lp, f.limits.v_max);
    f.limits.a_max = get_number(*v, "a_max", lp, f.limits.a_max);
    f.limits.radius = get_number(*v, "radius", lp, f.limits.radius);
  }
  if (const json* v = find(j, "sampler")) {
    const std::string sp = child(path, "sampler");
    check_keys(*v,
               {"candidates", "min_duration", "max_duration", "cone_half_angle_deg", "max_step", "cost_lambda",
                "check_dt", "pyramid_history", "seed"},
               sp);
    SamplerConfig& s = f.sampler;
    s.candidates = static_cast<int>(get_integer(*v, "candidates", sp, s.candidates));
    s.min_duration = get_number(*v, "min_duration", sp, s.min_duration);
    s.max_duration = get_number(*v, "max_duration", sp, s.max_duration);
    s.cone_half_angle = deg_to_rad(get_number(*v, "cone_half_angle_deg", sp, rad_to_deg(s.cone_half_angle)));
    s.max_step = get_number(*v, "max_step", sp, s.max_step);
    s.cost_lambda = get_number(*v, "cost_lambda", sp, s.cost_lambda);
    s.check_dt = get_number(*v, "check_dt", sp, s.check_dt);
    s.pyramid_history = static_cast<int>(get_integer(*v, "pyramid_history", sp, s.pyramid_history));
    if (find(*v, "seed")) s.seed = get_u64(*v, "seed", sp);
  }
  if (const json* v = find(j, "camera")) f.camera = intrinsics_from(*v, f.camera, child(path, "camera"));
  f.replan_period = get_number(j, "replan_period", path, f.replan_period);
  f.sim_dt = get_number(j, "sim_dt", path, f.sim_dt);
  f.max_time = get_number(j, "max_time", path, f.max_time);
  f.goal_tolerance = get_number(j, "goal_tolerance", path, f.goal_tolerance);
  f.start_clear_radius = get_number(j, "start_clear_radius", path, f.start_clear_radius);
  if (const json* v = find(j, "start")) p.start = vec3_from(*v, child(path, "start"));
  if (const json* v = find(j, "goal")) p.goal = vec3_from(*v, child(path, "goal"));
  p.height = get_number(j, "height", path, p.height);
  checked(path, [&] { f.validate(); });
  return p;
}

CountingSection counting_from(const json& j, const std::string& path) {
  check_keys(j, {"path", "noise", "tracker", "triangulation", "cluster", "noise_seeds"}, path);
  CountingSection c;
  PipelineConfig& pc = c.pipeline;
  if (const json* v = find(j, "path")) {
    const std::string pp = child(path, "path");
    check_keys(*v, {"kind", "height", "camera", "margin", "frames", "offset", "step", "sides"}, pp);
    CountPathSpec& s = c.path;
    if (find(*v, "kind")) {
      const std::string kind = get_string(*v, "kind", pp);
      if (kind == "orbit") {
        s.kind = CountPathKind::orbit;
      } else if (kind == "row_pass") {
        s.kind = CountPathKind::row_pass;
      } else if (kind == "strategy") {
        s.kind = CountPathKind::strategy;
      } else {
        throw ConfigError(child(pp, "kind"), "expected \"orbit\", \"row_pass\" or \"strategy\"");
      }
    }
    if (const json* h = find(*v, "height")) s.height = height_from(*h, child(pp, "height"));
    if (const json* cam = find(*v, "camera")) s.camera = intrinsics_from(*cam, s.camera, child(pp, "camera"));
    s.margin = get_number(*v, "margin", pp, s.margin);
    s.frames = static_cast<int>(get_integer(*v, "frames", pp, s.frames));
    s.offset = get_number(*v, "offset", pp, s.offset);
    s.step = get_number(*v, "step", pp, s.step);
    s.sides = static_cast<int>(get_integer(*v, "sides", pp, s.sides));
    if (s.margin < 0.0) throw ConfigError(child(pp, "margin"), "must be >= 0");
    if (s.frames < 2) throw ConfigError(child(pp, "frames"), "must be >= 2");
    if (s.offset < 0.0) throw ConfigError(child(pp, "offset"), "must be >= 0");
    if (!(s.step > 0.0)) throw ConfigError(child(pp, "step"), "must be positive");
    if (s.sides != 1 && s.sides != 2) throw ConfigError(child(pp, "sides"), "must be 1 or 2");
  }
  if (const json* v = find(j, "noise")) {
    const std::string np = child(path, "noise");
    check_keys(*v, {"jitter_px", "p_miss", "fp_rate", "conf_true_min", "conf_fp_max", "fp_size_px", "seed"}, np);
    NoiseModel& n = pc.noise;
    n.jitter_px = get_number(*v, "jitter_px", np, n.jitter_px);
    n.p_miss = get_number(*v, "p_miss", np, n.p_miss);
    n.fp_rate = get_number(*v, "fp_rate", np, n.fp_rate);
    n.conf_true_min = get_number(*v, "conf_true_min", np, n.conf_true_min);
    n.conf_fp_max = get_number(*v, "conf_fp_max", np, n.conf_fp_max);
    if (const json* r = find(*v, "fp_size_px")) {
      const auto xs = numbers_from(*r, child(np, "fp_size_px"));
      if (xs.size() != 2) throw ConfigError(child(np, "fp_size_px"), "expected [min, max]");
      n.fp_size_px = {xs[0], xs[1]};
    }
    if (find(*v, "seed")) n.seed = get_u64(*v, "seed", np);
    checked(np, [&] { n.validate(); });
  }
  if (const json* v = find(j, "tracker")) {
    const std::string tp = child(path, "tracker");
    check_keys(*v, {"tau_high", "tau_low", "iou_min", "max_age", "gain", "two_stage"}, tp);
    TrackerConfig& t = pc.tracker;
    t.tau_high = get_number(*v, "tau_high", tp, t.tau_high);
    t.tau_low = get_number(*v, "tau_low", tp, t.tau_low);
    t.iou_min = get_number(*v, "iou_min", tp, t.iou_min);
    t.max_age = static_cast<int>(get_integer(*v, "max_age", tp, t.max_age));
    t.gain = get_number(*v, "gain", tp, t.gain);
    t.two_stage = get_bool(*v, "two_stage", tp, t.two_stage);
    checked(tp, [&] { t.validate(); });
  }
  if (const json* v = find(j, "triangulation")) {
    const std::string tp = child(path, "triangulation");
    check_keys(*v,
               {"max_reprojection_px", "min_parallax_deg", "min_baseline", "min_views", "noise_scaled_gate",
                "max_sigma_fraction"},
               tp);
    TriangulationConfig& t = pc.triangulation;
    t.max_reprojection_px = get_number(*v, "max_reprojection_px", tp, t.max_reprojection_px);
    t.min_parallax = deg_to_rad(get_number(*v, "min_parallax_deg", tp, rad_to_deg(t.min_parallax)));
    t.min_baseline = get_number(*v, "min_baseline", tp, t.min_baseline);
    t.min_views = static_cast<int>(get_integer(*v, "min_views", tp, t.min_views));
    pc.noise_scaled_gate = get_bool(*v, "noise_scaled_gate", tp, pc.noise_scaled_gate);
    pc.max_sigma_fraction = get_number(*v, "max_sigma_fraction", tp, pc.max_sigma_fraction);
    checked(tp, [&] { t.validate(); });
    if (!(pc.max_sigma_fraction > 0.0)) throw ConfigError(child(tp, "max_sigma_fraction"), "must be positive");
  }
  if (const json* v = find(j, "cluster")) {
    const std::string cp = child(path, "cluster");
    check_keys(*v, {"eps", "min_pts"}, cp);
    if (find(*v, "eps")) {
      pc.cluster.eps = get_number(*v, "eps", cp);
      if (!(*pc.cluster.eps > 0.0)) throw ConfigError(child(cp, "eps"), "must be positive");
    }
    const long long min_pts = get_integer(*v, "min_pts", cp, static_cast<long long>(pc.cluster.min_pts));
    if (min_pts < 1) throw ConfigError(child(cp, "min_pts"), "must be >= 1");
    pc.cluster.min_pts = static_cast<std::size_t>(min_pts);
  }
  if (const json* v = find(j, "noise_seeds")) c.noise_seeds = seeds_from(*v, child(path, "noise_seeds"));
  return c;
}

OutputSection output_from(const json& j, const std::string& path) {
  check_keys(j, {"directory", "formats"}, path);
  OutputSection o;
  if (find(j, "directory")) o.directory = get_string(j, "directory", path);
  if (const json* v = find(j, "formats")) {
    const std::string fp = child(path, "formats");
    if (!v->is_array()) throw ConfigError(fp, "expected an array of \"json\", \"csv\", \"text\"");
    o.json = o.csv = o.text = false;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& f = (*v)[i];
      const std::string ip = fp + "[" + std::to_string(i) + "]";
      if (!f.is_string()) throw ConfigError(ip, "expected a string");
      const std::string name = f.get<std::string>();
      if (name == "json") {
        o.json = true;
      } else if (name == "csv") {
        o.csv = true;
      } else if (name == "text") {
        o.text = true;
      } else {
        throw ConfigError(ip, "unknown format \"" + name + "\"");
      }
    }
  }
  return o;
}

}  // namespace

double HeightSpec::resolve(const OrchardModel& scene) const {
  switch (reference) {
    case Reference::absolute: return value;
    case Reference::canopy_mid: return 0.5 * (scene.params.trunk_height + scene.bounds.max.z) + value;
    case Reference::canopy_top: return scene.bounds.max.z + value;
  }
  return value;
}

SweepSpec StrategySection::sweep_spec(std::uint64_t orchard_seed) const {
  SweepSpec spec;
  spec.heights = heights;
  spec.mount_sets = mount_sets;
  spec.seeds = seeds.empty() ? std::vector<std::uint64_t>{orchard_seed} : seeds;
  spec.pattern = pattern;
  spec.sample_spacing = sample_spacing;
  return spec;
}

ExperimentConfig default_config() { return parse_config(json{{"version", kConfigVersion}}); }

ExperimentConfig parse_config(const json& j) {
  try {
    check_keys(j, {"version", "orchard", "strategy", "planner", "counting", "output"}, "");
    ExperimentConfig c;
    c.version = static_cast<int>(get_integer(j, "version", ""));
    if (c.version != kConfigVersion) {
      throw ConfigError("version", "unsupported config version " + std::to_string(c.version));
    }
    c.orchard = orchard_from(j.value("orchard", json::object()), "orchard");
    c.strategy = strategy_from(j.value("strategy", json::object()), "strategy");
    c.planner = planner_from(j.value("planner", json::object()), "planner");
    c.counting = counting_from(j.value("counting", json::object()), "counting");
    c.output = output_from(j.value("output", json::object()), "output");
    return c;
  } catch (const JsonSchemaError& e) {
    throw ConfigError(e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<root>", "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  json j;
  try {
    j = json::parse(text.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json sets = json::array();
  for (std::size_t i = 0; i < c.strategy.mount_sets.size(); ++i) {
    json mounts = json::array();
    for (const MountConfig& m : c.strategy.mount_sets[i].mounts) mounts.push_back(to_json(m));
    json set{{"name", c.strategy.mount_sets[i].name}, {"mounts", mounts}};
    if (c.strategy.fixed_heights[i]) set["height"] = to_json(*c.strategy.fixed_heights[i]);
    sets.push_back(set);
  }
  const FlightConfig& f = c.planner.flight;
  json planner{{"limits", {{"v_max", f.limits.v_max}, {"a_max", f.limits.a_max}, {"radius", f.limits.radius}}},
               {"sampler",
                {{"candidates", f.sampler.candidates},
                 {"min_duration", f.sampler.min_duration},
                 {"max_duration", f.sampler.max_duration},
                 {"cone_half_angle_deg", rad_to_deg(f.sampler.cone_half_angle)},
                 {"max_step", f.sampler.max_step},
                 {"cost_lambda", f.sampler.cost_lambda},
                 {"check_dt", f.sampler.check_dt},
                 {"pyramid_history", f.sampler.pyramid_history},
                 {"seed", f.sampler.seed}}},
               {"camera", to_json(f.camera)},
               {"replan_period", f.replan_period},
               {"sim_dt", f.sim_dt},
               {"max_time", f.max_time},
               {"goal_tolerance", f.goal_tolerance},
               {"start_clear_radius", f.start_clear_radius},
               {"height", c.planner.height}};
  if (c.planner.start) planner["start"] = to_json(*c.planner.start);
  if (c.planner.goal) planner["goal"] = to_json(*c.planner.goal);

  const PipelineConfig& pc = c.counting.pipeline;
  const CountPathSpec& ps = c.counting.path;
  const char* kind = ps.kind == CountPathKind::orbit ? "orbit" : ps.kind == CountPathKind::row_pass ? "row_pass" : "strategy";
  json cluster{{"min_pts", pc.cluster.min_pts}};
  if (pc.cluster.eps) cluster["eps"] = *pc.cluster.eps;
  json counting{
      {"path",
       {{"kind", kind},
        {"height", to_json(ps.height)},
        {"camera", to_json(ps.camera)},
        {"margin", ps.margin},
        {"frames", ps.frames},
        {"offset", ps.offset},
        {"step", ps.step},
        {"sides", ps.sides}}},
      {"noise",
       {{"jitter_px", pc.noise.jitter_px},
        {"p_miss", pc.noise.p_miss},
        {"fp_rate", pc.noise.fp_rate},
        {"conf_true_min", pc.noise.conf_true_min},
        {"conf_fp_max", pc.noise.conf_fp_max},
        {"fp_size_px", {pc.noise.fp_size_px.min, pc.noise.fp_size_px.max}},
        {"seed", pc.noise.seed}}},
      {"tracker",
       {{"tau_high", pc.tracker.tau_high},
        {"tau_low", pc.tracker.tau_low},
        {"iou_min", pc.tracker.iou_min},
        {"max_age", pc.tracker.max_age},
        {"gain", pc.tracker.gain},
        {"two_stage", pc.tracker.two_stage}}},
      {"triangulation",
       {{"max_reprojection_px", pc.triangulation.max_reprojection_px},
        {"min_parallax_deg", rad_to_deg(pc.triangulation.min_parallax)},
        {"min_baseline", pc.triangulation.min_baseline},
        {"min_views", pc.triangulation.min_views},
        {"noise_scaled_gate", pc.noise_scaled_gate},
        {"max_sigma_fraction", pc.max_sigma_fraction}}},
      {"cluster", cluster},
      {"noise_seeds", c.counting.noise_seeds}};

  json formats = json::array();
  if (c.output.json) formats.push_back("json");
  if (c.output.csv) formats.push_back("csv");
  if (c.output.text) formats.push_back("text");

  return {{"version", c.version},
          {"orchard",
           {{"preset", c.orchard.preset},
            {"params", json_fields::to_json(c.orchard.params, AngleUnit::degrees)},
            {"layout", json_fields::to_json(c.orchard.layout)},
            {"seed", c.orchard.seed}}},
          {"strategy",
           {{"pattern", to_string(c.strategy.pattern)},
            {"heights", c.strategy.heights},
            {"sample_spacing", c.strategy.sample_spacing},
            {"seeds", c.strategy.seeds},
            {"mount_sets", sets},
            {"fruits_occlude", c.strategy.visibility.fruits_occlude}}},
          {"planner", planner},
          {"counting", counting},
          {"output", {{"directory", c.output.directory}, {"formats", formats}}}};
}

void apply_seed_override(ExperimentConfig& config, std::uint64_t seed) {
  config.orchard.seed = seed;
  config.strategy.seeds = {seed};
  config.planner.flight.sampler.seed = seed;
  config.counting.pipeline.noise.seed = seed;
}

}  // namespace orchardsim
