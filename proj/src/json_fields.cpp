#include "orchardsim/json_fields.hpp"

#include <algorithm>

namespace orchardsim::json_fields {

namespace {

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

const json& field(const json& j, std::string_view key, const std::string& path) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw JsonSchemaError(child(path, key), "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw JsonSchemaError(path, "expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw JsonSchemaError(path, "expected an integer");
  return v.get<long long>();
}

Range<int> int_range(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw JsonSchemaError(path, "expected [min, max]");
  return {static_cast<int>(as_integer(v[0], path + "[0]")), static_cast<int>(as_integer(v[1], path + "[1]"))};
}

Range<double> real_range(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw JsonSchemaError(path, "expected [min, max]");
  return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
}

}  // namespace

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw JsonSchemaError(path.empty() ? "<root>" : path, "expected an object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& path) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw JsonSchemaError(child(path, key), "unknown field");
    }
  }
}

double get_number(const json& j, std::string_view key, const std::string& path) {
  return as_number(field(j, key, path), child(path, key));
}

double get_number(const json& j, std::string_view key, const std::string& path, double fallback) {
  return j.contains(std::string(key)) ? get_number(j, key, path) : fallback;
}

long long get_integer(const json& j, std::string_view key, const std::string& path) {
  return as_integer(field(j, key, path), child(path, key));
}

long long get_integer(const json& j, std::string_view key, const std::string& path, long long fallback) {
  return j.contains(std::string(key)) ? get_integer(j, key, path) : fallback;
}

std::uint64_t get_u64(const json& j, std::string_view key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw JsonSchemaError(child(path, key), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, std::string_view key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_string()) throw JsonSchemaError(child(path, key), "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, std::string_view key, const std::string& path, bool fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) throw JsonSchemaError(child(path, key), "expected a boolean");
  return it->get<bool>();
}

json to_json(const TreeParams& p, AngleUnit unit) {
  const double k = unit == AngleUnit::degrees ? 180.0 / kPi : 1.0;
  json j;
  j["trunk_height"] = p.trunk_height;
  j["trunk_radius"] = p.trunk_radius;
  j["branching_levels"] = p.branching_levels;
  j["branches_per_node"] = {p.branches_per_node.min, p.branches_per_node.max};
  j["branch_length_ratio"] = p.branch_length_ratio;
  j[unit == AngleUnit::degrees ? "branch_pitch_deg" : "branch_pitch_rad"] = {p.branch_pitch.min * k,
                                                                           p.branch_pitch.max * k};
  j["leaf_count_per_terminal"] = {p.leaf_count_per_terminal.min, p.leaf_count_per_terminal.max};
  j["leaf_size"] = p.leaf_size;
  j["fruit_count"] = {p.fruit_count.min, p.fruit_count.max};
  j["fruit_radius"] = p.fruit_radius;
  j["canopy_radius"] = p.canopy_radius;
  j["fruit_interior_bias"] = p.fruit_interior_bias;
  j["fruit_height_center"] = p.fruit_height_center;
  j["fruit_cluster_spread"] = p.fruit_cluster_spread;
  return j;
}

TreeParams tree_params_from_json(const json& j, const TreeParams& base, AngleUnit unit, const std::string& path) {
  const std::string_view pitch_key = unit == AngleUnit::degrees ? "branch_pitch_deg" : "branch_pitch_rad";
  check_keys(j,
             {"trunk_height", "trunk_radius", "branching_levels", "branches_per_node", "branch_length_ratio",
              pitch_key, "leaf_count_per_terminal", "leaf_size", "fruit_count", "fruit_radius", "canopy_radius",
              "fruit_interior_bias", "fruit_height_center", "fruit_cluster_spread"},
             path);
  TreeParams p = base;
  p.trunk_height = get_number(j, "trunk_height", path, p.trunk_height);
  p.trunk_radius = get_number(j, "trunk_radius", path, p.trunk_radius);
  p.branching_levels = static_cast<int>(get_integer(j, "branching_levels", path, p.branching_levels));
  if (j.contains("branches_per_node")) p.branches_per_node = int_range(j["branches_per_node"], child(path, "branches_per_node"));
  p.branch_length_ratio = get_number(j, "branch_length_ratio", path, p.branch_length_ratio);
  if (j.contains(std::string(pitch_key))) {
    Range<double> r = real_range(j[std::string(pitch_key)], child(path, pitch_key));
    if (unit == AngleUnit::degrees) r = {deg_to_rad(r.min), deg_to_rad(r.max)};
    p.branch_pitch = r;
  }
  if (j.contains("leaf_count_per_terminal")) {
    p.leaf_count_per_terminal = int_range(j["leaf_count_per_terminal"], child(path, "leaf_count_per_terminal"));
  }
  p.leaf_size = get_number(j, "leaf_size", path, p.leaf_size);
  if (j.contains("fruit_count")) p.fruit_count = int_range(j["fruit_count"], child(path, "fruit_count"));
  p.fruit_radius = get_number(j, "fruit_radius", path, p.fruit_radius);
  p.canopy_radius = get_number(j, "canopy_radius", path, p.canopy_radius);
  p.fruit_interior_bias = get_number(j, "fruit_interior_bias", path, p.fruit_interior_bias);
  p.fruit_height_center = get_number(j, "fruit_height_center", path, p.fruit_height_center);
  p.fruit_cluster_spread = get_number(j, "fruit_cluster_spread", path, p.fruit_cluster_spread);
  return p;
}

json to_json(const OrchardLayout& l) {
  json j;
  j["rows"] = l.rows;
  j["cols"] = l.cols;
  j["row_spacing"] = l.row_spacing;
  j["tree_spacing"] = l.tree_spacing;
  j["position_jitter"] = l.position_jitter;
  return j;
}

OrchardLayout layout_from_json(const json& j, const OrchardLayout& base, const std::string& path) {
  check_keys(j, {"rows", "cols", "row_spacing", "tree_spacing", "position_jitter"}, path);
  OrchardLayout l = base;
  l.rows = static_cast<int>(get_integer(j, "rows", path, l.rows));
  l.cols = static_cast<int>(get_integer(j, "cols", path, l.cols));
  l.row_spacing = get_number(j, "row_spacing", path, l.row_spacing);
  l.tree_spacing = get_number(j, "tree_spacing", path, l.tree_spacing);
  l.position_jitter = get_number(j, "position_jitter", path, l.position_jitter);
  return l;
}

}  // namespace orchardsim::json_fields
