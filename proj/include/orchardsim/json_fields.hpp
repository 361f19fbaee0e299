#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "orchardsim/orchard.hpp"

namespace orchardsim {

/// Schema violation in a JSON document: unknown key, missing key or a value
/// of the wrong type. `path()` names the offending field.
class JsonSchemaError : public std::runtime_error {
 public:
  JsonSchemaError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace json_fields {

using nlohmann::json;

void require_object(const json& j, const std::string& path);
/// Rejects keys outside `allowed`.
void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& path);

double get_number(const json& j, std::string_view key, const std::string& path);
double get_number(const json& j, std::string_view key, const std::string& path, double fallback);
long long get_integer(const json& j, std::string_view key, const std::string& path);
long long get_integer(const json& j, std::string_view key, const std::string& path, long long fallback);
std::uint64_t get_u64(const json& j, std::string_view key, const std::string& path);
std::string get_string(const json& j, std::string_view key, const std::string& path);
bool get_bool(const json& j, std::string_view key, const std::string& path, bool fallback);

enum class AngleUnit { radians, degrees };

json to_json(const TreeParams& p, AngleUnit unit);
/// Keys absent from `j` keep their value in `base`.
TreeParams tree_params_from_json(const json& j, const TreeParams& base, AngleUnit unit, const std::string& path);
json to_json(const OrchardLayout& l);
OrchardLayout layout_from_json(const json& j, const OrchardLayout& base, const std::string& path);

}  // namespace json_fields
}  // namespace orchardsim
