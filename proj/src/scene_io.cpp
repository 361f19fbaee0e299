#include "orchardsim/scene_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "orchardsim/json_fields.hpp"

namespace orchardsim {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'O', 'R', 'C', 'H', 'S', 'C', 'N', '\0'};

template <class T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <class T>
  void put(T value) {
    const T le = to_little_endian(value);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&le);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put(const Vec3& v) {
    put(v.x);
    put(v.y);
    put(v.z);
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw SceneFormatError(pos_, std::string("truncated ") + what);
  }

  template <class T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little_endian(value);
  }
  Vec3 get_vec3(const char* what) {
    const double x = get<double>(what);
    const double y = get<double>(what);
    const double z = get<double>(what);
    return {x, y, z};
  }
  std::string get_string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

json bounds_json(const Aabb& b) {
  if (b.empty()) return nullptr;
  return json{{"min", {b.min.x, b.min.y, b.min.z}}, {"max", {b.max.x, b.max.y, b.max.z}}};
}

}  // namespace

std::vector<std::uint8_t> encode_scene(const OrchardModel& model) {
  json header;
  header["format"] = "orchardsim-scene";
  header["version"] = kSceneFormatVersion;
  header["seed"] = model.seed;
  header["params"] = json_fields::to_json(model.params, json_fields::AngleUnit::radians);
  header["layout"] = json_fields::to_json(model.layout);
  header["triangle_count"] = model.triangles.size();
  header["fruit_count"] = model.fruits.size();
  header["bounds"] = bounds_json(model.bounds);
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(16 + text.size() + model.triangles.size() * kTriangleRecordSize +
              model.fruits.size() * kFruitRecordSize);
  Writer w(out);
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put(kSceneFormatVersion);
  w.put(static_cast<std::uint32_t>(text.size()));
  w.put_bytes(text.data(), text.size());
  for (const Triangle& t : model.triangles) {
    w.put(t.v0);
    w.put(t.v1);
    w.put(t.v2);
    w.put(static_cast<std::uint8_t>(t.kind));
    w.put(t.tree_id);
    w.put(t.fruit_id ? static_cast<std::int32_t>(*t.fruit_id) : std::int32_t{-1});
  }
  for (const FruitRecord& f : model.fruits) {
    w.put(f.tree_id);
    w.put(f.fruit_id);
    w.put(f.center);
    w.put(f.radius);
  }
  return out;
}

OrchardModel decode_scene(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.get_string(sizeof(kMagic), "magic") != std::string(kMagic, sizeof(kMagic))) {
    throw SceneFormatError(0, "bad magic; not an orchard scene file");
  }
  const std::size_t version_offset = r.offset();
  const auto version = r.get<std::uint32_t>("version");
  if (version != kSceneFormatVersion) {
    throw SceneVersionError(version_offset, "unsupported format version " + std::to_string(version));
  }
  const auto header_len = r.get<std::uint32_t>("header length");
  const std::size_t header_offset = r.offset();
  const std::string text = r.get_string(header_len, "header");

  json header;
  try {
    header = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SceneFormatError(header_offset + (e.byte > 0 ? e.byte - 1 : 0), "malformed header JSON");
  }

  OrchardModel model;
  std::uint64_t triangle_count = 0, fruit_count = 0;
  try {
    json_fields::check_keys(header,
                            {"format", "version", "seed", "params", "layout", "triangle_count", "fruit_count", "bounds"},
                            "header");
    if (json_fields::get_string(header, "format", "header") != "orchardsim-scene") {
      throw JsonSchemaError("header.format", "unexpected format tag");
    }
    if (json_fields::get_integer(header, "version", "header") != kSceneFormatVersion) {
      throw JsonSchemaError("header.version", "disagrees with the binary version field");
    }
    model.seed = json_fields::get_u64(header, "seed", "header");
    const json& params = header.at("params");
    json_fields::require_object(params, "header.params");
    if (params.size() != json_fields::to_json(TreeParams{}, json_fields::AngleUnit::radians).size()) {
      throw JsonSchemaError("header.params", "incomplete parameter set");
    }
    model.params = json_fields::tree_params_from_json(params, TreeParams{}, json_fields::AngleUnit::radians,
                                                      "header.params");
    const json& layout = header.at("layout");
    json_fields::require_object(layout, "header.layout");
    if (layout.size() != 5) throw JsonSchemaError("header.layout", "incomplete layout");
    model.layout = json_fields::layout_from_json(layout, OrchardLayout{}, "header.layout");
    triangle_count = json_fields::get_u64(header, "triangle_count", "header");
    fruit_count = json_fields::get_u64(header, "fruit_count", "header");
    model.params.validate();
    model.layout.validate();
  } catch (const JsonSchemaError& e) {
    throw SceneVersionError(header_offset, e.what());
  } catch (const json::exception& e) {
    throw SceneVersionError(header_offset, std::string("header schema: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SceneFormatError(header_offset, std::string("invalid parameters: ") + e.what());
  }

  // Size check up front so a truncated file never yields a partial model.
  const std::size_t body = triangle_count * kTriangleRecordSize + fruit_count * kFruitRecordSize;
  if (r.remaining() < body) {
    throw SceneFormatError(r.offset() + r.remaining(), "truncated body: expected " + std::to_string(body) +
                                                           " bytes, found " + std::to_string(r.remaining()));
  }
  if (r.remaining() > body) {
    throw SceneFormatError(r.offset() + body, "unexpected trailing data");
  }

  model.triangles.reserve(triangle_count);
  for (std::uint64_t i = 0; i < triangle_count; ++i) {
    const std::size_t at = r.offset();
    Triangle t;
    t.v0 = r.get_vec3("triangle");
    t.v1 = r.get_vec3("triangle");
    t.v2 = r.get_vec3("triangle");
    const auto kind = r.get<std::uint8_t>("triangle");
    if (kind > static_cast<std::uint8_t>(TriangleKind::fruit)) throw SceneFormatError(at + 72, "invalid triangle kind");
    t.kind = static_cast<TriangleKind>(kind);
    t.tree_id = r.get<std::uint32_t>("triangle");
    const auto fruit_id = r.get<std::int32_t>("triangle");
    if ((fruit_id >= 0) != (t.kind == TriangleKind::fruit)) {
      throw SceneFormatError(at + 77, "fruit_id must be present exactly for fruit triangles");
    }
    if (fruit_id >= 0) t.fruit_id = static_cast<std::uint32_t>(fruit_id);
    if (!t.v0.is_finite() || !t.v1.is_finite() || !t.v2.is_finite()) {
      throw SceneFormatError(at, "non-finite vertex");
    }
    model.triangles.push_back(t);
  }
  model.fruits.reserve(fruit_count);
  for (std::uint64_t i = 0; i < fruit_count; ++i) {
    const std::size_t at = r.offset();
    FruitRecord f;
    f.tree_id = r.get<std::uint32_t>("fruit");
    f.fruit_id = r.get<std::uint32_t>("fruit");
    f.center = r.get_vec3("fruit");
    f.radius = r.get<double>("fruit");
    if (!(f.radius > 0.0) || !f.center.is_finite()) throw SceneFormatError(at, "invalid fruit record");
    model.fruits.push_back(f);
  }
  model.bounds = bounds_of(model.triangles);
  return model;
}

void save_orchard(const OrchardModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_scene(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open scene file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing scene file: " + path.string());
}

OrchardModel load_orchard(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scene file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_scene(bytes);
}

}  // namespace orchardsim
