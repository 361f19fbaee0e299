#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "orchardsim/orchard.hpp"

namespace orchardsim {

// Scene file layout (all integers and floats little-endian):
//
//   offset  size  field
//   0       8     magic "ORCHSCN\0"
//   8       4     u32 format version (kSceneFormatVersion)
//   12      4     u32 header length H
//   16      H     UTF-8 JSON header: format, version, seed, params, layout,
//                 triangle_count, fruit_count, bounds
//   16+H    81*N  triangles: 9 x f64 (v0, v1, v2), u8 kind, u32 tree_id,
//                 i32 fruit_id (-1 when absent)
//   ...     40*M  fruits: u32 tree_id, u32 fruit_id, 3 x f64 center, f64 radius
//
// Nothing may follow the fruit array.

inline constexpr std::uint32_t kSceneFormatVersion = 1;
inline constexpr std::size_t kTriangleRecordSize = 81;
inline constexpr std::size_t kFruitRecordSize = 40;

class SceneFormatError : public std::runtime_error {
 public:
  SceneFormatError(std::size_t offset, const std::string& message)
      : std::runtime_error("scene file offset " + std::to_string(offset) + ": " + message), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Unsupported version or header schema (including unknown header fields).
class SceneVersionError : public SceneFormatError {
 public:
  using SceneFormatError::SceneFormatError;
};

std::vector<std::uint8_t> encode_scene(const OrchardModel& model);
OrchardModel decode_scene(const std::vector<std::uint8_t>& bytes);

void save_orchard(const OrchardModel& model, const std::filesystem::path& path);
OrchardModel load_orchard(const std::filesystem::path& path);

}  // namespace orchardsim
