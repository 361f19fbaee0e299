#pragma once

#include <charconv>
#include <string>

namespace orchardsim {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

}  // namespace orchardsim
