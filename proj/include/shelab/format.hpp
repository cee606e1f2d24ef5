#pragma once

#include <charconv>
#include <string>

namespace shelab {

/// Shortest round-trip decimal form; identical input gives identical text.
inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace shelab
