#pragma once

// Locale-independent number formatting for reports and CSV files.
// Doubles use the shortest representation that round-trips.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <system_error>

namespace qnet {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "true" : "false"; }

}  // namespace qnet
