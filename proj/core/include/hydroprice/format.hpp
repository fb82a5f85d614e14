#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace hydroprice {

// Shortest round-trip decimal representation. Deterministic across runs, so
// every CSV/JSON we write can be compared byte for byte.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  // "-0.00" reads badly in a table.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos)
    s.erase(0, 1);
  return s;
}

}  // namespace hydroprice
