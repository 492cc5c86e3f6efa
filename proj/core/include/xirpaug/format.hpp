#pragma once

#include <cstdio>
#include <string>

namespace xirpaug {

/// Round-trippable decimal form (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Short human form used in column names and labels.
inline std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace xirpaug
