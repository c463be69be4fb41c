#pragma once

#include <cstdio>
#include <string>

namespace lapspec::detail {

/// Shortest text that round-trips a double: 17 significant digits.
inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace lapspec::detail
