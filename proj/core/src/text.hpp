#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace tdselector::detail {

/// printf-style "%.<digits>f"; NaN prints as "NA".
inline std::string fixed(double value, int digits) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

/// Round-trips through strtod.
inline std::string exact(double value) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace tdselector::detail
