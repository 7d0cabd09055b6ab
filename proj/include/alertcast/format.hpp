#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace alertcast {

// Fixed-point with trailing zeros trimmed: fmt_trim(62.8) == "62.8",
// fmt_trim(2.0) == "2". Used for CSV cells and prompt tables.
inline std::string fmt_trim(double v, int max_decimals = 6) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", max_decimals, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

// Rounds to n significant decimal digits; wire-format convention for the
// scoring service.
inline double round_sig(double v, int digits = 9) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  double mag = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::fabs(v)))));
  return std::round(v * mag) / mag;
}

}  // namespace alertcast
