#include "rollcard/format.hpp"

#include <cfenv>
#include <cmath>
#include <cstdio>

namespace rollcard {

double round_half_even(double value, int digits) {
  double scale = std::pow(10.0, digits);
  // nearbyint under the default rounding mode resolves ties to even.
  return std::nearbyint(value * scale) / scale;
}

std::string format_pp(double fraction_gap) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", round_half_even(fraction_gap * 100.0, 1));
  return buf;
}

std::string format_percent(double fraction) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", round_half_even(fraction * 100.0, 2));
  std::string out = buf;
  if (out.size() > 1 && out.back() == '0' && out[out.size() - 2] != '.') {
    out.pop_back();
  }
  return out;
}

}  // namespace rollcard
