#pragma once

#include <string>

namespace rollcard {

// Half-to-even rounding at a decimal-digit grid. Values are carried at full
// precision internally; rounding happens only at display.
double round_half_even(double value, int digits);

// Percentage points at 1 decimal, e.g. 15.6.
std::string format_pp(double fraction_gap);

// Rate as percent at up to 2 decimals, trailing zeros trimmed to one decimal,
// e.g. 34.2, 13.3, 20.64.
std::string format_percent(double fraction);

}  // namespace rollcard
