#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rollcard {

// RFC 3339 UTC timestamp with millisecond precision, e.g.
// "2026-01-02T03:04:05.678Z". Fixed width makes lexicographic order equal to
// temporal order, so rows can be compared without parsing.
struct Timestamp {
  std::string text;

  auto operator<=>(const Timestamp&) const = default;
};

bool is_valid_timestamp(std::string_view text);

// Conversions used by the synthetic generator and timing quantities.
Timestamp timestamp_from_unix_millis(std::int64_t millis);
std::int64_t unix_millis(const Timestamp& ts);

}  // namespace rollcard
