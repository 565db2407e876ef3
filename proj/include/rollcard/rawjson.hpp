#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rollcard::rawjson {

// One JSON value as its exact source text, surrounding whitespace stripped.
// Keeping the bytes instead of a parsed tree is what lets unknown columns,
// unknown namespaces, and numeric literals survive read/write cycles intact.
struct RawValue {
  std::string text;

  bool operator==(const RawValue&) const = default;
};

enum class ValueKind { String, Number, Object, Array, True, False, Null };

// Ordered members of a top-level JSON object.
using Members = std::vector<std::pair<std::string, RawValue>>;

// Splits one JSON object into its ordered members, validating the full value
// syntax along the way. Throws MalformedRecord on syntax errors, trailing
// garbage, non-object input, or duplicate keys.
Members split_object(std::string_view line);

ValueKind kind(const RawValue& value);

// String decode/encode. encode_string emits the minimal escape set so the
// toolkit's own output is canonical.
std::string decode_string(const RawValue& value);
std::string encode_string(std::string_view text);

// Returns the integer when the value is a JSON integer literal that fits
// int64, otherwise nullopt (floats and strings do not qualify).
std::optional<std::int64_t> as_integer(const RawValue& value);

inline RawValue raw_null() { return RawValue{"null"}; }
RawValue raw_string(std::string_view text);
RawValue raw_integer(std::int64_t value);

}  // namespace rollcard::rawjson
