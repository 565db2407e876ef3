#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rollcard/jsonio.hpp"

namespace rollcard {

inline constexpr std::array<std::string_view, 5> kReleaseScopeKinds = {
    "full_trace", "redacted_trace", "gated_trace", "derived_view",
    "metadata_only"};

// Declared redaction/access/licensing limits on a published card.
struct ReleaseScope {
  std::string kind = "full_trace";
  // (field-or-row selector, reason) pairs
  std::vector<std::pair<std::string, std::string>> omitted;
  std::string license_note;
  std::string redistribution_limit;

  bool operator==(const ReleaseScope&) const = default;

  // Anything narrower than a full trace must say what is held back or why.
  bool consistent() const {
    return kind == "full_trace" || !omitted.empty() || !license_note.empty() ||
           !redistribution_limit.empty();
  }
};

Json to_json(const ReleaseScope& scope);
ReleaseScope release_scope_from_json(const Json& j);

}  // namespace rollcard
