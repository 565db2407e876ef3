#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rollcard/jsonio.hpp"
#include "rollcard/release_scope.hpp"

namespace rollcard {

// Seed vocabulary for declared semantic losses; the set is open.
inline constexpr const char* kDurationErasure = "duration_erasure";
inline constexpr const char* kPrecedenceErasure = "precedence_erasure";
inline constexpr const char* kWorkerIdentityErasure = "worker_identity_erasure";
inline constexpr const char* kBranchErasure = "branch_erasure";
inline constexpr const char* kToolChannelErasure = "tool_channel_erasure";

struct SemanticLossClass {
  std::string name;
  std::string note;

  bool operator==(const SemanticLossClass&) const = default;
  auto operator<=>(const SemanticLossClass&) const = default;
};

// (stream, column) pair.
using FieldRef = std::pair<std::string, std::string>;

struct FilterRecord {
  std::string stream;
  std::string description;
  std::int64_t matched = 0;
  std::int64_t total = 0;
  Json spec;  // declarative filter, replayable

  bool operator==(const FilterRecord&) const = default;
};

struct RowAccess {
  std::int64_t count = 0;
  std::vector<std::string> selectors;

  bool operator==(const RowAccess&) const = default;
};

struct AccessLog {
  std::set<std::string> streams_opened;
  std::set<FieldRef> fields_read;
  std::map<std::string, RowAccess> rows_read;
  std::vector<FilterRecord> filters_applied;
  std::vector<std::string> collapses;

  bool operator==(const AccessLog&) const = default;
};

// Typed record of what one analysis read from one card, and what it dropped.
struct DropsManifest {
  std::string rule_or_view_name;
  AccessLog footprint;
  std::vector<SemanticLossClass> declared_losses;
  std::set<FieldRef> complement;
  std::vector<std::string> omissions;  // degraded-view notes
  std::optional<ReleaseScope> release_note;

  bool operator==(const DropsManifest&) const = default;
};

Json to_json(const DropsManifest& manifest);
DropsManifest drops_manifest_from_json(const Json& j);

}  // namespace rollcard
