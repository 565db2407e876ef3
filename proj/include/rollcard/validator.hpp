#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rollcard/bundle.hpp"
#include "rollcard/bundle_io.hpp"
#include "rollcard/jsonio.hpp"

namespace rollcard {

// Stable machine-readable violation codes.
namespace violation_code {
inline constexpr const char* kBadLayout = "BAD_LAYOUT";
inline constexpr const char* kHashMismatch = "HASH_MISMATCH";
inline constexpr const char* kSchemaViolation = "SCHEMA_VIOLATION";
inline constexpr const char* kSequenceNotMonotonic = "SEQUENCE_NOT_MONOTONIC";
inline constexpr const char* kParentLevelInconsistent =
    "PARENT_LEVEL_INCONSISTENT";
inline constexpr const char* kBlobRefDangling = "BLOB_REF_DANGLING";
inline constexpr const char* kBlobContentMismatch = "BLOB_CONTENT_MISMATCH";
inline constexpr const char* kEdgeCycle = "EDGE_CYCLE";
inline constexpr const char* kAppendOnlyViolated = "APPEND_ONLY_VIOLATED";
inline constexpr const char* kPayloadShape = "PAYLOAD_SHAPE";
inline constexpr const char* kReleaseScopeInconsistent =
    "RELEASE_SCOPE_INCONSISTENT";
inline constexpr const char* kEmptyBundle = "EMPTY_BUNDLE";
}  // namespace violation_code

struct Violation {
  std::string code;
  std::string stream;       // empty for bundle-level findings
  std::string row_locator;  // "<stream>.jsonl:<line>" when row-scoped
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationStats {
  std::map<std::string, std::int64_t> row_counts;
  std::int64_t distinct_task_execution_ids = 0;
  std::int64_t distinct_namespaces = 0;

  bool operator==(const ValidationStats&) const = default;
};

struct ValidationReport {
  std::string bundle_path;
  std::vector<Violation> violations;
  std::vector<Violation> warnings;
  ValidationStats stats;

  bool pass() const { return violations.empty(); }
};

enum class Strictness { Strict, Tolerant };

// Violations are collected exhaustively, capped per stream; only IoFailure is
// thrown. The bundle is never mutated.
ValidationReport validate_bundle(const Carrier& carrier,
                                 Strictness strictness = Strictness::Strict);

// Append-only extension check between two snapshots of one run.
struct ExtendsResult {
  std::vector<Violation> violations;
  bool pass() const { return violations.empty(); }
};

ExtendsResult check_extends(const CardBundle& earlier, const CardBundle& later);

Json to_json(const ValidationReport& report);
std::string render_text(const ValidationReport& report);

}  // namespace rollcard
