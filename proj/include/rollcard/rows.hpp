#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rollcard/rawjson.hpp"
#include "rollcard/timestamp.hpp"

namespace rollcard {

enum class StreamKind { Events, Nodes, Edges, Annotations, Mutations };

inline constexpr std::array<StreamKind, 5> kAllStreams = {
    StreamKind::Events, StreamKind::Nodes, StreamKind::Edges,
    StreamKind::Annotations, StreamKind::Mutations};

std::string_view stream_name(StreamKind kind);
std::optional<StreamKind> stream_from_name(std::string_view name);

// Unknown columns ride along in file order and re-emit after known columns.
using Extras = rawjson::Members;

// Content-addressed reference to an overflow payload. Serialized inside
// payload maps as {"$blob": {"digest": ..., "byte_length": ..., "media_type": ...}}.
struct BlobRef {
  std::string digest;
  std::uint64_t byte_length = 0;
  std::optional<std::string> media_type;

  bool operator==(const BlobRef&) const = default;
};

// Payloads larger than this must be stored as blobs.
inline constexpr std::size_t kInlinePayloadCap = 64 * 1024;

struct EventRow {
  std::string event_id;
  std::string task_execution_id;
  std::string worker_binding_key;
  std::int64_t sequence = 0;
  std::string event_type;
  std::optional<std::string> turn_id;
  rawjson::RawValue payload{"{}"};
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> completed_at;
  std::optional<std::string> policy_version;
  Extras extras;

  bool operator==(const EventRow&) const = default;
};

// Minimum node status vocabulary; the set is open.
inline constexpr std::array<std::string_view, 5> kCoreNodeStatuses = {
    "pending", "running", "succeeded", "failed", "cancelled"};

struct NodeRow {
  std::string node_id;
  std::optional<std::string> parent_id;
  std::string instance_key;
  std::string task_key;
  std::string status;
  std::optional<std::string> assigned_worker_key;
  std::int64_t level = 0;
  Timestamp created_at;
  Timestamp updated_at;
  Extras extras;

  bool operator==(const NodeRow&) const = default;
};

inline constexpr std::array<std::string_view, 3> kEdgeStatuses = {
    "pending", "satisfied", "invalidated"};

struct EdgeRow {
  std::string source_node_id;
  std::string target_node_id;
  std::string status;
  Timestamp created_at;
  Timestamp updated_at;
  Extras extras;

  bool operator==(const EdgeRow&) const = default;
};

inline constexpr std::array<std::string_view, 3> kAnnotationTargets = {
    "node", "event", "run"};

struct AnnotationRow {
  std::string target_type;
  std::string target_id;
  std::string ns;  // dotted namespace, column name "namespace"
  std::int64_t sequence = 0;
  rawjson::RawValue payload{"{}"};
  Timestamp created_at;
  Extras extras;

  bool operator==(const AnnotationRow&) const = default;
};

struct MutationRow {
  std::int64_t sequence = 0;
  std::string mutation_type;
  std::string target_type;
  std::string target_id;
  std::string actor;
  rawjson::RawValue old_value{"null"};
  rawjson::RawValue new_value{"null"};
  std::string reason;
  Timestamp created_at;
  Extras extras;

  bool operator==(const MutationRow&) const = default;
};

// Schema column names per stream, in canonical serialization order.
const std::vector<std::string>& schema_columns(StreamKind kind);

}  // namespace rollcard
