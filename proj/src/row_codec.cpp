#include "rollcard/row_codec.hpp"

#include <algorithm>
#include <sstream>

#include "rollcard/errors.hpp"

namespace rollcard {

namespace {

using rawjson::RawValue;
using rawjson::ValueKind;

std::string join_set(std::initializer_list<std::string_view> values) {
  std::string out;
  for (auto v : values) {
    if (!out.empty()) out += " | ";
    out += v;
  }
  return out;
}

// Pulls known columns out of the parsed member list; whatever remains is the
// row's extras, original order intact.
class ColumnReader {
 public:
  explicit ColumnReader(std::string_view line)
      : members_(rawjson::split_object(line)) {}

  const RawValue* find(std::string_view name) {
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (members_[i].first == name) {
        taken_.push_back(i);
        return &members_[i].second;
      }
    }
    return nullptr;
  }

  const RawValue& require(std::string_view name) {
    const RawValue* v = find(name);
    if (!v) throw MissingRequiredColumn(std::string(name));
    return *v;
  }

  std::string string_col(std::string_view name) {
    const RawValue& v = require(name);
    if (rawjson::kind(v) != ValueKind::String) {
      throw TypeMismatch(std::string(name), "string");
    }
    return rawjson::decode_string(v);
  }

  std::optional<std::string> opt_string_col(std::string_view name) {
    const RawValue* v = find(name);
    if (!v || rawjson::kind(*v) == ValueKind::Null) return std::nullopt;
    if (rawjson::kind(*v) != ValueKind::String) {
      throw TypeMismatch(std::string(name), "string or null");
    }
    return rawjson::decode_string(*v);
  }

  std::int64_t sequence_col(std::string_view name) {
    const RawValue& v = require(name);
    auto n = rawjson::as_integer(v);
    if (!n) throw TypeMismatch(std::string(name), "integer");
    if (*n < 0) throw TypeMismatch(std::string(name), "non-negative integer");
    return *n;
  }

  Timestamp timestamp_col(std::string_view name) {
    const RawValue& v = require(name);
    if (rawjson::kind(v) != ValueKind::String) {
      throw TypeMismatch(std::string(name), "RFC 3339 UTC millisecond timestamp");
    }
    std::string text = rawjson::decode_string(v);
    if (!is_valid_timestamp(text)) {
      throw TypeMismatch(std::string(name), "RFC 3339 UTC millisecond timestamp");
    }
    return Timestamp{std::move(text)};
  }

  std::optional<Timestamp> opt_timestamp_col(std::string_view name) {
    const RawValue* v = find(name);
    if (!v || rawjson::kind(*v) == ValueKind::Null) return std::nullopt;
    if (rawjson::kind(*v) != ValueKind::String) {
      throw TypeMismatch(std::string(name), "RFC 3339 UTC millisecond timestamp");
    }
    std::string text = rawjson::decode_string(*v);
    if (!is_valid_timestamp(text)) {
      throw TypeMismatch(std::string(name), "RFC 3339 UTC millisecond timestamp");
    }
    return Timestamp{std::move(text)};
  }

  RawValue object_col(std::string_view name) {
    const RawValue& v = require(name);
    if (rawjson::kind(v) != ValueKind::Object) {
      throw TypeMismatch(std::string(name), "object");
    }
    return v;
  }

  RawValue object_or_null_col(std::string_view name) {
    const RawValue& v = require(name);
    auto k = rawjson::kind(v);
    if (k != ValueKind::Object && k != ValueKind::Null) {
      throw TypeMismatch(std::string(name), "object or null");
    }
    return v;
  }

  Extras remaining() {
    Extras extras;
    std::sort(taken_.begin(), taken_.end());
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (!std::binary_search(taken_.begin(), taken_.end(), i)) {
        extras.push_back(std::move(members_[i]));
      }
    }
    return extras;
  }

 private:
  rawjson::Members members_;
  std::vector<std::size_t> taken_;
};

class LineWriter {
 public:
  LineWriter() { out_.push_back('{'); }

  void field(std::string_view name, const RawValue& value) {
    sep();
    out_ += rawjson::encode_string(name);
    out_.push_back(':');
    out_ += value.text;
  }

  void field(std::string_view name, std::string_view text) {
    field(name, rawjson::raw_string(text));
  }

  void field(std::string_view name, std::int64_t value) {
    field(name, rawjson::raw_integer(value));
  }

  void field(std::string_view name, const Timestamp& ts) {
    field(name, rawjson::raw_string(ts.text));
  }

  template <typename T>
  void opt_field(std::string_view name, const std::optional<T>& value) {
    if (value) field(name, *value);
  }

  void extras(const Extras& extras) {
    for (const auto& [key, value] : extras) field(key, value);
  }

  std::string take() {
    out_.push_back('}');
    return std::move(out_);
  }

 private:
  void sep() {
    if (out_.size() > 1) out_.push_back(',');
  }
  std::string out_;
};

void check_extras(const Extras& extras) {
  for (const auto& [key, value] : extras) {
    (void)key;
    (void)rawjson::kind(value);  // throws on empty/invalid raw text
  }
}

bool in_set(std::string_view value, const auto& set) {
  return std::find(set.begin(), set.end(), value) != set.end();
}

}  // namespace

std::string_view stream_name(StreamKind kind) {
  switch (kind) {
    case StreamKind::Events: return "events";
    case StreamKind::Nodes: return "nodes";
    case StreamKind::Edges: return "edges";
    case StreamKind::Annotations: return "annotations";
    case StreamKind::Mutations: return "mutations";
  }
  return "";
}

std::optional<StreamKind> stream_from_name(std::string_view name) {
  for (StreamKind kind : kAllStreams) {
    if (stream_name(kind) == name) return kind;
  }
  return std::nullopt;
}

const std::vector<std::string>& schema_columns(StreamKind kind) {
  static const std::vector<std::string> events = {
      "event_id",   "task_execution_id", "worker_binding_key",
      "sequence",   "event_type",        "turn_id",
      "payload",    "started_at",        "completed_at",
      "policy_version"};
  static const std::vector<std::string> nodes = {
      "node_id", "parent_id",           "instance_key", "task_key", "status",
      "assigned_worker_key", "level",   "created_at",   "updated_at"};
  static const std::vector<std::string> edges = {
      "source_node_id", "target_node_id", "status", "created_at", "updated_at"};
  static const std::vector<std::string> annotations = {
      "target_type", "target_id", "namespace", "sequence", "payload",
      "created_at"};
  static const std::vector<std::string> mutations = {
      "sequence", "mutation_type", "target_type", "target_id", "actor",
      "old_value", "new_value",    "reason",      "created_at"};
  switch (kind) {
    case StreamKind::Events: return events;
    case StreamKind::Nodes: return nodes;
    case StreamKind::Edges: return edges;
    case StreamKind::Annotations: return annotations;
    case StreamKind::Mutations: return mutations;
  }
  return events;
}

EventRow parse_event_row(std::string_view line) {
  ColumnReader r(line);
  EventRow row;
  row.event_id = r.string_col("event_id");
  row.task_execution_id = r.string_col("task_execution_id");
  row.worker_binding_key = r.string_col("worker_binding_key");
  row.sequence = r.sequence_col("sequence");
  row.event_type = r.string_col("event_type");
  row.turn_id = r.opt_string_col("turn_id");
  row.payload = r.object_col("payload");
  row.started_at = r.opt_timestamp_col("started_at");
  row.completed_at = r.opt_timestamp_col("completed_at");
  row.policy_version = r.opt_string_col("policy_version");
  row.extras = r.remaining();
  check_row(row);
  return row;
}

NodeRow parse_node_row(std::string_view line) {
  ColumnReader r(line);
  NodeRow row;
  row.node_id = r.string_col("node_id");
  row.parent_id = r.opt_string_col("parent_id");
  row.instance_key = r.string_col("instance_key");
  row.task_key = r.string_col("task_key");
  row.status = r.string_col("status");
  row.assigned_worker_key = r.opt_string_col("assigned_worker_key");
  row.level = r.sequence_col("level");
  row.created_at = r.timestamp_col("created_at");
  row.updated_at = r.timestamp_col("updated_at");
  row.extras = r.remaining();
  check_row(row);
  return row;
}

EdgeRow parse_edge_row(std::string_view line) {
  ColumnReader r(line);
  EdgeRow row;
  row.source_node_id = r.string_col("source_node_id");
  row.target_node_id = r.string_col("target_node_id");
  row.status = r.string_col("status");
  if (!in_set(row.status, kEdgeStatuses)) {
    throw TypeMismatch("status",
                       join_set({"pending", "satisfied", "invalidated"}));
  }
  row.created_at = r.timestamp_col("created_at");
  row.updated_at = r.timestamp_col("updated_at");
  row.extras = r.remaining();
  check_row(row);
  return row;
}

AnnotationRow parse_annotation_row(std::string_view line) {
  ColumnReader r(line);
  AnnotationRow row;
  row.target_type = r.string_col("target_type");
  if (!in_set(row.target_type, kAnnotationTargets)) {
    throw TypeMismatch("target_type", join_set({"node", "event", "run"}));
  }
  row.target_id = r.string_col("target_id");
  row.ns = r.string_col("namespace");
  row.sequence = r.sequence_col("sequence");
  row.payload = r.object_col("payload");
  row.created_at = r.timestamp_col("created_at");
  row.extras = r.remaining();
  check_row(row);
  return row;
}

MutationRow parse_mutation_row(std::string_view line) {
  ColumnReader r(line);
  MutationRow row;
  row.sequence = r.sequence_col("sequence");
  row.mutation_type = r.string_col("mutation_type");
  row.target_type = r.string_col("target_type");
  if (!in_set(row.target_type, kAnnotationTargets)) {
    throw TypeMismatch("target_type", join_set({"node", "event", "run"}));
  }
  row.target_id = r.string_col("target_id");
  row.actor = r.string_col("actor");
  row.old_value = r.object_or_null_col("old_value");
  row.new_value = r.object_or_null_col("new_value");
  row.reason = r.string_col("reason");
  row.created_at = r.timestamp_col("created_at");
  row.extras = r.remaining();
  check_row(row);
  return row;
}

AnyRow parse_row(StreamKind kind, std::string_view line) {
  switch (kind) {
    case StreamKind::Events: return parse_event_row(line);
    case StreamKind::Nodes: return parse_node_row(line);
    case StreamKind::Edges: return parse_edge_row(line);
    case StreamKind::Annotations: return parse_annotation_row(line);
    case StreamKind::Mutations: return parse_mutation_row(line);
  }
  throw MalformedRecord("unknown stream kind");
}

void check_row(const EventRow& row) {
  if (row.sequence < 0) throw InvariantViolation("event sequence negative");
  if (row.started_at && row.completed_at && *row.completed_at < *row.started_at) {
    throw InvariantViolation("event " + row.event_id +
                             ": completed_at precedes started_at");
  }
  if (rawjson::kind(row.payload) != ValueKind::Object) {
    throw InvariantViolation("event payload must be an object");
  }
  check_extras(row.extras);
}

void check_row(const NodeRow& row) {
  if (row.level < 0) throw InvariantViolation("node level negative");
  if (!is_valid_timestamp(row.created_at.text) ||
      !is_valid_timestamp(row.updated_at.text)) {
    throw InvariantViolation("node " + row.node_id + ": bad timestamp");
  }
  check_extras(row.extras);
}

void check_row(const EdgeRow& row) {
  if (!in_set(row.status, kEdgeStatuses)) {
    throw InvariantViolation("edge status outside closed set: " + row.status);
  }
  if (row.source_node_id == row.target_node_id) {
    throw InvariantViolation("edge is a self-loop: " + row.source_node_id);
  }
  check_extras(row.extras);
}

void check_row(const AnnotationRow& row) {
  if (row.sequence < 0) throw InvariantViolation("annotation sequence negative");
  if (!in_set(row.target_type, kAnnotationTargets)) {
    throw InvariantViolation("annotation target_type outside closed set: " +
                             row.target_type);
  }
  if (rawjson::kind(row.payload) != ValueKind::Object) {
    throw InvariantViolation("annotation payload must be an object");
  }
  check_extras(row.extras);
}

void check_row(const MutationRow& row) {
  if (row.sequence < 0) throw InvariantViolation("mutation sequence negative");
  if (!in_set(row.target_type, kAnnotationTargets)) {
    throw InvariantViolation("mutation target_type outside closed set: " +
                             row.target_type);
  }
  check_extras(row.extras);
}

std::string serialize_row(const EventRow& row) {
  check_row(row);
  LineWriter w;
  w.field("event_id", row.event_id);
  w.field("task_execution_id", row.task_execution_id);
  w.field("worker_binding_key", row.worker_binding_key);
  w.field("sequence", row.sequence);
  w.field("event_type", row.event_type);
  w.opt_field("turn_id", row.turn_id);
  w.field("payload", row.payload);
  w.opt_field("started_at", row.started_at);
  w.opt_field("completed_at", row.completed_at);
  w.opt_field("policy_version", row.policy_version);
  w.extras(row.extras);
  return w.take();
}

std::string serialize_row(const NodeRow& row) {
  check_row(row);
  LineWriter w;
  w.field("node_id", row.node_id);
  w.opt_field("parent_id", row.parent_id);
  w.field("instance_key", row.instance_key);
  w.field("task_key", row.task_key);
  w.field("status", row.status);
  w.opt_field("assigned_worker_key", row.assigned_worker_key);
  w.field("level", row.level);
  w.field("created_at", row.created_at);
  w.field("updated_at", row.updated_at);
  w.extras(row.extras);
  return w.take();
}

std::string serialize_row(const EdgeRow& row) {
  check_row(row);
  LineWriter w;
  w.field("source_node_id", row.source_node_id);
  w.field("target_node_id", row.target_node_id);
  w.field("status", row.status);
  w.field("created_at", row.created_at);
  w.field("updated_at", row.updated_at);
  w.extras(row.extras);
  return w.take();
}

std::string serialize_row(const AnnotationRow& row) {
  check_row(row);
  LineWriter w;
  w.field("target_type", row.target_type);
  w.field("target_id", row.target_id);
  w.field("namespace", row.ns);
  w.field("sequence", row.sequence);
  w.field("payload", row.payload);
  w.field("created_at", row.created_at);
  w.extras(row.extras);
  return w.take();
}

std::string serialize_row(const MutationRow& row) {
  check_row(row);
  LineWriter w;
  w.field("sequence", row.sequence);
  w.field("mutation_type", row.mutation_type);
  w.field("target_type", row.target_type);
  w.field("target_id", row.target_id);
  w.field("actor", row.actor);
  w.field("old_value", row.old_value);
  w.field("new_value", row.new_value);
  w.field("reason", row.reason);
  w.field("created_at", row.created_at);
  w.extras(row.extras);
  return w.take();
}

std::string serialize_row(const AnyRow& row) {
  return std::visit([](const auto& r) { return serialize_row(r); }, row);
}

}  // namespace rollcard
