#include "rollcard/schema_export.hpp"

#include "rollcard/rows.hpp"

namespace rollcard {

namespace {

// 2026-02-03T04:05:06.789Z
constexpr const char* kTimestampPattern =
    "^[0-9]{4}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}:[0-9]{2}\\.[0-9]{3}Z$";
constexpr const char* kDigestPattern = "^[0-9a-f]{64}$";

Json string_type() { return Json{{"type", "string"}}; }

Json timestamp_type() {
  return Json{{"type", "string"}, {"pattern", kTimestampPattern}};
}

Json sequence_type() {
  return Json{{"type", "integer"}, {"minimum", 0}};
}

Json nullable(Json inner) {
  return Json{{"anyOf", Json::array({std::move(inner), Json{{"type", "null"}}})}};
}

Json object_schema(Json properties, Json required) {
  Json j = Json::object();
  j["type"] = "object";
  j["properties"] = std::move(properties);
  j["required"] = std::move(required);
  // Unknown columns are tolerated by design; consumers ignore them and
  // round-trip them intact.
  j["additionalProperties"] = true;
  return j;
}

Json event_schema() {
  Json props = Json::object();
  props["event_id"] = string_type();
  props["task_execution_id"] = string_type();
  props["worker_binding_key"] = string_type();
  props["sequence"] = sequence_type();
  props["event_type"] = string_type();
  props["turn_id"] = nullable(string_type());
  props["payload"] = Json{{"type", "object"}};
  props["started_at"] = nullable(timestamp_type());
  props["completed_at"] = nullable(timestamp_type());
  props["policy_version"] = nullable(string_type());
  return object_schema(std::move(props),
                       Json::array({"event_id", "task_execution_id",
                                    "worker_binding_key", "sequence",
                                    "event_type", "payload"}));
}

Json node_schema() {
  Json props = Json::object();
  props["node_id"] = string_type();
  props["parent_id"] = nullable(string_type());
  props["instance_key"] = string_type();
  props["task_key"] = string_type();
  // Open status vocabulary seeded with the core set.
  props["status"] = string_type();
  props["assigned_worker_key"] = nullable(string_type());
  props["level"] = sequence_type();
  props["created_at"] = timestamp_type();
  props["updated_at"] = timestamp_type();
  return object_schema(std::move(props),
                       Json::array({"node_id", "instance_key", "task_key",
                                    "status", "level", "created_at",
                                    "updated_at"}));
}

Json edge_schema() {
  Json props = Json::object();
  props["source_node_id"] = string_type();
  props["target_node_id"] = string_type();
  props["status"] = Json{{"type", "string"},
                         {"enum", Json::array({"pending", "satisfied",
                                               "invalidated"})}};
  props["created_at"] = timestamp_type();
  props["updated_at"] = timestamp_type();
  return object_schema(std::move(props),
                       Json::array({"source_node_id", "target_node_id",
                                    "status", "created_at", "updated_at"}));
}

Json annotation_schema() {
  Json props = Json::object();
  props["target_type"] = Json{{"type", "string"},
                              {"enum", Json::array({"node", "event", "run"})}};
  props["target_id"] = string_type();
  props["namespace"] = string_type();
  props["sequence"] = sequence_type();
  props["payload"] = Json{{"type", "object"}};
  props["created_at"] = timestamp_type();
  return object_schema(std::move(props),
                       Json::array({"target_type", "target_id", "namespace",
                                    "sequence", "payload", "created_at"}));
}

Json mutation_schema() {
  Json props = Json::object();
  props["sequence"] = sequence_type();
  props["mutation_type"] = string_type();
  props["target_type"] = Json{{"type", "string"},
                              {"enum", Json::array({"node", "event", "run"})}};
  props["target_id"] = string_type();
  props["actor"] = string_type();
  props["old_value"] = nullable(Json{{"type", "object"}});
  props["new_value"] = nullable(Json{{"type", "object"}});
  props["reason"] = string_type();
  props["created_at"] = timestamp_type();
  return object_schema(std::move(props),
                       Json::array({"sequence", "mutation_type", "target_type",
                                    "target_id", "actor", "old_value",
                                    "new_value", "reason", "created_at"}));
}

Json manifest_schema() {
  Json props = Json::object();
  props["format_version"] = Json{
      {"type", "array"},
      {"items", Json{{"type", "integer"}, {"minimum", 0}}},
      {"minItems", 2},
      {"maxItems", 2}};
  props["run_id"] = string_type();
  props["created_at"] = timestamp_type();
  Json hash_props = Json::object();
  for (StreamKind kind : kAllStreams) {
    hash_props[std::string(stream_name(kind))] =
        Json{{"type", "string"}, {"pattern", kDigestPattern}};
  }
  props["stream_hashes"] = Json{{"type", "object"},
                                {"properties", std::move(hash_props)},
                                {"additionalProperties", false}};
  props["blob_index"] = Json{
      {"type", "array"},
      {"items", Json{{"type", "string"}, {"pattern", kDigestPattern}}}};
  props["release_scope"] = Json{
      {"type", "object"},
      {"properties",
       Json{{"kind",
             Json{{"type", "string"},
                  {"enum", Json::array({"full_trace", "redacted_trace",
                                        "gated_trace", "derived_view",
                                        "metadata_only"})}}}}},
      {"required", Json::array({"kind"})}};
  props["rule_registry"] = Json{{"type", "array"}};
  props["extra"] = Json{{"type", "object"}};
  return object_schema(std::move(props),
                       Json::array({"format_version", "run_id", "created_at",
                                    "stream_hashes"}));
}

}  // namespace

Json export_row_schemas() {
  Json doc = Json::object();
  doc["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  doc["$id"] = "rollcard/row-schemas";
  Json defs = Json::object();
  defs["events"] = event_schema();
  defs["nodes"] = node_schema();
  defs["edges"] = edge_schema();
  defs["annotations"] = annotation_schema();
  defs["mutations"] = mutation_schema();
  defs["manifest"] = manifest_schema();
  doc["$defs"] = std::move(defs);
  return doc;
}

}  // namespace rollcard
