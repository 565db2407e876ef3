#include "rollcard/validator.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rollcard/cycle.hpp"
#include "rollcard/errors.hpp"
#include "rollcard/sha256.hpp"
#include "rollcard/zipfile.hpp"

namespace rollcard {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kPerStreamViolationCap = 10000;

struct Collector {
  std::vector<Violation>* violations;
  std::vector<Violation>* warnings;
  std::map<std::string, std::size_t> per_stream;

  void add(std::string code, std::string stream, std::string locator,
           std::string message) {
    if (!stream.empty() && ++per_stream[stream] > kPerStreamViolationCap) return;
    violations->push_back({std::move(code), std::move(stream),
                           std::move(locator), std::move(message)});
  }

  void warn(std::string code, std::string stream, std::string locator,
            std::string message) {
    warnings->push_back({std::move(code), std::move(stream),
                         std::move(locator), std::move(message)});
  }
};

std::string locator(StreamKind kind, std::size_t line) {
  return std::string(stream_name(kind)) + ".jsonl:" + std::to_string(line);
}

// Raw carrier contents for validation; reading is done without read_bundle so
// hash mismatches become report entries instead of thrown errors.
struct RawFiles {
  bool ok = false;
  std::string manifest_bytes;
  std::map<std::string, std::string> streams;  // stream name -> bytes
  std::map<std::string, std::string> blobs;    // digest -> bytes
  std::set<std::string> stream_files_present;
};

RawFiles load_raw(const Carrier& carrier, Collector& out) {
  RawFiles raw;
  if (carrier.kind == Carrier::Kind::Directory) {
    if (!fs::exists(carrier.path)) {
      throw IoFailure("carrier does not exist: " + carrier.path.string());
    }
    fs::path manifest = carrier.path / "manifest.json";
    if (!fs::exists(manifest)) {
      out.add(violation_code::kBadLayout, "", "",
              "manifest.json missing from carrier");
      return raw;
    }
    raw.manifest_bytes = read_file(manifest);
    for (StreamKind kind : kAllStreams) {
      std::string name(stream_name(kind));
      fs::path file = carrier.path / (name + ".jsonl");
      if (fs::exists(file)) {
        raw.stream_files_present.insert(name);
        raw.streams[name] = read_file(file);
      }
    }
    fs::path blobs = carrier.path / "blobs";
    if (fs::exists(blobs)) {
      for (const auto& entry : fs::directory_iterator(blobs)) {
        if (entry.is_regular_file()) {
          raw.blobs[entry.path().filename().string()] = read_file(entry.path());
        }
      }
    }
  } else {
    if (!fs::exists(carrier.path)) {
      throw IoFailure("carrier does not exist: " + carrier.path.string());
    }
    std::vector<ZipEntry> entries;
    try {
      entries = read_zip(carrier.path);
    } catch (const IoFailure&) {
      throw;
    }
    bool has_manifest = false;
    for (auto& entry : entries) {
      if (entry.name == "manifest.json") {
        raw.manifest_bytes = std::move(entry.bytes);
        has_manifest = true;
      } else if (entry.name.starts_with("blobs/")) {
        raw.blobs[entry.name.substr(6)] = std::move(entry.bytes);
      } else if (entry.name.ends_with(".jsonl")) {
        std::string name = entry.name.substr(0, entry.name.size() - 6);
        if (stream_from_name(name)) {
          raw.stream_files_present.insert(name);
          raw.streams[name] = std::move(entry.bytes);
        }
      }
    }
    if (!has_manifest) {
      out.add(violation_code::kBadLayout, "", "",
              "manifest.json missing from carrier");
      return raw;
    }
  }
  raw.ok = true;
  return raw;
}

template <typename Row>
struct ParsedStream {
  std::vector<Row> rows;
  std::vector<std::size_t> lines;  // 1-based line number per parsed row
};

template <typename Row, typename ParseFn>
ParsedStream<Row> parse_stream(StreamKind kind, const std::string& bytes,
                               ParseFn parse, Collector& out) {
  ParsedStream<Row> parsed;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < bytes.size()) {
    std::size_t end = bytes.find('\n', start);
    if (end == std::string::npos) end = bytes.size();
    ++line_no;
    if (end > start) {
      std::string_view line = std::string_view(bytes).substr(start, end - start);
      try {
        parsed.rows.push_back(parse(line));
        parsed.lines.push_back(line_no);
      } catch (const Error& e) {
        out.add(violation_code::kSchemaViolation,
                std::string(stream_name(kind)), locator(kind, line_no),
                e.what());
      }
    }
    start = end + 1;
  }
  return parsed;
}

// Known payload shapes for the toolkit's own event vocabulary.
void check_known_event_payload(const EventRow& row, const Json& payload,
                               StreamKind kind, std::size_t line,
                               Collector& out) {
  auto bad = [&](const std::string& message) {
    out.add(violation_code::kPayloadShape, std::string(stream_name(kind)),
            locator(kind, line), "event " + row.event_id + ": " + message);
  };
  if (row.event_type == "reward") {
    if (!payload.contains("reward") || !payload.at("reward").is_number()) {
      bad("reward payload needs numeric \"reward\"");
    }
  } else if (row.event_type == "tool_call") {
    if (!payload.contains("name") || !payload.at("name").is_string()) {
      bad("tool_call payload needs string \"name\"");
    }
  } else if (row.event_type == "search_step") {
    if (!payload.contains("path") || !payload.at("path").is_array()) {
      bad("search_step payload needs array \"path\"");
    }
  }
}

bool known_event_type(const std::string& type) {
  static const std::set<std::string> known = {
      "message",  "model_output", "tool_call",  "tool_result", "reward",
      "env_state", "proof_step",  "search_step", "status_change"};
  return known.contains(type);
}

bool known_mutation_type(const std::string& type) {
  static const std::set<std::string> known = {"node_status", "annotation_edit",
                                              "delete"};
  return known.contains(type);
}

// Generic plausibility checks applied to payloads of unknown discriminators;
// strict mode treats findings as violations, tolerant mode as warnings.
std::optional<std::string> generic_payload_issue(const Json& payload) {
  if (payload.contains("$blob")) {
    const Json& b = payload.at("$blob");
    if (!b.is_object() || !b.contains("digest") || !b.at("digest").is_string() ||
        !b.contains("byte_length")) {
      return "malformed $blob marker";
    }
  }
  return std::nullopt;
}

}  // namespace

ValidationReport validate_bundle(const Carrier& carrier,
                                 Strictness strictness) {
  ValidationReport report;
  report.bundle_path = carrier.path.string();
  Collector out{&report.violations, &report.warnings, {}};

  // 1. layout
  RawFiles raw = load_raw(carrier, out);
  if (!raw.ok) return report;

  Manifest manifest;
  try {
    manifest = parse_manifest(raw.manifest_bytes);
  } catch (const Error& e) {
    out.add(violation_code::kBadLayout, "", "manifest.json",
            std::string("manifest unreadable: ") + e.what());
    return report;
  }

  for (const auto& [name, hash] : manifest.stream_hashes) {
    (void)hash;
    if (!raw.stream_files_present.contains(name)) {
      out.add(violation_code::kBadLayout, name, "",
              "stream listed in manifest but file missing: " + name + ".jsonl");
    }
  }
  for (const auto& name : raw.stream_files_present) {
    if (!manifest.stream_hashes.contains(name)) {
      out.add(violation_code::kBadLayout, name, "",
              "stream file present but not hashed in manifest: " + name +
                  ".jsonl");
    }
  }

  // 2. content hashes
  for (const auto& [name, expected] : manifest.stream_hashes) {
    auto it = raw.streams.find(name);
    if (it == raw.streams.end()) continue;
    std::string actual = sha256_hex(it->second);
    if (actual != expected) {
      out.add(violation_code::kHashMismatch, name, "",
              "stream " + name + " hashes to " + actual + ", manifest says " +
                  expected);
    }
  }

  // 3. per-row schema
  auto events = parse_stream<EventRow>(
      StreamKind::Events, raw.streams["events"],
      [](std::string_view l) { return parse_event_row(l); }, out);
  auto nodes = parse_stream<NodeRow>(
      StreamKind::Nodes, raw.streams["nodes"],
      [](std::string_view l) { return parse_node_row(l); }, out);
  auto edges = parse_stream<EdgeRow>(
      StreamKind::Edges, raw.streams["edges"],
      [](std::string_view l) { return parse_edge_row(l); }, out);
  auto annotations = parse_stream<AnnotationRow>(
      StreamKind::Annotations, raw.streams["annotations"],
      [](std::string_view l) { return parse_annotation_row(l); }, out);
  auto mutations = parse_stream<MutationRow>(
      StreamKind::Mutations, raw.streams["mutations"],
      [](std::string_view l) { return parse_mutation_row(l); }, out);

  report.stats.row_counts["events"] = static_cast<std::int64_t>(events.rows.size());
  report.stats.row_counts["nodes"] = static_cast<std::int64_t>(nodes.rows.size());
  report.stats.row_counts["edges"] = static_cast<std::int64_t>(edges.rows.size());
  report.stats.row_counts["annotations"] =
      static_cast<std::int64_t>(annotations.rows.size());
  report.stats.row_counts["mutations"] =
      static_cast<std::int64_t>(mutations.rows.size());

  // payload shapes
  for (std::size_t i = 0; i < events.rows.size(); ++i) {
    const EventRow& row = events.rows[i];
    bool known = known_event_type(row.event_type);
    bool has_blob = row.payload.text.find("$blob") != std::string::npos;
    if (!known && !has_blob) continue;
    Json payload = Json::parse(row.payload.text, nullptr, false);
    if (payload.is_discarded()) continue;  // parse already enforced validity
    if (known) {
      check_known_event_payload(row, payload, StreamKind::Events,
                                events.lines[i], out);
    } else if (auto issue = generic_payload_issue(payload)) {
      std::string message = "event " + row.event_id + " (" + row.event_type +
                            "): " + *issue;
      if (strictness == Strictness::Strict) {
        out.add(violation_code::kPayloadShape, "events",
                locator(StreamKind::Events, events.lines[i]), message);
      } else {
        out.warn(violation_code::kPayloadShape, "events",
                 locator(StreamKind::Events, events.lines[i]), message);
      }
    }
  }
  for (std::size_t i = 0; i < mutations.rows.size(); ++i) {
    const MutationRow& row = mutations.rows[i];
    if (known_mutation_type(row.mutation_type)) continue;
    if (row.old_value.text == "null" && row.new_value.text == "null") {
      std::string message = "mutation " + std::to_string(row.sequence) + " (" +
                            row.mutation_type +
                            "): both old_value and new_value are null";
      if (strictness == Strictness::Strict) {
        out.add(violation_code::kPayloadShape, "mutations",
                locator(StreamKind::Mutations, mutations.lines[i]), message);
      } else {
        out.warn(violation_code::kPayloadShape, "mutations",
                 locator(StreamKind::Mutations, mutations.lines[i]), message);
      }
    }
  }

  // 4. event-sequence monotonicity per task_execution_id
  {
    std::unordered_map<std::string, std::pair<std::int64_t, std::size_t>> last;
    std::set<std::string> executions;
    for (std::size_t i = 0; i < events.rows.size(); ++i) {
      const EventRow& row = events.rows[i];
      executions.insert(row.task_execution_id);
      auto it = last.find(row.task_execution_id);
      if (it != last.end() && row.sequence <= it->second.first) {
        out.add(violation_code::kSequenceNotMonotonic, "events",
                locator(StreamKind::Events, events.lines[i]),
                "sequence " + std::to_string(row.sequence) + " at " +
                    locator(StreamKind::Events, events.lines[i]) +
                    " does not exceed sequence " +
                    std::to_string(it->second.first) + " at " +
                    locator(StreamKind::Events, it->second.second) +
                    " (task_execution_id=" + row.task_execution_id + ")");
      }
      last[row.task_execution_id] = {row.sequence, events.lines[i]};
    }
    report.stats.distinct_task_execution_ids =
        static_cast<std::int64_t>(executions.size());
  }

  // 5. mutation-sequence monotonicity per run
  {
    std::int64_t prev = -1;
    std::size_t prev_line = 0;
    for (std::size_t i = 0; i < mutations.rows.size(); ++i) {
      const MutationRow& row = mutations.rows[i];
      if (prev_line != 0 && row.sequence <= prev) {
        out.add(violation_code::kSequenceNotMonotonic, "mutations",
                locator(StreamKind::Mutations, mutations.lines[i]),
                "sequence " + std::to_string(row.sequence) + " at " +
                    locator(StreamKind::Mutations, mutations.lines[i]) +
                    " does not exceed sequence " + std::to_string(prev) +
                    " at " + locator(StreamKind::Mutations, prev_line));
      }
      prev = row.sequence;
      prev_line = mutations.lines[i];
    }
  }

  // 6. annotation-sequence monotonicity per (target_type, target_id, namespace)
  {
    std::map<std::tuple<std::string, std::string, std::string>,
             std::pair<std::int64_t, std::size_t>>
        last;
    std::set<std::string> namespaces;
    for (std::size_t i = 0; i < annotations.rows.size(); ++i) {
      const AnnotationRow& row = annotations.rows[i];
      namespaces.insert(row.ns);
      auto key = std::make_tuple(row.target_type, row.target_id, row.ns);
      auto it = last.find(key);
      if (it != last.end() && row.sequence <= it->second.first) {
        out.add(violation_code::kSequenceNotMonotonic, "annotations",
                locator(StreamKind::Annotations, annotations.lines[i]),
                "sequence " + std::to_string(row.sequence) + " at " +
                    locator(StreamKind::Annotations, annotations.lines[i]) +
                    " does not exceed sequence " +
                    std::to_string(it->second.first) + " at " +
                    locator(StreamKind::Annotations, it->second.second) +
                    " (target=" + row.target_type + "/" + row.target_id +
                    ", namespace=" + row.ns + ")");
      }
      last[key] = {row.sequence, annotations.lines[i]};
    }
    report.stats.distinct_namespaces =
        static_cast<std::int64_t>(namespaces.size());
  }

  // 7. node parent/level consistency
  {
    std::unordered_map<std::string, std::pair<std::int64_t, std::size_t>> seen;
    for (std::size_t i = 0; i < nodes.rows.size(); ++i) {
      const NodeRow& row = nodes.rows[i];
      if (row.parent_id) {
        auto it = seen.find(*row.parent_id);
        if (it == seen.end()) {
          out.add(violation_code::kParentLevelInconsistent, "nodes",
                  locator(StreamKind::Nodes, nodes.lines[i]),
                  "node " + row.node_id + " references parent " +
                      *row.parent_id + " which does not appear earlier");
        } else if (row.level != it->second.first + 1) {
          out.add(violation_code::kParentLevelInconsistent, "nodes",
                  locator(StreamKind::Nodes, nodes.lines[i]),
                  "node " + row.node_id + " has level " +
                      std::to_string(row.level) + " but parent " +
                      *row.parent_id + " has level " +
                      std::to_string(it->second.first));
        }
      }
      seen[row.node_id] = {row.level, nodes.lines[i]};
    }
  }

  // 8. blob-reference closure
  {
    std::set<std::string> index(manifest.blob_index.begin(),
                                manifest.blob_index.end());
    auto check_refs = [&](const rawjson::RawValue& payload, StreamKind kind,
                          std::size_t line, const std::string& what) {
      if (payload.text.find("$blob") == std::string::npos) return;
      for (const BlobRef& ref : find_blob_refs(payload)) {
        if (!index.contains(ref.digest) || !raw.blobs.contains(ref.digest)) {
          out.add(violation_code::kBlobRefDangling,
                  std::string(stream_name(kind)), locator(kind, line),
                  what + " references blob " + ref.digest +
                      " absent from the store");
        } else if (sha256_hex(raw.blobs.at(ref.digest)) != ref.digest) {
          out.add(violation_code::kBlobContentMismatch,
                  std::string(stream_name(kind)), locator(kind, line),
                  "blob " + ref.digest + " bytes do not hash to their name");
        }
      }
    };
    for (std::size_t i = 0; i < events.rows.size(); ++i) {
      check_refs(events.rows[i].payload, StreamKind::Events, events.lines[i],
                 "event " + events.rows[i].event_id);
    }
    for (std::size_t i = 0; i < annotations.rows.size(); ++i) {
      check_refs(annotations.rows[i].payload, StreamKind::Annotations,
                 annotations.lines[i],
                 "annotation " + annotations.rows[i].target_id + "/" +
                     annotations.rows[i].ns);
    }
    for (std::size_t i = 0; i < mutations.rows.size(); ++i) {
      check_refs(mutations.rows[i].old_value, StreamKind::Mutations,
                 mutations.lines[i],
                 "mutation " + std::to_string(mutations.rows[i].sequence));
      check_refs(mutations.rows[i].new_value, StreamKind::Mutations,
                 mutations.lines[i],
                 "mutation " + std::to_string(mutations.rows[i].sequence));
    }
  }

  // 9. incremental acyclicity over edges (created_at, then file order)
  {
    std::vector<std::size_t> order(edges.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return edges.rows[a].created_at < edges.rows[b].created_at;
                     });
    std::vector<std::pair<std::string, std::string>> sequence;
    sequence.reserve(order.size());
    for (std::size_t idx : order) {
      sequence.emplace_back(edges.rows[idx].source_node_id,
                            edges.rows[idx].target_node_id);
    }
    CycleCheckResult cycle = check_acyclic_incremental(sequence);
    if (!cycle.acyclic) {
      std::size_t row_idx = order[cycle.first_cycle_index];
      std::string witness;
      for (const auto& node : cycle.witness) {
        if (!witness.empty()) witness += " -> ";
        witness += node;
      }
      out.add(violation_code::kEdgeCycle, "edges",
              locator(StreamKind::Edges, edges.lines[row_idx]),
              "edge " + edges.rows[row_idx].source_node_id + " -> " +
                  edges.rows[row_idx].target_node_id +
                  " closes a cycle: " + witness);
    }
  }

  // 10. release-scope consistency
  if (!manifest.release_scope.consistent()) {
    out.add(violation_code::kReleaseScopeInconsistent, "", "manifest.json",
            "release scope kind " + manifest.release_scope.kind +
                " declares no omissions, license note, or redistribution "
                "limit");
  }

  bool all_empty = events.rows.empty() && nodes.rows.empty() &&
                   edges.rows.empty() && annotations.rows.empty() &&
                   mutations.rows.empty();
  if (all_empty && report.violations.empty()) {
    out.warn(violation_code::kEmptyBundle, "", "",
             "bundle carries zero rows in every stream");
  }

  return report;
}

ExtendsResult check_extends(const CardBundle& earlier, const CardBundle& later) {
  if (earlier.manifest.run_id != later.manifest.run_id) {
    throw RunIdMismatch(earlier.manifest.run_id, later.manifest.run_id);
  }
  ExtendsResult result;
  for (StreamKind kind : kAllStreams) {
    std::string a = serialize_stream(earlier, kind);
    std::string b = serialize_stream(later, kind);
    if (b.size() >= a.size() && std::string_view(b).substr(0, a.size()) == a) {
      continue;
    }
    // Find the first diverging row for the report.
    std::size_t line = 1;
    std::size_t ai = 0, bi = 0;
    while (ai < a.size() && bi < b.size()) {
      std::size_t ae = a.find('\n', ai);
      std::size_t be = b.find('\n', bi);
      if (ae == std::string::npos) ae = a.size();
      if (be == std::string::npos) be = b.size();
      if (std::string_view(a).substr(ai, ae - ai) !=
          std::string_view(b).substr(bi, be - bi)) {
        break;
      }
      ai = ae + 1;
      bi = be + 1;
      ++line;
    }
    result.violations.push_back(
        {violation_code::kAppendOnlyViolated, std::string(stream_name(kind)),
         std::string(stream_name(kind)) + ".jsonl:" + std::to_string(line),
         "later bundle is not a row-prefix extension of the earlier one "
         "(first divergence at row " +
             std::to_string(line) + ")"});
  }
  return result;
}

Json to_json(const ValidationReport& report) {
  Json j = Json::object();
  j["bundle_path"] = report.bundle_path;
  j["verdict"] = report.pass() ? "pass" : "fail";
  auto violations_json = [](const std::vector<Violation>& list) {
    Json arr = Json::array();
    for (const Violation& v : list) {
      arr.push_back(Json{{"code", v.code},
                         {"stream", v.stream},
                         {"row_locator", v.row_locator},
                         {"message", v.message}});
    }
    return arr;
  };
  j["violations"] = violations_json(report.violations);
  j["warnings"] = violations_json(report.warnings);
  Json stats = Json::object();
  stats["row_counts"] = report.stats.row_counts;
  stats["distinct_task_execution_ids"] = report.stats.distinct_task_execution_ids;
  stats["distinct_namespaces"] = report.stats.distinct_namespaces;
  j["stats"] = std::move(stats);
  return j;
}

std::string render_text(const ValidationReport& report) {
  std::ostringstream out;
  out << (report.pass() ? "pass" : "fail") << ", "
      << report.violations.size() << " violation"
      << (report.violations.size() == 1 ? "" : "s");
  if (!report.warnings.empty()) {
    out << ", " << report.warnings.size() << " warning"
        << (report.warnings.size() == 1 ? "" : "s");
  }
  out << "\n";
  out << "bundle: " << report.bundle_path << "\n";
  out << "rows:";
  for (const auto& [stream, count] : report.stats.row_counts) {
    out << " " << stream << "=" << count;
  }
  out << "\n";
  for (const Violation& v : report.violations) {
    out << "  [" << v.code << "] " << (v.row_locator.empty() ? v.stream : v.row_locator)
        << ": " << v.message << "\n";
  }
  for (const Violation& v : report.warnings) {
    out << "  (warning) [" << v.code << "] "
        << (v.row_locator.empty() ? v.stream : v.row_locator) << ": " << v.message
        << "\n";
  }
  return out.str();
}

}  // namespace rollcard
