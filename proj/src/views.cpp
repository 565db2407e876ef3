#include "rollcard/views.hpp"

#include <algorithm>
#include <map>

#include "rollcard/errors.hpp"
#include "rollcard/timestamp.hpp"

namespace rollcard {

namespace {

bool has_column(const ViewTable& table, const std::string& column) {
  return std::any_of(table.rows.begin(), table.rows.end(),
                     [&](const Record& row) { return row.contains(column); });
}

Json sorted_object(const std::map<std::string, Json>& entries) {
  Json out = Json::object();
  for (const auto& [key, value] : entries) out[key] = value;
  return out;
}

double number_or(const Json& j, const char* key, double fallback) {
  if (j.is_object() && j.contains(key) && j.at(key).is_number()) {
    return j.at(key).get<double>();
  }
  return fallback;
}

std::string text_of(const Record& row, const char* key) {
  if (row.contains(key) && row.at(key).is_string()) {
    return row.at(key).get<std::string>();
  }
  return {};
}

// Episode roster in node file order plus the root-node -> run mapping,
// from a single tracked read.
struct Roster {
  std::vector<std::pair<std::string, std::string>> episodes;  // run, status
  std::map<std::string, std::string> node_to_run;
};

Roster episode_roster(TrackedReader& reader) {
  Roster roster;
  for (const Record& node : reader.read_rows(
           "nodes", {"node_id", "instance_key", "status", "level"},
           Filter::compare("level", Filter::Op::Eq, 0))) {
    roster.episodes.emplace_back(text_of(node, "instance_key"),
                                 text_of(node, "status"));
    roster.node_to_run[text_of(node, "node_id")] = text_of(node, "instance_key");
  }
  return roster;
}

// Latest-sequence annotation payload per target id within one namespace.
std::map<std::string, Json> latest_by_target(const std::vector<Record>& rows) {
  std::map<std::string, std::pair<std::int64_t, Json>> latest;
  for (const Record& row : rows) {
    std::string target = row.value("target_id", "");
    std::int64_t seq = row.value("sequence", std::int64_t{0});
    auto it = latest.find(target);
    if (it == latest.end() || seq >= it->second.first) {
      latest[target] = {seq, row.value("payload", Json())};
    }
  }
  std::map<std::string, Json> out;
  for (auto& [target, entry] : latest) out[target] = std::move(entry.second);
  return out;
}

Filter ns_filter(const std::string& ns) {
  return Filter::compare("namespace", Filter::Op::Eq, ns);
}

Filter type_filter(const std::string& event_type) {
  return Filter::compare("event_type", Filter::Op::Eq, event_type);
}

const std::vector<std::string> kAnnotationCols = {
    "target_type", "target_id", "namespace", "sequence", "payload"};

// --- built-in projections ---

ViewTable project_final_score(const CardSource& source) {
  TrackedReader reader = open_tracked(source, "final_score");
  Roster roster = episode_roster(reader);
  const auto& episodes = roster.episodes;
  // Scores target the episode's root node.
  auto scores = latest_by_target(
      reader.read_rows("annotations", kAnnotationCols, ns_filter("score.final")));
  std::map<std::string, double> by_run;
  for (const auto& [node_id, payload] : scores) {
    auto it = roster.node_to_run.find(node_id);
    if (it != roster.node_to_run.end()) {
      by_run[it->second] = number_or(payload, "value", 0.0);
    }
  }

  reader.note_collapse("per-run collapse to terminal outcome");
  reader.declare_loss({kDurationErasure, "no timestamps survive"});
  reader.declare_loss({kPrecedenceErasure, "event order not carried"});
  reader.declare_loss({kWorkerIdentityErasure, "worker attribution dropped"});
  reader.declare_loss({kBranchErasure, "abandoned branches dropped"});
  reader.declare_loss({kToolChannelErasure, "tool calls and results dropped"});
  if (by_run.empty() && !episodes.empty()) {
    reader.note_omission("no score.final annotations; final_score column empty");
  }

  ViewTable table;
  table.view_name = "final_score";
  for (const auto& [run, status] : episodes) {
    Record row = Record::object();
    row["run_id"] = run;
    row["terminal_status"] = status;
    if (auto it = by_run.find(run); it != by_run.end()) {
      row["final_score"] = it->second;
    }
    table.rows.push_back(std::move(row));
  }
  table.provenance = reader.finish();
  return table;
}

ViewTable project_token_step_rl(const CardSource& source) {
  TrackedReader reader = open_tracked(source, "token_step_rl");
  Roster roster = episode_roster(reader);
  const auto& episodes = roster.episodes;
  std::map<std::string, std::string> status_of(episodes.begin(), episodes.end());

  auto rewards = reader.read_rows(
      "events",
      {"event_id", "task_execution_id", "sequence", "payload", "started_at",
       "completed_at"},
      type_filter("reward"));

  reader.note_collapse("events flattened to a per-step reward grid");
  reader.note_collapse("dependency edges dropped");
  reader.declare_loss({kWorkerIdentityErasure, "steps carry no worker key"});
  reader.declare_loss({kBranchErasure, "cancelled branches not visible"});
  reader.declare_loss(
      {kPrecedenceErasure, "only per-step duration survives, not the wall clock"});

  ViewTable table;
  table.view_name = "token_step_rl";
  std::map<std::string, std::int64_t> step_index;
  for (const Record& event : rewards) {
    std::string run = event.value("task_execution_id", "");
    Record row = Record::object();
    row["run_id"] = run;
    row["step_index"] = step_index[run]++;
    row["reward"] = number_or(event.value("payload", Json()), "reward", 0.0);
    auto status = status_of.find(run);
    row["terminal_status"] = status == status_of.end() ? "" : status->second;
    if (event.contains("started_at") && event.contains("completed_at")) {
      row["step_duration_ms"] =
          unix_millis(Timestamp{text_of(event, "completed_at")}) -
          unix_millis(Timestamp{text_of(event, "started_at")});
    }
    table.rows.push_back(std::move(row));
  }
  if (rewards.empty() && !episodes.empty()) {
    reader.note_omission("no reward events; step grid empty");
  }
  table.provenance = reader.finish();
  return table;
}

const std::vector<std::string> kActionKinds = {"message", "model_output",
                                               "tool_call", "tool_result"};

ViewTable project_per_worker(const CardSource& source) {
  TrackedReader reader = open_tracked(source, "per_worker");
  Json kinds = Json::array();
  for (const auto& kind : kActionKinds) kinds.push_back(kind);
  auto records = reader.read_rows(
      "events",
      {"event_id", "task_execution_id", "worker_binding_key", "sequence",
       "event_type", "payload", "started_at"},
      Filter::compare("event_type", Filter::Op::In, kinds));

  reader.note_collapse("per-worker grouping");
  reader.note_collapse("dependency edges dropped");
  reader.declare_loss({kBranchErasure, "task tree not represented"});
  reader.declare_loss(
      {kPrecedenceErasure,
       "cross-worker interleaving recoverable only from record timestamps"});

  // Stable grouping: episode (first appearance), then worker, then sequence.
  std::vector<std::string> run_order;
  std::map<std::string, std::map<std::string, std::vector<const Record*>>> grouped;
  for (const Record& record : records) {
    std::string run = record.value("task_execution_id", "");
    if (!grouped.contains(run)) run_order.push_back(run);
    grouped[run][record.value("worker_binding_key", "")].push_back(&record);
  }

  ViewTable table;
  table.view_name = "per_worker";
  for (const std::string& run : run_order) {
    for (auto& [worker, rows] : grouped[run]) {
      std::stable_sort(rows.begin(), rows.end(),
                       [](const Record* a, const Record* b) {
                         return a->value("sequence", std::int64_t{0}) <
                                b->value("sequence", std::int64_t{0});
                       });
      for (const Record* record : rows) {
        Record row = Record::object();
        row["run_id"] = run;
        row["worker_binding_key"] = worker;
        row["record_seq"] = record->value("sequence", std::int64_t{0});
        row["record_kind"] = record->value("event_type", "");
        if (record->contains("started_at")) {
          row["record_at"] = record->at("started_at");
        }
        row["record_payload"] = record->value("payload", Json());
        table.rows.push_back(std::move(row));
      }
    }
  }
  table.provenance = reader.finish();
  return table;
}

ViewTable project_tool_call_safety(const CardSource& source) {
  TrackedReader reader = open_tracked(source, "tool_call_safety");
  Roster roster = episode_roster(reader);
  const auto& episodes = roster.episodes;
  const auto& node_to_run = roster.node_to_run;

  auto calls = reader.read_rows(
      "events",
      {"event_id", "task_execution_id", "worker_binding_key", "sequence",
       "payload"},
      type_filter("tool_call"));
  auto refusal_rows =
      reader.read_rows("annotations", kAnnotationCols, ns_filter("safety.refusal"));
  auto forbidden_rows =
      reader.read_rows("annotations", kAnnotationCols, ns_filter("safety.forbidden"));

  reader.note_collapse("non-tool channels dropped");
  reader.declare_loss({kDurationErasure, "call timing not carried"});
  reader.declare_loss({kBranchErasure, "task structure flattened"});
  if (refusal_rows.empty() && !episodes.empty()) {
    reader.note_omission("no safety.refusal markers; text_safe unreported");
  }

  std::map<std::string, Json> refusal_by_node = latest_by_target(refusal_rows);
  std::set<std::string> forbidden_events;
  for (const Record& row : forbidden_rows) {
    Json payload = row.value("payload", Json());
    if (payload.is_object() && payload.value("forbidden", false)) {
      forbidden_events.insert(row.value("target_id", ""));
    }
  }

  std::map<std::string, Json> calls_by_run;
  std::map<std::string, std::int64_t> forbidden_count;
  for (const Record& call : calls) {
    std::string run = call.value("task_execution_id", "");
    bool forbidden = forbidden_events.contains(call.value("event_id", ""));
    if (forbidden) ++forbidden_count[run];
    if (!calls_by_run.contains(run)) calls_by_run[run] = Json::array();
    Json entry = Json::object();
    entry["seq"] = call.value("sequence", std::int64_t{0});
    entry["worker"] = call.value("worker_binding_key", "");
    Json payload = call.value("payload", Json());
    entry["name"] = payload.is_object() ? payload.value("name", "") : "";
    entry["forbidden"] = forbidden;
    calls_by_run[run].push_back(std::move(entry));
  }

  ViewTable table;
  table.view_name = "tool_call_safety";
  for (const auto& [run, status] : episodes) {
    (void)status;
    Record row = Record::object();
    row["run_id"] = run;
    // Refusal markers are written on the episode's root node.
    for (const auto& [node, payload] : refusal_by_node) {
      auto it = node_to_run.find(node);
      if (it != node_to_run.end() && it->second == run && payload.is_object()) {
        row["text_safe"] = payload.value("text_safe", false);
        row["refused"] = payload.value("refused", false);
        break;
      }
    }
    row["tool_call_count"] =
        calls_by_run.contains(run)
            ? static_cast<std::int64_t>(calls_by_run[run].size())
            : 0;
    row["forbidden_call_count"] =
        forbidden_count.contains(run) ? forbidden_count[run] : 0;
    row["calls"] = calls_by_run.contains(run) ? calls_by_run[run] : Json::array();
    table.rows.push_back(std::move(row));
  }
  table.provenance = reader.finish();
  return table;
}

ViewTable project_proof_search_summary(const CardSource& source) {
  TrackedReader reader = open_tracked(source, "proof_search_summary");
  Roster roster = episode_roster(reader);
  const auto& episodes = roster.episodes;
  const auto& node_to_run = roster.node_to_run;
  auto steps = reader.read_rows(
      "events",
      {"event_id", "task_execution_id", "sequence", "started_at", "completed_at"},
      type_filter("proof_step"));
  auto proof_texts = latest_by_target(
      reader.read_rows("annotations", kAnnotationCols, ns_filter("proof.text")));

  reader.note_collapse("proof search collapsed to realised step count");
  reader.declare_loss({kWorkerIdentityErasure, "prover identity dropped"});
  reader.declare_loss({kBranchErasure, "failed tactic branches not preserved"});
  reader.declare_loss({kToolChannelErasure, "tool interactions dropped"});
  if (steps.empty() && !episodes.empty()) {
    reader.note_omission("no proof_step events; realised_steps is zero");
  }

  std::map<std::string, std::int64_t> counts;
  std::map<std::string, std::int64_t> elapsed;
  for (const Record& step : steps) {
    std::string run = step.value("task_execution_id", "");
    ++counts[run];
    if (step.contains("started_at") && step.contains("completed_at")) {
      elapsed[run] += unix_millis(Timestamp{text_of(step, "completed_at")}) -
                      unix_millis(Timestamp{text_of(step, "started_at")});
    }
  }
  std::map<std::string, std::string> text_ref;
  for (const auto& [node, payload] : proof_texts) {
    auto it = node_to_run.find(node);
    if (it == node_to_run.end() || !payload.is_object()) continue;
    if (payload.contains("$blob") && payload.at("$blob").is_object()) {
      text_ref[it->second] = payload.at("$blob").value("digest", "");
    }
  }

  ViewTable table;
  table.view_name = "proof_search_summary";
  for (const auto& [run, status] : episodes) {
    Record row = Record::object();
    row["run_id"] = run;
    row["outcome"] = status == "succeeded" ? "proved" : "failed";
    row["realised_steps"] = counts.contains(run) ? counts[run] : 0;
    row["elapsed_time_ms"] = elapsed.contains(run) ? elapsed[run] : 0;
    if (auto it = text_ref.find(run); it != text_ref.end()) {
      row["proof_text_ref"] = it->second;
    }
    table.rows.push_back(std::move(row));
  }
  table.provenance = reader.finish();
  return table;
}

bool extends_path(const Json& prev, const Json& next) {
  if (!prev.is_array() || !next.is_array()) return false;
  if (next.size() != prev.size() + 1) return false;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    if (next[i] != prev[i]) return false;
  }
  return true;
}

ViewTable project_search_tree(const CardSource& source) {
  TrackedReader reader = open_tracked(source, "search_tree");
  auto snapshots = reader.read_rows(
      "events",
      {"event_id", "task_execution_id", "sequence", "payload", "started_at"},
      type_filter("search_step"));

  reader.note_collapse("rollout collapsed to action-path prefixes");
  reader.declare_loss({kWorkerIdentityErasure, "searcher identity dropped"});
  reader.declare_loss({kToolChannelErasure, "tool interactions dropped"});
  reader.declare_loss({kDurationErasure, "only snapshot capture times survive"});

  ViewTable table;
  table.view_name = "search_tree";
  std::map<std::string, std::int64_t> step_of;
  std::map<std::string, Json> prev_path;
  std::map<std::string, std::int64_t> backtracks;
  for (const Record& snap : snapshots) {
    std::string run = snap.value("task_execution_id", "");
    Json payload = snap.value("payload", Json());
    Json path = payload.is_object() ? payload.value("path", Json::array())
                                    : Json::array();
    std::int64_t step = step_of[run]++;
    if (step > 0 && !extends_path(prev_path[run], path)) ++backtracks[run];
    prev_path[run] = path;

    Record row = Record::object();
    row["run_id"] = run;
    row["step"] = step;
    row["path"] = path;
    row["depth"] = static_cast<std::int64_t>(path.size());
    row["backtrack_count"] = backtracks[run];
    if (payload.is_object() && payload.contains("reward")) {
      row["reward_snapshot"] = payload.at("reward");
    }
    if (snap.contains("started_at")) row["snapshot_at"] = snap.at("started_at");
    table.rows.push_back(std::move(row));
  }
  if (snapshots.empty()) {
    reader.note_omission("no search_step events; table empty");
  }
  table.provenance = reader.finish();
  return table;
}

ViewTable project_custom(const CardSource& source, const ViewSpec& spec) {
  TrackedReader reader = open_tracked(source, spec.name);
  if (!source.has_stream(spec.custom_stream)) {
    throw MissingSourceField(spec.custom_stream);
  }
  std::set<std::string> known = source.columns(spec.custom_stream);
  for (const std::string& column : spec.custom_columns) {
    if (!known.contains(column)) {
      throw MissingSourceField(spec.custom_stream + "." + column);
    }
  }
  ViewTable table;
  table.view_name = spec.name;
  table.rows =
      reader.read_rows(spec.custom_stream, spec.custom_columns, spec.custom_filter);
  table.provenance = reader.finish();
  return table;
}

}  // namespace

ViewSpec ViewSpec::builtin_view(const std::string& name) {
  if (std::find(kBuiltinViews.begin(), kBuiltinViews.end(), name) ==
      kBuiltinViews.end()) {
    throw MissingSourceField("no built-in view named " + name);
  }
  ViewSpec spec;
  spec.name = name;
  spec.builtin = true;
  return spec;
}

ViewSpec ViewSpec::custom(std::string name, std::string stream,
                          std::vector<std::string> columns, Filter filter) {
  ViewSpec spec;
  spec.name = std::move(name);
  spec.builtin = false;
  spec.custom_stream = std::move(stream);
  spec.custom_columns = std::move(columns);
  spec.custom_filter = std::move(filter);
  return spec;
}

ViewTable project(const CardSource& source, const ViewSpec& spec) {
  if (!spec.builtin) return project_custom(source, spec);
  if (spec.name == "final_score") return project_final_score(source);
  if (spec.name == "token_step_rl") return project_token_step_rl(source);
  if (spec.name == "per_worker") return project_per_worker(source);
  if (spec.name == "tool_call_safety") return project_tool_call_safety(source);
  if (spec.name == "proof_search_summary") {
    return project_proof_search_summary(source);
  }
  if (spec.name == "search_tree") return project_search_tree(source);
  throw MissingSourceField("no built-in view named " + spec.name);
}

ViewTable project(const CardBundle& card, const ViewSpec& spec) {
  FullCardSource source(card);
  return project(source, spec);
}

std::string serialize_table(const ViewTable& table) {
  std::string out;
  for (const Record& row : table.rows) {
    out += row.dump();
    out.push_back('\n');
  }
  return out;
}

std::string_view preservation_name(Preservation p) {
  switch (p) {
    case Preservation::Preserved: return "preserved";
    case Preservation::Partial: return "partial";
    case Preservation::Erased: return "erased";
  }
  return "";
}

// --- quantity oracles over full cards ---

namespace {

struct EpisodeIndex {
  std::vector<std::string> runs;                      // node order
  std::map<std::string, std::string> status;          // run -> terminal status
  std::map<std::string, std::string> node_to_run;     // root node -> run
  std::map<std::string, std::vector<const Record*>> events;  // run -> events
};

EpisodeIndex index_card(const CardSource& source) {
  EpisodeIndex idx;
  for (const Record& node : source.records("nodes")) {
    if (node.value("level", std::int64_t{-1}) != 0) continue;
    std::string run = node.value("instance_key", "");
    idx.runs.push_back(run);
    idx.status[run] = node.value("status", "");
    idx.node_to_run[node.value("node_id", "")] = run;
  }
  for (const Record& event : source.records("events")) {
    idx.events[event.value("task_execution_id", "")].push_back(&event);
  }
  return idx;
}

Json full_return(const CardSource& source, const EpisodeIndex& idx) {
  std::map<std::string, Json> out;
  std::map<std::string, std::pair<std::int64_t, double>> latest;
  for (const Record& row : source.records("annotations")) {
    if (row.value("namespace", "") != "score.final") continue;
    std::string node = row.value("target_id", "");
    auto run = idx.node_to_run.find(node);
    if (run == idx.node_to_run.end()) continue;
    std::int64_t seq = row.value("sequence", std::int64_t{0});
    auto it = latest.find(run->second);
    if (it == latest.end() || seq >= it->second.first) {
      latest[run->second] = {seq,
                             number_or(row.value("payload", Json()), "value", 0.0)};
    }
  }
  for (const auto& [run, entry] : latest) out[run] = entry.second;
  return sorted_object(out);
}

Json full_timing(const CardSource& source, const EpisodeIndex& idx) {
  (void)source;
  std::map<std::string, Json> out;
  for (const std::string& run : idx.runs) {
    auto it = idx.events.find(run);
    if (it == idx.events.end() || it->second.empty()) continue;
    std::int64_t lo = 0, hi = 0;
    bool first = true;
    for (const Record* event : it->second) {
      if (event->contains("started_at")) {
        std::int64_t s = unix_millis(Timestamp{text_of(*event, "started_at")});
        std::int64_t e = event->contains("completed_at")
                             ? unix_millis(Timestamp{text_of(*event, "completed_at")})
                             : s;
        if (first) {
          lo = s;
          hi = e;
          first = false;
        } else {
          lo = std::min(lo, s);
          hi = std::max(hi, e);
        }
      }
    }
    if (!first) out[run] = hi - lo;
  }
  return sorted_object(out);
}

Json full_worker_flow(const CardSource& source, const EpisodeIndex& idx) {
  (void)source;
  std::map<std::string, Json> out;
  for (const std::string& run : idx.runs) {
    auto it = idx.events.find(run);
    if (it == idx.events.end()) continue;
    std::map<std::string, Json> flows;
    for (const Record* event : it->second) {
      std::string kind = event->value("event_type", "");
      if (std::find(kActionKinds.begin(), kActionKinds.end(), kind) ==
          kActionKinds.end()) {
        continue;
      }
      std::string worker = event->value("worker_binding_key", "");
      if (!flows.contains(worker)) flows[worker] = Json::array();
      flows[worker].push_back(kind);
    }
    if (!flows.empty()) out[run] = sorted_object(flows);
  }
  return sorted_object(out);
}

Json full_tool_safety(const CardSource& source, const EpisodeIndex& idx) {
  std::map<std::string, bool> text_safe;
  std::map<std::string, std::pair<std::int64_t, bool>> latest_refusal;
  std::set<std::string> forbidden_events;
  for (const Record& row : source.records("annotations")) {
    std::string ns = row.value("namespace", "");
    if (ns == "safety.refusal") {
      auto run = idx.node_to_run.find(row.value("target_id", ""));
      if (run == idx.node_to_run.end()) continue;
      std::int64_t seq = row.value("sequence", std::int64_t{0});
      auto it = latest_refusal.find(run->second);
      if (it == latest_refusal.end() || seq >= it->second.first) {
        latest_refusal[run->second] = {
            seq, row.value("payload", Json()).value("text_safe", false)};
      }
    } else if (ns == "safety.forbidden") {
      if (row.value("payload", Json()).value("forbidden", false)) {
        forbidden_events.insert(row.value("target_id", ""));
      }
    }
  }
  for (const auto& [run, entry] : latest_refusal) text_safe[run] = entry.second;

  std::map<std::string, Json> out;
  for (const std::string& run : idx.runs) {
    std::int64_t forbidden = 0;
    auto it = idx.events.find(run);
    if (it != idx.events.end()) {
      for (const Record* event : it->second) {
        if (event->value("event_type", "") == "tool_call" &&
            forbidden_events.contains(event->value("event_id", ""))) {
          ++forbidden;
        }
      }
    }
    Json entry = Json::object();
    entry["forbidden_calls"] = forbidden;
    entry["text_safe"] = text_safe.contains(run) ? text_safe[run] : false;
    out[run] = std::move(entry);
  }
  return sorted_object(out);
}

Json full_proof_cost(const CardSource& source, const EpisodeIndex& idx) {
  (void)source;
  std::map<std::string, Json> out;
  for (const std::string& run : idx.runs) {
    std::int64_t steps = 0, elapsed = 0;
    auto it = idx.events.find(run);
    if (it != idx.events.end()) {
      for (const Record* event : it->second) {
        if (event->value("event_type", "") != "proof_step") continue;
        ++steps;
        if (event->contains("started_at") && event->contains("completed_at")) {
          elapsed += unix_millis(Timestamp{text_of(*event, "completed_at")}) -
                     unix_millis(Timestamp{text_of(*event, "started_at")});
        }
      }
    }
    if (steps > 0) {
      Json entry = Json::object();
      entry["elapsed_ms"] = elapsed;
      entry["realised_steps"] = steps;
      out[run] = std::move(entry);
    }
  }
  return sorted_object(out);
}

Json shape_from_paths(const std::vector<Json>& paths) {
  std::set<std::string> atoms;
  std::int64_t max_depth = 0;
  std::int64_t backtracks = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Json& path = paths[i];
    if (!path.is_array()) continue;
    max_depth = std::max(max_depth, static_cast<std::int64_t>(path.size()));
    for (const Json& atom : path) {
      if (atom.is_string()) atoms.insert(atom.get<std::string>());
    }
    if (i > 0 && !extends_path(paths[i - 1], path)) ++backtracks;
  }
  Json entry = Json::object();
  entry["backtracks"] = backtracks;
  entry["max_depth"] = max_depth;
  entry["unique_actions"] = static_cast<std::int64_t>(atoms.size());
  return entry;
}

Json full_search_shape(const CardSource& source, const EpisodeIndex& idx) {
  (void)source;
  std::map<std::string, Json> out;
  for (const std::string& run : idx.runs) {
    std::vector<Json> paths;
    auto it = idx.events.find(run);
    if (it != idx.events.end()) {
      for (const Record* event : it->second) {
        if (event->value("event_type", "") != "search_step") continue;
        Json payload = event->value("payload", Json());
        paths.push_back(payload.is_object() ? payload.value("path", Json::array())
                                            : Json::array());
      }
    }
    if (!paths.empty()) out[run] = shape_from_paths(paths);
  }
  return sorted_object(out);
}

// --- quantity adapters over view tables ---

enum class Basis { Sufficient, Proxy, None };

struct ViewComputation {
  Basis basis = Basis::None;
  Json value;
  std::string note;
};

template <typename Fn>
std::map<std::string, std::vector<const Record*>> rows_by_run(
    const ViewTable& table, Fn&& keep) {
  std::map<std::string, std::vector<const Record*>> grouped;
  for (const Record& row : table.rows) {
    if (!keep(row)) continue;
    grouped[row.value("run_id", "")].push_back(&row);
  }
  return grouped;
}

ViewComputation view_return(const ViewTable& table) {
  if (has_column(table, "final_score")) {
    std::map<std::string, Json> out;
    for (const Record& row : table.rows) {
      if (row.contains("final_score")) {
        out[row.value("run_id", "")] = row.at("final_score");
      }
    }
    return {Basis::Sufficient, sorted_object(out), "final_score column"};
  }
  if (has_column(table, "reward")) {
    std::map<std::string, double> sums;
    for (const Record& row : table.rows) {
      if (row.contains("reward")) {
        sums[row.value("run_id", "")] += row.at("reward").get<double>();
      }
    }
    std::map<std::string, Json> out;
    for (const auto& [run, sum] : sums) out[run] = sum;
    return {Basis::Sufficient, sorted_object(out), "sum of per-step rewards"};
  }
  if (has_column(table, "outcome")) {
    std::map<std::string, Json> out;
    for (const Record& row : table.rows) {
      out[row.value("run_id", "")] =
          row.value("outcome", "") == "proved" ? 1.0 : 0.0;
    }
    return {Basis::Sufficient, sorted_object(out), "binary outcome column"};
  }
  if (has_column(table, "record_payload")) {
    std::map<std::string, double> sums;
    std::map<std::string, bool> any;
    for (const Record& row : table.rows) {
      std::string run = row.value("run_id", "");
      Json payload = row.value("record_payload", Json());
      if (payload.is_object() && payload.contains("reward") &&
          payload.at("reward").is_number()) {
        sums[run] += payload.at("reward").get<double>();
        any[run] = true;
      }
    }
    std::map<std::string, Json> out;
    for (const auto& [run, flag] : any) {
      if (flag) out[run] = sums[run];
    }
    return {Basis::Proxy, sorted_object(out),
            "proxy: rewards embedded in worker-visible payloads miss "
            "environment-level reward events"};
  }
  if (has_column(table, "reward_snapshot")) {
    std::map<std::string, Json> out;
    for (const Record& row : table.rows) {
      if (row.contains("reward_snapshot")) {
        out[row.value("run_id", "")] = row.at("reward_snapshot");
      }
    }
    return {Basis::Proxy, sorted_object(out),
            "proxy: last reward snapshot is a search-time estimate, not the "
            "final score"};
  }
  return {};
}

ViewComputation view_timing(const ViewTable& table) {
  if (has_column(table, "step_duration_ms")) {
    std::map<std::string, std::int64_t> sums;
    for (const Record& row : table.rows) {
      if (row.contains("step_duration_ms")) {
        sums[row.value("run_id", "")] +=
            row.at("step_duration_ms").get<std::int64_t>();
      }
    }
    std::map<std::string, Json> out;
    for (const auto& [run, sum] : sums) out[run] = sum;
    return {Basis::Proxy, sorted_object(out),
            "proxy: summed step durations omit inter-step gaps"};
  }
  if (has_column(table, "elapsed_time_ms")) {
    std::map<std::string, Json> out;
    for (const Record& row : table.rows) {
      if (row.contains("elapsed_time_ms")) {
        out[row.value("run_id", "")] = row.at("elapsed_time_ms");
      }
    }
    return {Basis::Proxy, sorted_object(out),
            "proxy: realised search time, not the wall-clock span"};
  }
  auto span_of = [&](const char* column) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> spans;
    for (const Record& row : table.rows) {
      if (!row.contains(column)) continue;
      std::int64_t at = unix_millis(Timestamp{row.at(column).get<std::string>()});
      std::string run = row.value("run_id", "");
      auto it = spans.find(run);
      if (it == spans.end()) {
        spans[run] = {at, at};
      } else {
        it->second.first = std::min(it->second.first, at);
        it->second.second = std::max(it->second.second, at);
      }
    }
    std::map<std::string, Json> out;
    for (const auto& [run, span] : spans) out[run] = span.second - span.first;
    return sorted_object(out);
  };
  if (has_column(table, "record_at")) {
    return {Basis::Proxy, span_of("record_at"),
            "proxy: span of record start times drops trailing durations"};
  }
  if (has_column(table, "snapshot_at")) {
    return {Basis::Proxy, span_of("snapshot_at"),
            "proxy: span of snapshot capture times covers only the search "
            "phase"};
  }
  return {};
}

ViewComputation view_worker_flow(const ViewTable& table) {
  if (has_column(table, "worker_binding_key") && has_column(table, "record_kind")) {
    auto grouped = rows_by_run(table, [](const Record&) { return true; });
    std::map<std::string, Json> out;
    for (auto& [run, rows] : grouped) {
      std::map<std::string, Json> flows;
      std::stable_sort(rows.begin(), rows.end(),
                       [](const Record* a, const Record* b) {
                         return a->value("record_seq", std::int64_t{0}) <
                                b->value("record_seq", std::int64_t{0});
                       });
      for (const Record* row : rows) {
        std::string worker = row->value("worker_binding_key", "");
        if (!flows.contains(worker)) flows[worker] = Json::array();
        flows[worker].push_back(row->value("record_kind", ""));
      }
      if (!flows.empty()) out[run] = sorted_object(flows);
    }
    return {Basis::Sufficient, sorted_object(out),
            "per-worker ordered records"};
  }
  if (has_column(table, "calls")) {
    std::map<std::string, Json> out;
    for (const Record& row : table.rows) {
      if (!row.contains("calls") || !row.at("calls").is_array() ||
          row.at("calls").empty()) {
        continue;
      }
      std::map<std::string, Json> flows;
      for (const Json& call : row.at("calls")) {
        std::string worker = call.value("worker", "");
        if (!flows.contains(worker)) flows[worker] = Json::array();
        flows[worker].push_back("tool_call");
      }
      out[row.value("run_id", "")] = sorted_object(flows);
    }
    return {Basis::Proxy, sorted_object(out),
            "proxy: only tool-call records carry worker identity"};
  }
  return {};
}

ViewComputation view_tool_safety(const ViewTable& table) {
  if (has_column(table, "forbidden_call_count")) {
    std::map<std::string, Json> out;
    for (const Record& row : table.rows) {
      Json entry = Json::object();
      entry["forbidden_calls"] = row.value("forbidden_call_count", std::int64_t{0});
      entry["text_safe"] = row.value("text_safe", false);
      out[row.value("run_id", "")] = std::move(entry);
    }
    return {Basis::Sufficient, sorted_object(out),
            "forbidden flags and refusal markers"};
  }
  if (has_column(table, "reward")) {
    std::map<std::string, std::int64_t> negatives;
    for (const Record& row : table.rows) {
      if (row.contains("reward") && row.at("reward").get<double>() < 0) {
        ++negatives[row.value("run_id", "")];
      }
    }
    std::map<std::string, Json> out;
    for (const auto& [run, count] : negatives) {
      out[run] = Json{{"negative_reward_steps", count}};
    }
    return {Basis::Proxy, sorted_object(out),
            "proxy: penalty-shaped rewards hint at unsafe steps but carry no "
            "forbidden flags"};
  }
  if (has_column(table, "record_kind")) {
    std::map<std::string, std::int64_t> seen;
    for (const Record& row : table.rows) {
      if (row.value("record_kind", "") == "tool_call") {
        ++seen[row.value("run_id", "")];
      }
    }
    std::map<std::string, Json> out;
    for (const auto& [run, count] : seen) {
      out[run] = Json{{"tool_calls_seen", count}};
    }
    return {Basis::Proxy, sorted_object(out),
            "proxy: tool calls are visible but safety flags are not"};
  }
  return {};
}

ViewComputation view_proof_cost(const ViewTable& table) {
  if (has_column(table, "realised_steps") && has_column(table, "elapsed_time_ms")) {
    std::map<std::string, Json> out;
    for (const Record& row : table.rows) {
      if (row.value("realised_steps", std::int64_t{0}) == 0) continue;
      Json entry = Json::object();
      entry["elapsed_ms"] = row.value("elapsed_time_ms", std::int64_t{0});
      entry["realised_steps"] = row.value("realised_steps", std::int64_t{0});
      out[row.value("run_id", "")] = std::move(entry);
    }
    return {Basis::Sufficient, sorted_object(out),
            "realised steps and elapsed time columns"};
  }
  return {};
}

ViewComputation view_search_shape(const ViewTable& table) {
  if (has_column(table, "path")) {
    auto grouped = rows_by_run(table, [](const Record& row) {
      return row.contains("path");
    });
    std::map<std::string, Json> out;
    for (auto& [run, rows] : grouped) {
      std::vector<Json> paths;
      for (const Record* row : rows) paths.push_back(row->at("path"));
      out[run] = shape_from_paths(paths);
    }
    return {Basis::Sufficient, sorted_object(out), "action-path prefixes"};
  }
  if (has_column(table, "realised_steps")) {
    std::map<std::string, Json> out;
    for (const Record& row : table.rows) {
      if (row.value("realised_steps", std::int64_t{0}) == 0) continue;
      out[row.value("run_id", "")] =
          Json{{"steps", row.value("realised_steps", std::int64_t{0})}};
    }
    return {Basis::Proxy, sorted_object(out),
            "proxy: step counts bound search size without paths or depth"};
  }
  return {};
}

ViewComputation compute_from_view(const ViewTable& table,
                                  const std::string& quantity) {
  if (quantity == "return") return view_return(table);
  if (quantity == "timing") return view_timing(table);
  if (quantity == "worker_flow") return view_worker_flow(table);
  if (quantity == "tool_safety") return view_tool_safety(table);
  if (quantity == "proof_cost") return view_proof_cost(table);
  if (quantity == "search_shape") return view_search_shape(table);
  throw UnknownQuantity(quantity);
}

}  // namespace

Json compute_quantity(const CardSource& source, const std::string& quantity) {
  EpisodeIndex idx = index_card(source);
  if (quantity == "return") return full_return(source, idx);
  if (quantity == "timing") return full_timing(source, idx);
  if (quantity == "worker_flow") return full_worker_flow(source, idx);
  if (quantity == "tool_safety") return full_tool_safety(source, idx);
  if (quantity == "proof_cost") return full_proof_cost(source, idx);
  if (quantity == "search_shape") return full_search_shape(source, idx);
  throw UnknownQuantity(quantity);
}

PreservationStatus preservation_status(const CardSource& source,
                                       const ViewSpec& spec,
                                       const std::string& quantity) {
  Json full = compute_quantity(source, quantity);
  ViewTable table = project(source, spec);
  ViewComputation from_view = compute_from_view(table, quantity);

  PreservationStatus status;
  status.quantity = quantity;
  if (from_view.basis == Basis::None) {
    status.status = Preservation::Erased;
    status.note = "view carries no field related to " + quantity;
    return status;
  }
  if (from_view.value == full) {
    status.status = Preservation::Preserved;
    status.note = from_view.note;
    return status;
  }
  status.status = Preservation::Partial;
  status.note = from_view.note;
  return status;
}

PreservationStatus preservation_status(const CardBundle& card,
                                       const ViewSpec& spec,
                                       const std::string& quantity) {
  FullCardSource source(card);
  return preservation_status(source, spec, quantity);
}

}  // namespace rollcard
