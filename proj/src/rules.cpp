#include "rollcard/rules.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "rollcard/errors.hpp"

namespace rollcard {

std::string_view raw_outcome_name(RawOutcome raw) {
  switch (raw) {
    case RawOutcome::Scored: return "scored";
    case RawOutcome::MissingArtifact: return "missing_artifact";
    case RawOutcome::ErrorStatus: return "error_status";
    case RawOutcome::Unparseable: return "unparseable";
  }
  return "";
}

std::string_view bucket_name(Bucket bucket) {
  switch (bucket) {
    case Bucket::Scored: return "scored";
    case Bucket::Failed: return "failed";
    case Bucket::Errored: return "errored";
    case Bucket::Skipped: return "skipped";
    case Bucket::Excluded: return "excluded";
  }
  return "";
}

void RuleRegistry::register_rule(ReportingRuleEntry entry) {
  for (const ReportingRuleEntry& existing : entries_) {
    if (existing.name == entry.name && existing.version == entry.version) {
      throw DuplicateRule(entry.name, entry.version);
    }
  }
  entries_.push_back(std::move(entry));
}

const ReportingRuleEntry* RuleRegistry::lookup(const std::string& name,
                                               const std::string& version) const {
  for (const ReportingRuleEntry& entry : entries_) {
    if (entry.name == name && entry.version == version) return &entry;
  }
  return nullptr;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

namespace {

// One card's raw outcome before policy application.
struct Extraction {
  RawOutcome raw = RawOutcome::Scored;
  double value = 0.0;
  std::string label;
  std::optional<std::string> group;
};

struct Disposition {
  Bucket bucket = Bucket::Scored;
  std::optional<double> contribution;
  bool coerced = false;
};

Disposition apply_policy(const Extraction& e, const FailurePolicy& policy,
                         const std::string& run_id) {
  switch (e.raw) {
    case RawOutcome::Scored:
      return {Bucket::Scored, e.value, false};
    case RawOutcome::MissingArtifact:
      if (policy.on_missing_artifact.kind ==
          MissingArtifactPolicy::Kind::CountAsFailure) {
        return {Bucket::Failed, 0.0, false};
      }
      return {Bucket::Excluded, std::nullopt, false};
    case RawOutcome::ErrorStatus:
      switch (policy.on_error_status.kind) {
        case ErrorStatusPolicy::Kind::CountAsFailure:
          return {Bucket::Errored, 0.0, false};
        case ErrorStatusPolicy::Kind::ExcludeFromDenominator:
          return {Bucket::Excluded, std::nullopt, false};
        case ErrorStatusPolicy::Kind::CoerceToFixed:
          return {Bucket::Errored, policy.on_error_status.fixed_value, true};
        case ErrorStatusPolicy::Kind::Propagate:
          throw PropagatedErrorStatus(run_id);
      }
      return {};
    case RawOutcome::Unparseable:
      switch (policy.on_unparseable_output.kind) {
        case UnparseablePolicy::Kind::CountAsFailure:
          return {Bucket::Failed, 0.0, false};
        case UnparseablePolicy::Kind::CoerceToFixed:
          return {Bucket::Scored, policy.on_unparseable_output.fixed_value, true};
        case UnparseablePolicy::Kind::MarkSkipped:
          return {Bucket::Skipped, std::nullopt, false};
      }
      return {};
  }
  return {};
}

void merge_drops(DropsManifest& into, const DropsManifest& from) {
  into.footprint.streams_opened.insert(from.footprint.streams_opened.begin(),
                                       from.footprint.streams_opened.end());
  into.footprint.fields_read.insert(from.footprint.fields_read.begin(),
                                    from.footprint.fields_read.end());
  for (const auto& [stream, access] : from.footprint.rows_read) {
    RowAccess& target = into.footprint.rows_read[stream];
    target.count += access.count;
    for (const std::string& selector : access.selectors) {
      if (std::find(target.selectors.begin(), target.selectors.end(),
                    selector) == target.selectors.end()) {
        target.selectors.push_back(selector);
      }
    }
  }
  for (const FilterRecord& record : from.footprint.filters_applied) {
    auto it = std::find_if(into.footprint.filters_applied.begin(),
                           into.footprint.filters_applied.end(),
                           [&](const FilterRecord& have) {
                             return have.stream == record.stream &&
                                    have.description == record.description;
                           });
    if (it == into.footprint.filters_applied.end()) {
      into.footprint.filters_applied.push_back(record);
    } else {
      it->matched += record.matched;
      it->total += record.total;
    }
  }
  for (const std::string& collapse : from.footprint.collapses) {
    if (std::find(into.footprint.collapses.begin(),
                  into.footprint.collapses.end(),
                  collapse) == into.footprint.collapses.end()) {
      into.footprint.collapses.push_back(collapse);
    }
  }
  for (const SemanticLossClass& loss : from.declared_losses) {
    if (std::find(into.declared_losses.begin(), into.declared_losses.end(),
                  loss) == into.declared_losses.end()) {
      into.declared_losses.push_back(loss);
    }
  }
  into.complement.insert(from.complement.begin(), from.complement.end());
}

// Shared per-card scaffolding: the root episode's status plus the latest
// payload in each namespace the rule reads, all through one tracked reader.
struct CardFacts {
  std::string run_id;
  std::string status;
  std::map<std::string, Json> latest;  // namespace -> latest root payload
  std::vector<Json> tool_calls;        // ordered tool_call payloads
  DropsManifest drops;
};

CardFacts read_card_facts(const CardBundle& card, const std::string& rule_name,
                          const std::vector<std::string>& namespaces,
                          bool want_tool_calls) {
  FullCardSource source(card);
  TrackedReader reader = open_tracked(source, rule_name);

  CardFacts facts;
  facts.run_id = card.manifest.run_id;

  std::string root_node;
  auto nodes = reader.read_rows("nodes",
                                {"node_id", "instance_key", "status", "level"},
                                Filter::compare("level", Filter::Op::Eq, 0));
  if (!nodes.empty()) {
    root_node = nodes.front().value("node_id", "");
    facts.status = nodes.front().value("status", "");
  }

  if (!namespaces.empty()) {
    Json ns_list = Json::array();
    for (const std::string& ns : namespaces) ns_list.push_back(ns);
    auto annotations = reader.read_rows(
        "annotations",
        {"target_type", "target_id", "namespace", "sequence", "payload"},
        Filter::compare("namespace", Filter::Op::In, ns_list));
    std::map<std::string, std::int64_t> best;
    for (const Record& row : annotations) {
      if (row.value("target_id", "") != root_node) continue;
      std::string ns = row.value("namespace", "");
      std::int64_t seq = row.value("sequence", std::int64_t{0});
      auto it = best.find(ns);
      if (it == best.end() || seq >= it->second) {
        best[ns] = seq;
        facts.latest[ns] = row.value("payload", Json());
      }
    }
  }

  if (want_tool_calls) {
    for (const Record& event : reader.read_rows(
             "events", {"event_id", "task_execution_id", "sequence", "payload"},
             Filter::compare("event_type", Filter::Op::Eq, "tool_call"))) {
      facts.tool_calls.push_back(event.value("payload", Json()));
    }
  }

  facts.drops = reader.finish();
  return facts;
}

std::optional<std::string> read_group(const CardFacts& facts) {
  auto it = facts.latest.find("grading.group");
  if (it == facts.latest.end() || !it->second.is_object()) return std::nullopt;
  if (!it->second.contains("group")) return std::nullopt;
  return it->second.at("group").get<std::string>();
}

std::string trim_number(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

ScoreReport assemble(const std::string& rule_name,
                     const ReportingRuleEntry& entry,
                     std::vector<std::pair<Extraction, DropsManifest>> rows,
                     std::vector<std::string> run_ids) {
  ScoreReport report;
  report.rule_name = entry.name;
  report.rule_version = entry.version;
  report.metric = entry.output_target.empty() ? rule_name : entry.output_target;
  report.drops.rule_or_view_name = entry.ref();

  // Deterministic reduction order: sorted by run id.
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return run_ids[a] < run_ids[b];
  });

  report.accounting.attempted = static_cast<std::int64_t>(rows.size());
  for (std::size_t idx : order) {
    const Extraction& extraction = rows[idx].first;
    merge_drops(report.drops, rows[idx].second);
    Disposition d = apply_policy(extraction, entry.policy, run_ids[idx]);
    PerRun run;
    run.run_id = run_ids[idx];
    run.raw = extraction.raw;
    run.label = extraction.label;
    run.bucket = d.bucket;
    run.contribution = d.contribution;
    run.coerced = d.coerced;
    run.group = extraction.group;
    report.per_run.push_back(std::move(run));
  }

  // Zero-variance group filter: whole groups move to excluded.
  if (entry.policy.group_variance_filter ==
      GroupVarianceFilter::DropZeroVarianceGroups) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < report.per_run.size(); ++i) {
      if (report.per_run[i].group) {
        groups[*report.per_run[i].group].push_back(i);
      }
    }
    for (const auto& [group, members] : groups) {
      (void)group;
      std::optional<double> first;
      bool zero_variance = true;
      bool any = false;
      for (std::size_t i : members) {
        if (!report.per_run[i].contribution) continue;
        any = true;
        if (!first) {
          first = report.per_run[i].contribution;
        } else if (*report.per_run[i].contribution != *first) {
          zero_variance = false;
        }
      }
      if (any && zero_variance) {
        for (std::size_t i : members) {
          report.per_run[i].bucket = Bucket::Excluded;
          report.per_run[i].contribution = std::nullopt;
        }
      }
    }
  }

  double sum = 0.0;
  for (const PerRun& run : report.per_run) {
    switch (run.bucket) {
      case Bucket::Scored: ++report.accounting.scored; break;
      case Bucket::Failed: ++report.accounting.failed; break;
      case Bucket::Errored: ++report.accounting.errored; break;
      case Bucket::Skipped: ++report.accounting.skipped; break;
      case Bucket::Excluded: ++report.accounting.excluded; break;
    }
    if (run.coerced) ++report.coercions;
    if (run.contribution) {
      ++report.denominator;
      sum += *run.contribution;
    }
  }
  if (report.denominator == 0) throw EmptyDenominator(entry.ref());
  report.headline = sum / static_cast<double>(report.denominator);
  return report;
}

}  // namespace

double recompute_headline(const ScoreReport& report) {
  double sum = 0.0;
  std::int64_t count = 0;
  for (const PerRun& run : report.per_run) {
    if (run.contribution) {
      sum += *run.contribution;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

ScoreReport score_mean(const Batch& batch, const ReportingRuleEntry& entry) {
  std::vector<std::pair<Extraction, DropsManifest>> rows;
  std::vector<std::string> run_ids;
  for (const CardBundle& card : batch) {
    CardFacts facts =
        read_card_facts(card, entry.ref(), {"score.final", "grading.group"}, false);
    Extraction e;
    e.group = read_group(facts);
    if (facts.status == "errored") {
      e.raw = RawOutcome::ErrorStatus;
      e.label = "error_status";
    } else if (!facts.latest.contains("score.final")) {
      e.raw = RawOutcome::MissingArtifact;
      e.label = "missing_artifact";
    } else {
      const Json& payload = facts.latest.at("score.final");
      if (payload.is_object() && payload.contains("value") &&
          payload.at("value").is_number()) {
        e.raw = RawOutcome::Scored;
        e.value = payload.at("value").get<double>();
        e.label = trim_number(e.value);
      } else {
        e.raw = RawOutcome::Unparseable;
        e.label = "unparseable";
      }
    }
    rows.emplace_back(std::move(e), std::move(facts.drops));
    run_ids.push_back(facts.run_id);
  }
  return assemble("mean", entry, std::move(rows), std::move(run_ids));
}

ScoreReport score_threshold(const Batch& batch, const ReportingRuleEntry& entry) {
  std::vector<std::string> tiers;
  for (const Json& tier : entry.config.value("tiers", Json::array())) {
    tiers.push_back(tier.get<std::string>());
  }
  std::set<std::string> passing;
  for (const Json& tier : entry.config.value("passing_set", Json::array())) {
    passing.insert(tier.get<std::string>());
  }
  for (const std::string& tier : passing) {
    if (!tiers.empty() &&
        std::find(tiers.begin(), tiers.end(), tier) == tiers.end()) {
      throw UnknownTier(tier);
    }
  }

  std::vector<std::pair<Extraction, DropsManifest>> rows;
  std::vector<std::string> run_ids;
  for (const CardBundle& card : batch) {
    CardFacts facts = read_card_facts(card, entry.ref(), {"grading.tier"}, false);
    Extraction e;
    if (facts.status == "errored") {
      e.raw = RawOutcome::ErrorStatus;
      e.label = "error_status";
    } else if (!facts.latest.contains("grading.tier")) {
      e.raw = RawOutcome::MissingArtifact;
      e.label = "missing_artifact";
    } else {
      const Json& payload = facts.latest.at("grading.tier");
      if (!payload.is_object() || !payload.contains("tier") ||
          !payload.at("tier").is_string()) {
        e.raw = RawOutcome::Unparseable;
        e.label = "unparseable";
      } else {
        std::string tier = payload.at("tier").get<std::string>();
        if (!tiers.empty() &&
            std::find(tiers.begin(), tiers.end(), tier) == tiers.end()) {
          throw UnknownTier(tier);
        }
        e.raw = RawOutcome::Scored;
        e.value = passing.contains(tier) ? 1.0 : 0.0;
        e.label = tier;
      }
    }
    rows.emplace_back(std::move(e), std::move(facts.drops));
    run_ids.push_back(facts.run_id);
  }
  return assemble("threshold", entry, std::move(rows), std::move(run_ids));
}

ScoreReport score_judged(const Batch& batch, const ReportingRuleEntry& entry) {
  std::string grader = entry.config.value("grader", "rule_based");
  std::string verdict_column = entry.config.value("verdict_column", "verdict");

  std::vector<std::pair<Extraction, DropsManifest>> rows;
  std::vector<std::string> run_ids;
  for (const CardBundle& card : batch) {
    CardFacts facts = read_card_facts(
        card, entry.ref(), {"answers.gold", "answers.predicted", "judge"}, false);
    Extraction e;
    if (facts.status == "errored") {
      e.raw = RawOutcome::ErrorStatus;
      e.label = "error_status";
    } else if (grader == "rule_based") {
      if (!facts.latest.contains("answers.gold") ||
          !facts.latest.contains("answers.predicted")) {
        e.raw = RawOutcome::MissingArtifact;
        e.label = "missing_artifact";
      } else {
        std::string gold = facts.latest.at("answers.gold").value("text", "");
        std::string predicted =
            facts.latest.at("answers.predicted").value("text", "");
        bool correct = normalize_answer(gold) == normalize_answer(predicted);
        e.raw = RawOutcome::Scored;
        e.value = correct ? 1.0 : 0.0;
        e.label = correct ? "correct" : "incorrect";
      }
    } else {  // recorded_judge_labels
      if (!facts.latest.contains("judge")) {
        e.raw = RawOutcome::MissingArtifact;
        e.label = "missing_artifact";
      } else {
        const Json& payload = facts.latest.at("judge");
        if (!payload.is_object() || !payload.contains(verdict_column)) {
          throw MissingVerdictColumn(verdict_column);
        }
        std::string verdict = payload.at(verdict_column).is_string()
                                  ? payload.at(verdict_column).get<std::string>()
                                  : "";
        if (verdict == "CORRECT") {
          e.raw = RawOutcome::Scored;
          e.value = 1.0;
          e.label = "correct";
        } else if (verdict == "INCORRECT") {
          e.raw = RawOutcome::Scored;
          e.value = 0.0;
          e.label = "incorrect";
        } else {
          e.raw = RawOutcome::Unparseable;
          e.label = "unparseable_verdict";
        }
      }
    }
    rows.emplace_back(std::move(e), std::move(facts.drops));
    run_ids.push_back(facts.run_id);
  }
  return assemble("judged", entry, std::move(rows), std::move(run_ids));
}

namespace {

Json normalize_json(const Json& value) {
  if (value.is_object()) {
    std::map<std::string, Json> sorted;
    for (const auto& [key, child] : value.items()) {
      sorted[key] = normalize_json(child);
    }
    Json out = Json::object();
    for (const auto& [key, child] : sorted) out[key] = child;
    return out;
  }
  if (value.is_array()) {
    Json out = Json::array();
    for (const Json& child : value) out.push_back(normalize_json(child));
    return out;
  }
  return value;
}

std::string call_signature(const Json& call) {
  Json sig = Json::object();
  sig["name"] = call.is_object() ? call.value("name", "") : "";
  sig["args"] =
      call.is_object() ? normalize_json(call.value("args", Json::object()))
                       : Json::object();
  return sig.dump();
}

}  // namespace

ScoreReport score_trajectory(const Batch& batch, const ReportingRuleEntry& entry) {
  std::string definition = entry.config.value("success_definition", "db_state");

  std::vector<std::pair<Extraction, DropsManifest>> rows;
  std::vector<std::string> run_ids;
  for (const CardBundle& card : batch) {
    CardFacts facts = read_card_facts(
        card, entry.ref(), {"trajectory.gold", "trajectory.final_state"}, true);
    Extraction e;
    if (facts.status == "errored") {
      e.raw = RawOutcome::ErrorStatus;
      e.label = "error_status";
    } else if (!facts.latest.contains("trajectory.gold")) {
      e.raw = RawOutcome::MissingArtifact;
      e.label = "missing_artifact";
    } else {
      const Json& gold = facts.latest.at("trajectory.gold");
      bool success = false;
      if (definition == "db_state") {
        if (!facts.latest.contains("trajectory.final_state")) {
          throw MissingStateRecord(facts.run_id);
        }
        success = normalize_json(facts.latest.at("trajectory.final_state")
                                     .value("state", Json::object())) ==
                  normalize_json(gold.value("state", Json::object()));
      } else {
        std::vector<std::string> got;
        for (const Json& call : facts.tool_calls) {
          got.push_back(call_signature(call));
        }
        std::vector<std::string> want;
        for (const Json& call : gold.value("calls", Json::array())) {
          want.push_back(call_signature(call));
        }
        if (definition == "action_sequence") {
          success = got == want;
        } else {  // action_set: order-insensitive, count-sensitive
          std::sort(got.begin(), got.end());
          std::sort(want.begin(), want.end());
          success = got == want;
        }
      }
      e.raw = RawOutcome::Scored;
      e.value = success ? 1.0 : 0.0;
      e.label = success ? "success" : "failure";
    }
    rows.emplace_back(std::move(e), std::move(facts.drops));
    run_ids.push_back(facts.run_id);
  }
  return assemble("trajectory", entry, std::move(rows), std::move(run_ids));
}

ScoreReport score_rule(const Batch& batch, const ReportingRuleEntry& entry) {
  if (entry.name == "mean") return score_mean(batch, entry);
  if (entry.name == "threshold") return score_threshold(batch, entry);
  if (entry.name == "judged") return score_judged(batch, entry);
  if (entry.name == "trajectory") return score_trajectory(batch, entry);
  throw RuleNotApplicable("", entry.ref(), "no rule implementation named " +
                                               entry.name);
}

Json to_json(const ScoreReport& report) {
  Json j = Json::object();
  j["rule"] = Json{{"name", report.rule_name}, {"version", report.rule_version}};
  j["metric"] = report.metric;
  j["headline"] = report.headline;
  j["denominator"] = report.denominator;
  j["accounting"] = Json{{"attempted", report.accounting.attempted},
                         {"scored", report.accounting.scored},
                         {"failed", report.accounting.failed},
                         {"errored", report.accounting.errored},
                         {"skipped", report.accounting.skipped},
                         {"excluded", report.accounting.excluded}};
  j["coercions"] = report.coercions;
  Json runs = Json::array();
  for (const PerRun& run : report.per_run) {
    Json r = Json::object();
    r["run_id"] = run.run_id;
    r["raw"] = std::string(raw_outcome_name(run.raw));
    r["label"] = run.label;
    r["bucket"] = std::string(bucket_name(run.bucket));
    if (run.contribution) r["contribution"] = *run.contribution;
    if (run.coerced) r["coerced"] = true;
    if (run.group) r["group"] = *run.group;
    runs.push_back(std::move(r));
  }
  j["per_run"] = std::move(runs);
  j["drops"] = to_json(report.drops);
  return j;
}

std::string render_line(const ScoreReport& report) {
  std::ostringstream out;
  out << report.rule_name << "@" << report.rule_version << " " << report.metric
      << "=" << report.headline << " attempted=" << report.accounting.attempted
      << " scored=" << report.accounting.scored
      << " failed=" << report.accounting.failed
      << " errored=" << report.accounting.errored
      << " skipped=" << report.accounting.skipped
      << " excluded=" << report.accounting.excluded
      << " coercions=" << report.coercions;
  return out.str();
}

}  // namespace rollcard
