#include "rollcard/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rollcard/errors.hpp"
#include "rollcard/format.hpp"
#include "rollcard/sha256.hpp"

namespace rollcard {

namespace fs = std::filesystem;

namespace {

// 2026-03-01T00:00:00.000Z
constexpr std::int64_t kBaseMs = 1772323200000LL;

std::string pad(std::int64_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, width - digits.size(), '0');
  }
  return digits;
}

rawjson::RawValue raw_of(const Json& j) { return rawjson::RawValue{j.dump()}; }

// Accumulates rows for one card and wraps them into a bundle.
struct Builder {
  explicit Builder(std::string run_id) {
    card.manifest.run_id = std::move(run_id);
    card.manifest.created_at = timestamp_from_unix_millis(kBaseMs);
  }

  Timestamp at(std::int64_t offset_ms) const {
    return timestamp_from_unix_millis(kBaseMs + offset_ms);
  }

  NodeRow& node(const std::string& id, std::optional<std::string> parent,
                const std::string& instance, const std::string& task,
                const std::string& status, std::int64_t level,
                std::int64_t created_offset) {
    NodeRow row;
    row.node_id = id;
    row.parent_id = std::move(parent);
    row.instance_key = instance;
    row.task_key = task;
    row.status = status;
    row.level = level;
    row.created_at = at(created_offset);
    row.updated_at = at(created_offset + 500);
    nodes.push_back(std::move(row));
    return nodes.back();
  }

  EventRow& event(const std::string& id, const std::string& exec,
                  const std::string& worker, std::int64_t seq,
                  const std::string& type, const Json& payload,
                  std::int64_t start_offset, std::int64_t duration_ms) {
    EventRow row;
    row.event_id = id;
    row.task_execution_id = exec;
    row.worker_binding_key = worker;
    row.sequence = seq;
    row.event_type = type;
    row.payload = raw_of(payload);
    row.started_at = at(start_offset);
    row.completed_at = at(start_offset + duration_ms);
    events.push_back(std::move(row));
    return events.back();
  }

  void annotate(const std::string& target_type, const std::string& target_id,
                const std::string& ns, std::int64_t seq, const Json& payload,
                std::int64_t created_offset) {
    AnnotationRow row;
    row.target_type = target_type;
    row.target_id = target_id;
    row.ns = ns;
    row.sequence = seq;
    row.payload = raw_of(payload);
    row.created_at = at(created_offset);
    annotations.push_back(std::move(row));
  }

  void mutate(const std::string& target_id, const Json& old_value,
              const Json& new_value, const std::string& reason,
              std::int64_t created_offset) {
    MutationRow row;
    row.sequence = mutation_seq++;
    row.mutation_type = "node_status";
    row.target_type = "node";
    row.target_id = target_id;
    row.actor = "scheduler";
    row.old_value = raw_of(old_value);
    row.new_value = raw_of(new_value);
    row.reason = reason;
    row.created_at = at(created_offset);
    mutations.push_back(std::move(row));
  }

  void edge(const std::string& source, const std::string& target,
            const std::string& status, std::int64_t created_offset) {
    EdgeRow row;
    row.source_node_id = source;
    row.target_node_id = target;
    row.status = status;
    row.created_at = at(created_offset);
    row.updated_at = at(created_offset + 100);
    edges.push_back(std::move(row));
  }

  std::string put_blob(const std::string& bytes) {
    std::string digest = sha256_hex(bytes);
    card.blobs[digest] = bytes;
    return digest;
  }

  CardBundle take() {
    card.streams.events = RowStream<EventRow>(std::move(events));
    card.streams.nodes = RowStream<NodeRow>(std::move(nodes));
    card.streams.edges = RowStream<EdgeRow>(std::move(edges));
    card.streams.annotations = RowStream<AnnotationRow>(std::move(annotations));
    card.streams.mutations = RowStream<MutationRow>(std::move(mutations));
    return std::move(card);
  }

  CardBundle card;
  std::vector<EventRow> events;
  std::vector<NodeRow> nodes;
  std::vector<EdgeRow> edges;
  std::vector<AnnotationRow> annotations;
  std::vector<MutationRow> mutations;
  std::int64_t mutation_seq = 0;
};

void fixture_check(bool ok, const std::string& what) {
  if (!ok) {
    throw InvariantViolation("fixture arithmetic failed verification: " + what);
  }
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.below(i)]);
  }
}

// Minimal single-episode card for batch fixtures: one root node, one event,
// one status mutation, caller-provided root annotations.
CardBundle outcome_card(const std::string& run_id, const std::string& status,
                        const std::vector<std::pair<std::string, Json>>& notes) {
  Builder b(run_id);
  std::string root = "n-" + run_id;
  b.node(root, std::nullopt, run_id, "task", status, 0, 0);
  b.event("e-" + run_id + "-0", run_id, "w-0", 0, "model_output",
          Json{{"text", "output for " + run_id}}, 1000, 300);
  b.mutate(root, Json{{"status", "running"}}, Json{{"status", status}},
           "terminal transition", 2000);
  for (const auto& [ns, payload] : notes) {
    b.annotate("node", root, ns, 0, payload, 2500);
  }
  return b.take();
}

}  // namespace

CardBundle gen_card(const FixtureProfile& profile) {
  if (profile.runs < 0) throw InvalidProfile("runs must be non-negative");
  if (profile.steps_per_run.first < 1 ||
      profile.steps_per_run.second < profile.steps_per_run.first) {
    throw InvalidProfile("steps_per_run range is empty");
  }
  if (profile.worker_count.first < 1 ||
      profile.worker_count.second < profile.worker_count.first) {
    throw InvalidProfile("worker_count range is empty");
  }
  if (profile.edge_density < 0.0 || profile.edge_density > 1.0) {
    throw InvalidProfile("edge_density outside [0, 1]");
  }
  double mix_sum = 0.0;
  for (const auto& [status, share] : profile.failure_mix) {
    if (share < 0.0) throw InvalidProfile("negative share for " + status);
    mix_sum += share;
  }
  if (mix_sum > 1.0 + 1e-9) throw InvalidProfile("failure_mix sums above 1");

  Rng rng(profile.seed);

  // Exact status allocation via largest remainder, then a seeded shuffle.
  std::vector<std::string> statuses;
  statuses.reserve(profile.runs);
  {
    std::vector<std::pair<std::string, double>> shares(
        profile.failure_mix.begin(), profile.failure_mix.end());
    std::vector<std::int64_t> counts(shares.size(), 0);
    std::vector<double> remainders(shares.size(), 0.0);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
      double exact = shares[i].second * static_cast<double>(profile.runs);
      counts[i] = static_cast<std::int64_t>(std::floor(exact + 1e-9));
      remainders[i] = exact - static_cast<double>(counts[i]);
      assigned += counts[i];
    }
    std::int64_t leftovers =
        static_cast<std::int64_t>(std::llround(mix_sum * profile.runs)) - assigned;
    std::vector<std::size_t> by_remainder(shares.size());
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [&](std::size_t a, std::size_t b) {
                       return remainders[a] > remainders[b];
                     });
    for (std::int64_t i = 0; i < leftovers && i < static_cast<std::int64_t>(
                                                     by_remainder.size());
         ++i) {
      ++counts[by_remainder[i]];
    }
    for (std::size_t i = 0; i < shares.size(); ++i) {
      for (std::int64_t k = 0; k < counts[i]; ++k) {
        statuses.push_back(shares[i].first);
      }
    }
    while (static_cast<std::int64_t>(statuses.size()) < profile.runs) {
      statuses.push_back("succeeded");
    }
    shuffle(statuses, rng);
  }

  Builder b("synth-" + std::to_string(profile.seed));
  for (std::int64_t e = 0; e < profile.runs; ++e) {
    const std::string& status = statuses[e];
    std::string ep = pad(e, 4);
    std::string exec = "exec-" + ep;
    std::string root = "n" + ep + "-root";
    std::int64_t base = e * 100000;

    int steps = profile.steps_per_run.first +
                static_cast<int>(rng.below(profile.steps_per_run.second -
                                           profile.steps_per_run.first + 1));
    int workers = profile.worker_count.first +
                  static_cast<int>(rng.below(profile.worker_count.second -
                                             profile.worker_count.first + 1));

    b.node(root, std::nullopt, exec, "task-" + std::to_string(e % 7), status, 0,
           base);
    std::vector<std::string> worker_nodes;
    for (int w = 0; w < workers; ++w) {
      std::string id = "n" + ep + "-w" + std::to_string(w);
      NodeRow& row = b.node(id, root, exec + "-w" + std::to_string(w),
                            "worker", "succeeded", 1, base + 100 + w);
      row.assigned_worker_key = "w" + ep + "-" + std::to_string(w);
      worker_nodes.push_back(id);
    }

    for (int s = 0; s < steps; ++s) {
      std::string worker = "w" + ep + "-" + std::to_string(s % workers);
      std::int64_t t = base + 1000 + s * 1000;
      std::string es = ep + "-" + std::to_string(s);
      b.event("e" + es + "-m", exec, worker, s * 4, "model_output",
              Json{{"text", "step " + std::to_string(s)}}, t, 300);
      b.event("e" + es + "-c", exec, worker, s * 4 + 1, "tool_call",
              Json{{"name", "tool_" + std::to_string(s % 5)},
                   {"args", Json{{"i", s}}}},
              t + 350, 100);
      Json result = Json{{"output", "ok " + std::to_string(s)}};
      if (e == 0 && s == 0) {
        std::string bytes =
            "tool output overflow for " + b.card.manifest.run_id + "\n";
        std::string digest = b.put_blob(bytes);
        result = Json::object();
        result["$blob"] = Json{{"digest", digest},
                               {"byte_length", bytes.size()},
                               {"media_type", "text/plain"}};
      }
      b.event("e" + es + "-r", exec, worker, s * 4 + 2, "tool_result", result,
              t + 500, 100);
      b.event("e" + es + "-w", exec, "env", s * 4 + 3, "reward",
              Json{{"reward", 0.25}}, t + 700, 50);
    }

    b.annotate("node", root, "status.progress", 0, Json{{"stage", "running"}},
               base + 100);
    b.annotate("node", root, "status.progress", 1, Json{{"stage", status}},
               base + 90000);
    if (status == "succeeded" || status == "failed") {
      b.annotate("node", root, "score.final", 0,
                 Json{{"value", status == "succeeded" ? 1.0 : 0.0}},
                 base + 90100);
    }
    for (const std::string& ns : profile.annotation_namespaces) {
      b.annotate("node", root, ns, 0, Json{{"note", "synthetic"}}, base + 90200);
    }

    for (int w = 1; w < workers; ++w) {
      if (rng.unit() < profile.edge_density) {
        b.edge(worker_nodes[w - 1], worker_nodes[w],
               w % 2 == 0 ? "satisfied" : "pending", base + 200 + w);
      }
    }

    b.mutate(root, Json{{"status", "pending"}}, Json{{"status", "running"}},
             "started", base + 50);
    b.mutate(root, Json{{"status", "running"}}, Json{{"status", status}},
             "finished", base + 95000);
  }
  return b.take();
}

// --- named fixtures ---

namespace {

NamedFixtureOutput build_swebench_gap() {
  // A: Agentless-shaped (4 no-submissions), B: SWE-agent-shaped (50).
  struct Side {
    std::string key;
    std::string prefix;
    int resolved;
    int missing;
  };
  const Side sides[] = {{"system_a", "swe-a-", 196, 4},
                        {"system_b", "swe-b-", 118, 50}};
  NamedFixtureOutput out;
  out.name = "swebench_gap";
  Rng rng(20260801);
  for (const Side& side : sides) {
    std::vector<int> kinds;  // 2 resolved, 1 unresolved, 0 missing
    for (int i = 0; i < side.resolved; ++i) kinds.push_back(2);
    for (int i = 0; i < 500 - side.resolved - side.missing; ++i) {
      kinds.push_back(1);
    }
    for (int i = 0; i < side.missing; ++i) kinds.push_back(0);
    shuffle(kinds, rng);

    Batch batch;
    for (int i = 0; i < 500; ++i) {
      std::string run_id = side.prefix + pad(i + 1, 4);
      switch (kinds[i]) {
        case 2:
          batch.push_back(outcome_card(
              run_id, "succeeded",
              {{"score.final", Json{{"value", 1.0}}},
               {"swe.submission", Json{{"submitted", true}}}}));
          break;
        case 1:
          batch.push_back(outcome_card(
              run_id, "failed",
              {{"score.final", Json{{"value", 0.0}}},
               {"swe.submission", Json{{"submitted", true}}}}));
          break;
        default:
          batch.push_back(outcome_card(
              run_id, "cancelled",
              {{"swe.submission", Json{{"submitted", false}}}}));
      }
    }
    out.batches[side.key] = std::move(batch);
  }

  // Independent recount straight off the generated rows.
  for (const Side& side : sides) {
    int resolved = 0, submitted = 0, missing = 0;
    for (const CardBundle& card : out.batches[side.key]) {
      bool has_score = false;
      double value = 0.0;
      card.streams.annotations.for_each([&](const AnnotationRow& row) {
        if (row.ns == "score.final") {
          has_score = true;
          Json payload = Json::parse(row.payload.text);
          value = payload.value("value", 0.0);
        }
      });
      if (!has_score) {
        ++missing;
      } else {
        ++submitted;
        if (value == 1.0) ++resolved;
      }
    }
    fixture_check(resolved == side.resolved && missing == side.missing &&
                      submitted == 500 - side.missing,
                  side.key + " counts");
  }
  double incl = 196.0 / 500.0 - 118.0 / 500.0;
  double excl = 196.0 / 496.0 - 118.0 / 450.0;
  fixture_check(format_pp(incl) == "15.6", "inclusive gap");
  fixture_check(format_pp(excl) == "13.3", "exclusive gap");
  fixture_check(format_pp(incl - excl) == "2.3", "convention share");

  out.gold = Json{{"fixture", "swebench_gap"},
                  {"system_a", Json{{"attempted", 500},
                                    {"resolved", 196},
                                    {"submitted", 496},
                                    {"missing", 4}}},
                  {"system_b", Json{{"attempted", 500},
                                    {"resolved", 118},
                                    {"submitted", 450},
                                    {"missing", 50}}},
                  {"expected", Json{{"gap_inclusive_pp", "15.6"},
                                    {"gap_exclusive_pp", "13.3"},
                                    {"convention_share_pp", "2.3"}}}};
  return out;
}

NamedFixtureOutput build_mlebench_medal() {
  const std::vector<std::pair<std::string, int>> plan = {{"gold", 133},
                                                         {"silver", 70},
                                                         {"bronze", 60},
                                                         {"above_median", 79},
                                                         {"below", 658}};
  NamedFixtureOutput out;
  out.name = "mlebench_medal";
  Rng rng(20260802);
  std::vector<std::string> tiers;
  for (const auto& [tier, count] : plan) {
    for (int i = 0; i < count; ++i) tiers.push_back(tier);
  }
  shuffle(tiers, rng);

  Batch batch;
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    batch.push_back(outcome_card("mle-" + pad(i + 1, 4), "succeeded",
                                 {{"grading.tier", Json{{"tier", tiers[i]}}}}));
  }
  out.batches["submissions"] = std::move(batch);

  std::map<std::string, int> recount;
  for (const CardBundle& card : out.batches["submissions"]) {
    card.streams.annotations.for_each([&](const AnnotationRow& row) {
      if (row.ns == "grading.tier") {
        ++recount[Json::parse(row.payload.text).value("tier", "")];
      }
    });
  }
  int at_or_above = 0;
  for (const auto& [tier, count] : plan) {
    fixture_check(recount[tier] == count, "tier " + tier);
    if (tier != "below") at_or_above += count;
  }
  fixture_check(at_or_above == 342, "at-or-above-median total");
  fixture_check(format_percent(342.0 / 1000.0) == "34.2", "above-median rate");
  fixture_check(format_percent(133.0 / 1000.0) == "13.3", "gold-only rate");

  out.gold = Json{{"fixture", "mlebench_medal"},
                  {"submissions", 1000},
                  {"tiers", Json{{"gold", 133},
                                 {"silver", 70},
                                 {"bronze", 60},
                                 {"above_median", 79},
                                 {"below", 658}}},
                  {"expected", Json{{"above_median_rate", "34.2"},
                                    {"gold_only_rate", "13.3"},
                                    {"delta_pp", "20.9"}}}};
  return out;
}

NamedFixtureOutput build_browsecomp_judges() {
  // Label plan: both-correct 31, rule-only 19, judge-only 229,
  // both-incorrect 4759, judge-unparseable 26. Disagreements 274 total;
  // judge denominator excludes the 26 skipped verdicts.
  enum Kind { BothCorrect, RuleOnly, JudgeOnly, BothIncorrect, JudgeInvalid };
  const std::vector<std::pair<Kind, int>> plan = {{BothCorrect, 31},
                                                  {RuleOnly, 19},
                                                  {JudgeOnly, 229},
                                                  {BothIncorrect, 4759},
                                                  {JudgeInvalid, 26}};
  NamedFixtureOutput out;
  out.name = "browsecomp_judges";
  Rng rng(20260803);
  std::vector<Kind> kinds;
  for (const auto& [kind, count] : plan) {
    for (int i = 0; i < count; ++i) kinds.push_back(kind);
  }
  shuffle(kinds, rng);

  Batch batch;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    std::string run_id = "bc-" + pad(i + 1, 4);
    std::string gold = "answer " + std::to_string(i + 1);
    bool rule_correct = kinds[i] == BothCorrect || kinds[i] == RuleOnly;
    // Correct predictions differ in case and spacing; the rule-based grader
    // normalizes them back.
    std::string predicted =
        rule_correct ? "  Answer " + std::to_string(i + 1) + " "
                     : "wrong " + std::to_string(i + 1);
    std::string verdict;
    switch (kinds[i]) {
      case BothCorrect:
      case JudgeOnly: verdict = "CORRECT"; break;
      case RuleOnly:
      case BothIncorrect: verdict = "INCORRECT"; break;
      case JudgeInvalid: verdict = "INVALID: judge returned prose"; break;
    }
    batch.push_back(outcome_card(
        run_id, "succeeded",
        {{"answers.gold", Json{{"text", gold}}},
         {"answers.predicted", Json{{"text", predicted}}},
         {"judge", Json{{"verdict", verdict}}}}));
  }
  out.batches["answers"] = std::move(batch);

  // Independent re-grade of every card.
  std::int64_t rule_correct = 0, judge_correct = 0, judge_invalid = 0,
               disagreements = 0;
  for (const CardBundle& card : out.batches["answers"]) {
    std::string gold, predicted, verdict;
    card.streams.annotations.for_each([&](const AnnotationRow& row) {
      Json payload = Json::parse(row.payload.text);
      if (row.ns == "answers.gold") gold = payload.value("text", "");
      if (row.ns == "answers.predicted") predicted = payload.value("text", "");
      if (row.ns == "judge") verdict = payload.value("verdict", "");
    });
    bool rule = normalize_answer(gold) == normalize_answer(predicted);
    std::string rule_label = rule ? "correct" : "incorrect";
    std::string judge_label = verdict == "CORRECT"
                                  ? "correct"
                                  : (verdict == "INCORRECT" ? "incorrect"
                                                            : "unparseable");
    if (rule) ++rule_correct;
    if (judge_label == "correct") ++judge_correct;
    if (judge_label == "unparseable") ++judge_invalid;
    if (rule_label != judge_label) ++disagreements;
  }
  fixture_check(rule_correct == 50, "rule-based correct count");
  fixture_check(judge_correct == 260, "judge correct count");
  fixture_check(judge_invalid == 26, "unparseable verdicts");
  fixture_check(disagreements == 274, "label disagreements");
  double gap = 260.0 / 5038.0 - 50.0 / 5064.0;
  fixture_check(round_half_even(gap * 100.0, 2) == 4.17, "judge gap 4.17pp");

  out.gold = Json{{"fixture", "browsecomp_judges"},
                  {"answers", 5064},
                  {"rule_based_correct", 50},
                  {"judge_correct", 260},
                  {"judge_unparseable", 26},
                  {"disagreements", 274},
                  {"expected", Json{{"gap_pp_2dec", 4.17}}}};
  return out;
}

NamedFixtureOutput build_taubench_graders() {
  const Json gold_calls = Json::array(
      {Json{{"name", "lookup"}, {"args", Json{{"id", 1}}}},
       Json{{"name", "update"}, {"args", Json{{"id", 1}, {"qty", 2}}}},
       Json{{"name", "confirm"}, {"args", Json::object()}}});
  const Json gold_state =
      Json{{"inventory", Json{{"item-1", 2}}}, {"confirmed", true}};
  const Json bad_state =
      Json{{"inventory", Json{{"item-1", 1}}}, {"confirmed", false}};

  struct Side {
    std::string key;
    std::string prefix;
    int exact;
    int divergent;
  };
  // db_state: exact + divergent; action_sequence: exact only.
  const Side sides[] = {{"system_a", "tau-a-", 331, 169},
                        {"system_b", "tau-b-", 340, 110}};

  NamedFixtureOutput out;
  out.name = "taubench_graders";
  Rng rng(20260804);
  for (const Side& side : sides) {
    std::vector<int> kinds;  // 2 exact, 1 order-divergent, 0 failing
    for (int i = 0; i < side.exact; ++i) kinds.push_back(2);
    for (int i = 0; i < side.divergent; ++i) kinds.push_back(1);
    while (kinds.size() < 1000) kinds.push_back(0);
    shuffle(kinds, rng);

    Batch batch;
    for (int i = 0; i < 1000; ++i) {
      std::string run_id = side.prefix + pad(i + 1, 4);
      Json calls;
      Json final_state;
      if (kinds[i] == 2) {
        calls = gold_calls;
        final_state = gold_state;
      } else if (kinds[i] == 1) {
        calls = Json::array({gold_calls[1], gold_calls[0], gold_calls[2]});
        final_state = gold_state;
      } else {
        calls = Json::array({gold_calls[0], gold_calls[1]});
        final_state = bad_state;
      }

      Builder b(run_id);
      std::string root = "n-" + run_id;
      b.node(root, std::nullopt, run_id, "tau-task", "succeeded", 0, 0);
      std::int64_t seq = 0;
      for (const Json& call : calls) {
        b.event("e-" + run_id + "-" + std::to_string(seq), run_id, "w-0", seq,
                "tool_call", call, 1000 + seq * 500, 200);
        ++seq;
      }
      b.annotate("node", root, "trajectory.gold", 0,
                 Json{{"calls", gold_calls}, {"state", gold_state}}, 100);
      b.annotate("node", root, "trajectory.final_state", 0,
                 Json{{"state", final_state}}, 4000);
      b.mutate(root, Json{{"status", "running"}}, Json{{"status", "succeeded"}},
               "done", 4500);
      batch.push_back(b.take());
    }
    out.batches[side.key] = std::move(batch);
  }

  // Independent grading of all 2,000 trajectories.
  auto signature = [](const Json& call) { return call.dump(); };
  std::map<std::string, std::array<int, 3>> counts;  // db, seq, set
  for (const auto& [system, batch] : out.batches) {
    for (const CardBundle& card : batch) {
      std::vector<std::string> got;
      card.streams.events.for_each([&](const EventRow& event) {
        if (event.event_type == "tool_call") {
          got.push_back(signature(Json::parse(event.payload.text)));
        }
      });
      Json gold, final_state;
      card.streams.annotations.for_each([&](const AnnotationRow& row) {
        if (row.ns == "trajectory.gold") gold = Json::parse(row.payload.text);
        if (row.ns == "trajectory.final_state") {
          final_state = Json::parse(row.payload.text);
        }
      });
      std::vector<std::string> want;
      for (const Json& call : gold.at("calls")) want.push_back(signature(call));
      bool db = final_state.at("state") == gold.at("state");
      bool seq = got == want;
      std::vector<std::string> got_sorted = got, want_sorted = want;
      std::sort(got_sorted.begin(), got_sorted.end());
      std::sort(want_sorted.begin(), want_sorted.end());
      bool set = got_sorted == want_sorted;
      auto& c = counts[system];
      c[0] += db;
      c[1] += seq;
      c[2] += set;
    }
  }
  fixture_check(counts["system_a"][0] == 500 && counts["system_a"][1] == 331 &&
                    counts["system_a"][2] == 500,
                "system_a grader counts");
  fixture_check(counts["system_b"][0] == 450 && counts["system_b"][1] == 340 &&
                    counts["system_b"][2] == 450,
                "system_b grader counts");
  fixture_check(format_pp(0.500 - 0.331) == "16.9", "rule gap");
  // db_state orders a > b; action_sequence orders a < b.
  fixture_check(counts["system_a"][0] > counts["system_b"][0] &&
                    counts["system_a"][1] < counts["system_b"][1],
                "planted inversion");

  out.gold = Json{
      {"fixture", "taubench_graders"},
      {"system_a", Json{{"db_state", 500}, {"action_sequence", 331},
                        {"action_set", 500}, {"attempted", 1000}}},
      {"system_b", Json{{"db_state", 450}, {"action_sequence", 340},
                        {"action_set", 450}, {"attempted", 1000}}},
      {"expected", Json{{"rule_gap_pp", "16.9"}, {"inversions", 1}}}};
  return out;
}

NamedFixtureOutput build_gap_toolsafety() {
  // 5,000 episodes in one card: 4,855 text-safe of which 1,002 make a
  // forbidden tool call (997 of those visibly refuse); 145 text-unsafe.
  enum Kind { SafeForbiddenRefused, SafeForbiddenBlunt, SafeClean,
              UnsafeForbidden, UnsafeClean };
  const std::vector<std::pair<Kind, int>> plan = {{SafeForbiddenRefused, 997},
                                                  {SafeForbiddenBlunt, 5},
                                                  {SafeClean, 3853},
                                                  {UnsafeForbidden, 40},
                                                  {UnsafeClean, 105}};
  NamedFixtureOutput out;
  out.name = "gap_toolsafety";
  Rng rng(20260805);
  std::vector<Kind> kinds;
  for (const auto& [kind, count] : plan) {
    for (int i = 0; i < count; ++i) kinds.push_back(kind);
  }
  shuffle(kinds, rng);

  Builder b("gap-toolsafety");
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    Kind kind = kinds[i];
    std::string ep = pad(i + 1, 4);
    std::string exec = "gap-ep-" + ep;
    std::string root = "n" + ep;
    std::int64_t base = static_cast<std::int64_t>(i) * 2000;
    b.node(root, std::nullopt, exec, "gap-task", "succeeded", 0, base);
    std::string call_id = "e" + ep + "-call";
    b.event(call_id, exec, "w-0", 0, "tool_call",
            Json{{"name", kind == SafeForbiddenRefused ||
                              kind == SafeForbiddenBlunt ||
                              kind == UnsafeForbidden
                          ? "exec_shell"
                          : "browse"},
                 {"args", Json{{"i", static_cast<std::int64_t>(i)}}}},
            base + 100, 50);
    bool text_safe = kind == SafeForbiddenRefused || kind == SafeForbiddenBlunt ||
                     kind == SafeClean;
    bool refused = kind == SafeForbiddenRefused || kind == SafeClean;
    bool forbidden = kind == SafeForbiddenRefused ||
                     kind == SafeForbiddenBlunt || kind == UnsafeForbidden;
    b.annotate("node", root, "safety.refusal", 0,
               Json{{"text_safe", text_safe}, {"refused", refused}}, base + 200);
    if (forbidden) {
      b.annotate("event", call_id, "safety.forbidden", 0,
                 Json{{"forbidden", true}}, base + 300);
    }
  }
  CardBundle card = b.take();

  // Independent recount over the generated rows.
  std::map<std::string, bool> safe_of, refused_of;
  card.streams.annotations.for_each([&](const AnnotationRow& row) {
    if (row.ns == "safety.refusal") {
      Json payload = Json::parse(row.payload.text);
      safe_of[row.target_id] = payload.value("text_safe", false);
      refused_of[row.target_id] = payload.value("refused", false);
    }
  });
  std::set<std::string> forbidden_calls;
  card.streams.annotations.for_each([&](const AnnotationRow& row) {
    if (row.ns == "safety.forbidden") forbidden_calls.insert(row.target_id);
  });
  std::map<std::string, std::string> event_to_node;  // call event -> root node
  card.streams.events.for_each([&](const EventRow& event) {
    // exec "gap-ep-XXXX" maps to node "nXXXX"
    event_to_node[event.event_id] = "n" + event.task_execution_id.substr(7);
  });
  int text_safe_count = 0, diverging = 0, refused_diverging = 0;
  std::set<std::string> forbidden_nodes;
  for (const std::string& call : forbidden_calls) {
    forbidden_nodes.insert(event_to_node.at(call));
  }
  for (const auto& [node, safe] : safe_of) {
    if (!safe) continue;
    ++text_safe_count;
    if (forbidden_nodes.contains(node)) {
      ++diverging;
      if (refused_of[node]) ++refused_diverging;
    }
  }
  fixture_check(text_safe_count == 4855, "text-safe count");
  fixture_check(diverging == 1002, "text-safe with forbidden calls");
  fixture_check(refused_diverging == 997, "visibly refusing divergers");
  fixture_check(format_percent(1002.0 / 4855.0) == "20.64", "divergence rate");

  out.batches["gap"] = Batch{std::move(card)};
  out.gold = Json{{"fixture", "gap_toolsafety"},
                  {"episodes", 5000},
                  {"text_safe", 4855},
                  {"text_safe_tool_unsafe", 1002},
                  {"visibly_refusing_divergers", 997},
                  {"expected", Json{{"divergence_rate_2dec", "20.64"}}}};
  return out;
}

NamedFixtureOutput build_tot_prune_pairs() {
  // Per-pair rewards in tenths; first five pairs tie.
  const int tie_rewards[5] = {3, 4, 2, 5, 1};
  const int noprune_rest[15] = {4, 4, 4, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3};
  const int prune_rest[15] = {5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 4, 4};

  auto unique_actions = [](bool prune, int pair) {
    if (prune) return pair <= 13 ? 29 : 28;  // 13*29 + 7*28 = 573
    return pair <= 13 ? 49 : 48;             // 13*49 + 7*48 = 973
  };
  auto reward_tenths = [&](bool prune, int pair) {
    if (pair <= 5) return tie_rewards[pair - 1];
    return prune ? prune_rest[pair - 6] : noprune_rest[pair - 6];
  };

  NamedFixtureOutput out;
  out.name = "tot_prune_pairs";
  for (bool prune : {false, true}) {
    Batch batch;
    for (int pair = 1; pair <= 20; ++pair) {
      std::string run_id = std::string("tot-") + (prune ? "prune-" : "noprune-") +
                           pad(pair, 2);
      int atoms = unique_actions(prune, pair);
      double reward = reward_tenths(prune, pair) / 10.0;

      Builder b(run_id);
      std::string root = "n-" + run_id;
      b.node(root, std::nullopt, run_id, "crossword-" + pad(pair, 2),
             "succeeded", 0, 0);
      std::vector<std::string> path;
      for (int k = 0; k < atoms; ++k) {
        std::string atom = "act-" + pad(pair, 2) + "-" + std::to_string(k);
        if (static_cast<int>(path.size()) >= 5) {
          path.resize(path.size() - 2);
          path.push_back(atom);
        } else if (k % 4 == 3 && !path.empty()) {
          path.pop_back();
          path.push_back(atom);
        } else {
          path.push_back(atom);
        }
        Json snapshot_path = Json::array();
        for (const std::string& a : path) snapshot_path.push_back(a);
        double snapshot =
            k + 1 == atoms
                ? reward
                : round_half_even(reward * (k + 1) / (atoms + 1), 3);
        b.event("e-" + run_id + "-" + std::to_string(k), run_id, "w-0", k,
                "search_step",
                Json{{"path", snapshot_path}, {"reward", snapshot}},
                1000 + k * 200, 100);
      }
      b.annotate("node", root, "score.final", 0, Json{{"value", reward}},
                 50000);
      b.annotate("node", root, "tot.pair", 0,
                 Json{{"pair", pair}, {"variant", prune ? "prune" : "no_prune"}},
                 50100);
      b.mutate(root, Json{{"status", "running"}}, Json{{"status", "succeeded"}},
               "done", 50200);
      batch.push_back(b.take());
    }
    out.batches[prune ? "prune" : "no_prune"] = std::move(batch);
  }

  // Recount rewards (as tenths) and unique actions from the rows.
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> totals;
  std::map<int, std::pair<int, int>> pair_rewards;
  for (const auto& [variant, batch] : out.batches) {
    for (const CardBundle& card : batch) {
      std::set<std::string> atoms;
      card.streams.events.for_each([&](const EventRow& event) {
        if (event.event_type != "search_step") return;
        Json payload = Json::parse(event.payload.text);
        for (const Json& atom : payload.value("path", Json::array())) {
          atoms.insert(atom.get<std::string>());
        }
      });
      int tenths = 0, pair = 0;
      card.streams.annotations.for_each([&](const AnnotationRow& row) {
        Json payload = Json::parse(row.payload.text);
        if (row.ns == "score.final") {
          tenths = static_cast<int>(std::llround(payload.value("value", 0.0) * 10));
        }
        if (row.ns == "tot.pair") pair = payload.value("pair", 0);
      });
      totals[variant].first += tenths;
      totals[variant].second += static_cast<std::int64_t>(atoms.size());
      if (variant == "prune") {
        pair_rewards[pair].first = tenths;
      } else {
        pair_rewards[pair].second = tenths;
      }
    }
  }
  fixture_check(totals["no_prune"].first == 64, "no-prune reward total 6.4");
  fixture_check(totals["prune"].first == 88, "prune reward total 8.8");
  fixture_check(totals["no_prune"].second == 973, "no-prune unique actions");
  fixture_check(totals["prune"].second == 573, "prune unique actions");
  int ties = 0;
  for (const auto& [pair, rewards] : pair_rewards) {
    (void)pair;
    if (rewards.first == rewards.second) ++ties;
  }
  fixture_check(ties == 5, "reward-tied pairs");

  out.gold = Json{{"fixture", "tot_prune_pairs"},
                  {"pairs", 20},
                  {"reward_tied_pairs", 5},
                  {"mean_reward", Json{{"no_prune", 0.32}, {"prune", 0.44}}},
                  {"mean_unique_actions",
                   Json{{"no_prune", 48.65}, {"prune", 28.65}}}};
  return out;
}

}  // namespace

NamedFixtureOutput gen_named(const std::string& name) {
  if (name == "swebench_gap") return build_swebench_gap();
  if (name == "mlebench_medal") return build_mlebench_medal();
  if (name == "taubench_graders") return build_taubench_graders();
  if (name == "browsecomp_judges") return build_browsecomp_judges();
  if (name == "gap_toolsafety") return build_gap_toolsafety();
  if (name == "tot_prune_pairs") return build_tot_prune_pairs();
  throw UnknownFixture(name);
}

CardBundle gen_preservation_card() {
  Builder b("omni-preservation");

  // Episode 1: two workers, an allowed and a forbidden tool call, proof
  // steps, a terminal bonus reward that no worker-visible payload mirrors.
  b.node("n1-root", std::nullopt, "exec-01", "omni-task-1", "succeeded", 0, 0);
  b.node("n1-w1", "n1-root", "exec-01-w1", "worker", "succeeded", 1, 100)
      .assigned_worker_key = "w-a";
  b.node("n1-w2", "n1-root", "exec-01-w2", "worker", "failed", 1, 150)
      .assigned_worker_key = "w-b";
  b.edge("n1-w1", "n1-w2", "satisfied", 300);

  b.event("e1-00", "exec-01", "w-a", 0, "message", Json{{"text", "plan"}}, 1000, 200);
  b.event("e1-01", "exec-01", "w-a", 1, "model_output",
          Json{{"text", "use search"}}, 2000, 300);
  b.event("e1-02", "exec-01", "w-a", 2, "tool_call",
          Json{{"name", "search"}, {"args", Json{{"q", "x"}}}}, 3000, 100);
  b.event("e1-03", "exec-01", "w-a", 3, "tool_result",
          Json{{"output", "ok"}, {"reward", 0.25}}, 3200, 100);
  b.event("e1-04", "exec-01", "env", 4, "reward", Json{{"reward", 0.25}}, 3400, 50);
  b.event("e1-05", "exec-01", "w-b", 5, "message", Json{{"text", "handoff"}}, 4000, 150);
  b.event("e1-06", "exec-01", "w-b", 6, "tool_call",
          Json{{"name", "write_file"}, {"args", Json{{"path", "/etc/passwd"}}}},
          4500, 100);
  b.event("e1-07", "exec-01", "w-b", 7, "tool_result",
          Json{{"output", "written"}, {"reward", 0.25}}, 4700, 80);
  b.event("e1-08", "exec-01", "env", 8, "reward", Json{{"reward", 0.25}}, 4900, 50);
  b.event("e1-09", "exec-01", "env", 9, "proof_step", Json{{"index", 0}}, 6000, 400);
  b.event("e1-10", "exec-01", "env", 10, "proof_step", Json{{"index", 1}}, 7000, 300);
  b.event("e1-11", "exec-01", "env", 11, "proof_step", Json{{"index", 2}}, 8000, 300);
  b.event("e1-12", "exec-01", "env", 12, "reward", Json{{"reward", 0.5}}, 9000, 50);

  // Episode 2: a negative reward with no forbidden call behind it.
  b.node("n2-root", std::nullopt, "exec-02", "omni-task-2", "failed", 0, 100000);
  b.node("n2-w1", "n2-root", "exec-02-w1", "worker", "succeeded", 1, 100100)
      .assigned_worker_key = "w-c";
  b.event("e2-00", "exec-02", "w-c", 0, "model_output", Json{{"text", "try"}},
          101000, 300);
  b.event("e2-01", "exec-02", "w-c", 1, "tool_call",
          Json{{"name", "search"}, {"args", Json{{"q", "y"}}}}, 102000, 100);
  b.event("e2-02", "exec-02", "w-c", 2, "tool_result",
          Json{{"output", "meh"}, {"reward", 0.25}}, 102200, 100);
  b.event("e2-03", "exec-02", "env", 3, "reward", Json{{"reward", 0.25}}, 102400, 50);
  b.event("e2-04", "exec-02", "env", 4, "reward", Json{{"reward", -0.25}}, 103000, 50);
  b.event("e2-05", "exec-02", "env", 5, "reward", Json{{"reward", 0.0}}, 104000, 50);

  // Episode 3: a search rollout whose last snapshot is not the final score.
  b.node("n3-root", std::nullopt, "exec-03", "omni-task-3", "failed", 0, 200000);
  b.node("n3-w1", "n3-root", "exec-03-w1", "worker", "succeeded", 1, 200100)
      .assigned_worker_key = "w-d";
  b.event("e3-00", "exec-03", "w-d", 0, "message", Json{{"text", "solve"}},
          201000, 100);
  b.event("e3-01", "exec-03", "w-d", 1, "model_output", Json{{"text", "dfs"}},
          202000, 200);
  b.event("e3-02", "exec-03", "env", 2, "search_step",
          Json{{"path", Json::array({"a"})}, {"reward", 0.1}}, 203000, 100);
  b.event("e3-03", "exec-03", "env", 3, "search_step",
          Json{{"path", Json::array({"a", "b"})}, {"reward", 0.2}}, 204000, 100);
  b.event("e3-04", "exec-03", "env", 4, "search_step",
          Json{{"path", Json::array({"a", "b", "c"})}, {"reward", 0.75}}, 205000,
          100);
  b.event("e3-05", "exec-03", "env", 5, "search_step",
          Json{{"path", Json::array({"a", "d"})}, {"reward", 0.3}}, 206000, 100);
  b.event("e3-06", "exec-03", "env", 6, "reward", Json{{"reward", 0.25}}, 207000, 50);
  b.event("e3-07", "exec-03", "env", 7, "reward", Json{{"reward", -0.25}}, 208000, 50);

  b.annotate("node", "n1-root", "score.final", 0, Json{{"value", 1.0}}, 9500);
  b.annotate("node", "n2-root", "score.final", 0, Json{{"value", 0.0}}, 104500);
  b.annotate("node", "n3-root", "score.final", 0, Json{{"value", 0.0}}, 208500);
  b.annotate("node", "n1-root", "safety.refusal", 0,
             Json{{"text_safe", true}, {"refused", false}}, 9600);
  b.annotate("node", "n2-root", "safety.refusal", 0,
             Json{{"text_safe", false}, {"refused", false}}, 104600);
  b.annotate("node", "n3-root", "safety.refusal", 0,
             Json{{"text_safe", true}, {"refused", true}}, 208600);
  b.annotate("event", "e1-06", "safety.forbidden", 0, Json{{"forbidden", true}},
             9700);
  std::string proof_bytes = "theorem omni : trivial.\nproof. qed.\n";
  std::string digest = b.put_blob(proof_bytes);
  Json proof_ref = Json::object();
  proof_ref["$blob"] = Json{{"digest", digest},
                            {"byte_length", proof_bytes.size()},
                            {"media_type", "text/plain"}};
  b.annotate("node", "n1-root", "proof.text", 0, proof_ref, 9800);
  b.annotate("node", "n1-root", "status.progress", 0, Json{{"stage", "running"}},
             500);
  b.annotate("node", "n1-root", "status.progress", 1,
             Json{{"stage", "succeeded"}}, 9900);
  b.annotate("node", "n1-root", "custom.note", 0, Json{{"x_custom", 7}}, 9950);

  b.mutate("n1-root", Json{{"status", "running"}}, Json{{"status", "succeeded"}},
           "finished", 10000);
  b.mutate("n2-root", Json{{"status", "running"}}, Json{{"status", "failed"}},
           "gave up", 105000);
  b.mutate("n3-root", Json{{"status", "running"}}, Json{{"status", "failed"}},
           "search exhausted", 209000);
  return b.take();
}

// --- defect injection ---

DefectClass defect_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kDefectNames.size(); ++i) {
    if (kDefectNames[i] == name) return static_cast<DefectClass>(i);
  }
  throw UnknownDefectClass(name);
}

std::string_view defect_name(DefectClass defect) {
  return kDefectNames[static_cast<std::size_t>(defect)];
}

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::string bytes = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < bytes.size()) {
    std::size_t end = bytes.find('\n', start);
    if (end == std::string::npos) end = bytes.size();
    if (end > start) lines.push_back(bytes.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string bytes;
  for (const std::string& line : lines) {
    bytes += line;
    bytes.push_back('\n');
  }
  write_file(path, bytes);
}

std::string member_text(const std::string& line, const std::string& key) {
  for (const auto& [k, v] : rawjson::split_object(line)) {
    if (k == key) return v.text;
  }
  return {};
}

// Replaces (or appends) one member's raw value text, preserving the rest.
std::string edit_member(const std::string& line, const std::string& key,
                        const std::string& raw_text) {
  auto members = rawjson::split_object(line);
  std::string out = "{";
  bool first = true;
  bool replaced = false;
  for (const auto& [k, v] : members) {
    if (!first) out += ",";
    first = false;
    out += rawjson::encode_string(k);
    out += ":";
    if (k == key) {
      out += raw_text;
      replaced = true;
    } else {
      out += v.text;
    }
  }
  if (!replaced) {
    if (!first) out += ",";
    out += rawjson::encode_string(key) + ":" + raw_text;
  }
  out += "}";
  return out;
}

void rehash_manifest(const fs::path& dir) {
  Manifest manifest = parse_manifest(read_file(dir / "manifest.json"));
  for (StreamKind kind : kAllStreams) {
    std::string name(stream_name(kind));
    fs::path file = dir / (name + ".jsonl");
    if (fs::exists(file)) {
      manifest.stream_hashes[name] = sha256_hex(read_file(file));
    }
  }
  write_file(dir / "manifest.json", serialize_manifest(manifest));
}

}  // namespace

Carrier inject_defect(const CardBundle& card, DefectClass defect,
                      std::uint64_t seed, const fs::path& out_dir) {
  fs::remove_all(out_dir);
  Carrier carrier = Carrier::directory(out_dir);
  write_bundle(card, carrier);
  Rng rng(seed);

  switch (defect) {
    case DefectClass::BadLayout: {
      fs::remove(out_dir / "nodes.jsonl");
      return carrier;  // manifest left stale on purpose
    }
    case DefectClass::HashMismatch: {
      auto lines = read_lines(out_dir / "events.jsonl");
      if (lines.empty()) {
        lines.push_back(
            R"({"event_id":"hx","task_execution_id":"hx","worker_binding_key":"w","sequence":0,"event_type":"message","payload":{}})");
      } else {
        std::size_t idx = rng.below(lines.size());
        std::string id = member_text(lines[idx], "event_id");
        lines[idx] = edit_member(lines[idx], "event_id",
                                 rawjson::encode_string("tampered-" + id));
      }
      write_lines(out_dir / "events.jsonl", lines);
      return carrier;  // manifest hash now stale: that is the defect
    }
    case DefectClass::SchemaViolation: {
      auto lines = read_lines(out_dir / "edges.jsonl");
      if (lines.empty()) {
        lines.push_back(
            R"({"source_node_id":"za","target_node_id":"zb","status":"blocked","created_at":"2026-12-01T00:00:00.000Z","updated_at":"2026-12-01T00:00:00.000Z"})");
      } else {
        std::size_t idx = rng.below(lines.size());
        lines[idx] = edit_member(lines[idx], "status", "\"blocked\"");
      }
      write_lines(out_dir / "edges.jsonl", lines);
      break;
    }
    case DefectClass::EventSequence: {
      auto lines = read_lines(out_dir / "events.jsonl");
      bool done = false;
      std::map<std::string, std::size_t> first_of;
      for (std::size_t i = 0; i < lines.size() && !done; ++i) {
        std::string exec = member_text(lines[i], "task_execution_id");
        auto it = first_of.find(exec);
        if (it != first_of.end()) {
          lines[i] = edit_member(lines[i], "sequence",
                                 member_text(lines[it->second], "sequence"));
          done = true;
        } else {
          first_of[exec] = i;
        }
      }
      if (!done && !lines.empty()) lines.push_back(lines.back());
      write_lines(out_dir / "events.jsonl", lines);
      break;
    }
    case DefectClass::MutationSequence: {
      auto lines = read_lines(out_dir / "mutations.jsonl");
      if (lines.size() >= 2) {
        lines[1] = edit_member(lines[1], "sequence",
                               member_text(lines[0], "sequence"));
      } else if (!lines.empty()) {
        lines.push_back(lines.back());
      }
      write_lines(out_dir / "mutations.jsonl", lines);
      break;
    }
    case DefectClass::AnnotationSequence: {
      auto lines = read_lines(out_dir / "annotations.jsonl");
      bool done = false;
      std::map<std::string, std::size_t> first_of;
      for (std::size_t i = 0; i < lines.size() && !done; ++i) {
        std::string key = member_text(lines[i], "target_type") + "|" +
                          member_text(lines[i], "target_id") + "|" +
                          member_text(lines[i], "namespace");
        auto it = first_of.find(key);
        if (it != first_of.end()) {
          lines[i] = edit_member(lines[i], "sequence",
                                 member_text(lines[it->second], "sequence"));
          done = true;
        } else {
          first_of[key] = i;
        }
      }
      if (!done && !lines.empty()) lines.push_back(lines.back());
      write_lines(out_dir / "annotations.jsonl", lines);
      break;
    }
    case DefectClass::ParentLevel: {
      auto lines = read_lines(out_dir / "nodes.jsonl");
      bool done = false;
      for (std::size_t i = 0; i < lines.size() && !done; ++i) {
        if (!member_text(lines[i], "parent_id").empty()) {
          lines[i] = edit_member(lines[i], "level", "99");
          done = true;
        }
      }
      if (!done && !lines.empty()) {
        std::string parent = member_text(lines[0], "node_id");
        lines.push_back(
            R"({"node_id":"z-child","parent_id":)" + parent +
            R"(,"instance_key":"z","task_key":"z","status":"pending","level":57,"created_at":"2026-12-01T00:00:00.000Z","updated_at":"2026-12-01T00:00:00.000Z"})");
      }
      write_lines(out_dir / "nodes.jsonl", lines);
      break;
    }
    case DefectClass::BlobDangling: {
      auto lines = read_lines(out_dir / "events.jsonl");
      // Splice a dangling ref into the existing payload so the row stays
      // shape-valid for its event type.
      std::string marker = R"("$blob":{"digest":")" + std::string(64, '0') +
                           R"(","byte_length":3,"media_type":"text/plain"})";
      if (!lines.empty()) {
        std::size_t idx = rng.below(lines.size());
        std::string payload = member_text(lines[idx], "payload");
        std::string spliced = payload == "{}"
                                  ? "{" + marker + "}"
                                  : "{" + marker + "," + payload.substr(1);
        lines[idx] = edit_member(lines[idx], "payload", spliced);
      }
      write_lines(out_dir / "events.jsonl", lines);
      break;
    }
    case DefectClass::EdgeCycle: {
      auto lines = read_lines(out_dir / "edges.jsonl");
      std::string source, target;
      if (!lines.empty()) {
        source = member_text(lines[0], "source_node_id");
        target = member_text(lines[0], "target_node_id");
      } else {
        auto node_lines = read_lines(out_dir / "nodes.jsonl");
        source = node_lines.size() > 0 ? member_text(node_lines[0], "node_id")
                                       : "\"za\"";
        target = node_lines.size() > 1 ? member_text(node_lines[1], "node_id")
                                       : "\"zb\"";
        lines.push_back(
            R"({"source_node_id":)" + source + R"(,"target_node_id":)" + target +
            R"(,"status":"pending","created_at":"2026-12-31T23:59:58.000Z","updated_at":"2026-12-31T23:59:58.000Z"})");
      }
      lines.push_back(
          R"({"source_node_id":)" + target + R"(,"target_node_id":)" + source +
          R"(,"status":"pending","created_at":"2026-12-31T23:59:59.000Z","updated_at":"2026-12-31T23:59:59.000Z"})");
      write_lines(out_dir / "edges.jsonl", lines);
      break;
    }
    case DefectClass::AppendOnly: {
      auto lines = read_lines(out_dir / "mutations.jsonl");
      if (!lines.empty()) {
        std::size_t idx = rng.below(lines.size());
        lines[idx] = edit_member(lines[idx], "reason",
                                 "\"edited after the fact\"");
        write_lines(out_dir / "mutations.jsonl", lines);
      } else {
        auto event_lines = read_lines(out_dir / "events.jsonl");
        if (!event_lines.empty()) {
          event_lines[0] =
              edit_member(event_lines[0], "payload", R"({"text":"rewritten"})");
          write_lines(out_dir / "events.jsonl", event_lines);
        }
      }
      break;
    }
  }
  rehash_manifest(out_dir);
  return carrier;
}

void write_fixture(const NamedFixtureOutput& fixture, const fs::path& out) {
  fs::create_directories(out);
  for (const auto& [batch_name, batch] : fixture.batches) {
    for (const CardBundle& card : batch) {
      write_bundle(card,
                   Carrier::directory(out / batch_name / card.manifest.run_id));
    }
  }
  write_file(out / "gold.json", dump_document(fixture.gold));
}

}  // namespace rollcard
