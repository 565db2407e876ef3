#include <doctest.h>

#include <filesystem>

#include "rollcard/bundle_io.hpp"
#include "rollcard/errors.hpp"
#include "rollcard/rules.hpp"
#include "rollcard/synth.hpp"

using namespace rollcard;

namespace {

FailurePolicy strict_policy() {
  return FailurePolicy(MissingArtifactPolicy::count_as_failure(),
                       ErrorStatusPolicy::count_as_failure(),
                       UnparseablePolicy::count_as_failure(),
                       GroupVarianceFilter::Off);
}

ReportingRuleEntry mean_rule(FailurePolicy policy, std::string version = "1") {
  ReportingRuleEntry entry{"mean", std::move(version), Json::object(),
                           "final_score", "mean_score", policy, std::nullopt};
  return entry;
}

CardBundle make_card(const std::string& run_id, const std::string& status,
                     std::vector<std::pair<std::string, Json>> notes) {
  CardBundle card;
  card.manifest.run_id = run_id;
  card.manifest.created_at = Timestamp{"2026-03-01T00:00:00.000Z"};
  NodeRow root;
  root.node_id = "n-" + run_id;
  root.instance_key = run_id;
  root.task_key = "task";
  root.status = status;
  root.level = 0;
  root.created_at = Timestamp{"2026-03-01T00:00:00.000Z"};
  root.updated_at = Timestamp{"2026-03-01T00:00:01.000Z"};
  card.streams.nodes = RowStream<NodeRow>({root});
  std::vector<AnnotationRow> annotations;
  for (auto& [ns, payload] : notes) {
    AnnotationRow row;
    row.target_type = "node";
    row.target_id = root.node_id;
    row.ns = ns;
    row.sequence = 0;
    row.payload = rawjson::RawValue{payload.dump()};
    row.created_at = Timestamp{"2026-03-01T00:00:02.000Z"};
    annotations.push_back(std::move(row));
  }
  card.streams.annotations = RowStream<AnnotationRow>(annotations);
  return card;
}

CardBundle value_card(const std::string& run_id, double value) {
  return make_card(run_id, value > 0 ? "succeeded" : "failed",
                   {{"score.final", Json{{"value", value}}}});
}

}  // namespace

TEST_CASE("ten clean runs score 1.0 with accounting (10,10,0,0,0,0)") {
  Batch batch;
  for (int i = 0; i < 10; ++i) {
    batch.push_back(value_card("run-" + std::to_string(i), 1.0));
  }
  ScoreReport report = score_mean(batch, mean_rule(strict_policy()));
  CHECK(report.headline == 1.0);
  CHECK(report.accounting ==
        FailureAccounting{10, 10, 0, 0, 0, 0});
  CHECK(report.denominator == 10);
  CHECK(recompute_headline(report) == report.headline);
}

TEST_CASE("missing artifacts: count-as-failure vs exclude denominators") {
  Batch batch;
  for (int i = 0; i < 6; ++i) {
    batch.push_back(value_card("run-" + std::to_string(i), i < 3 ? 1.0 : 0.0));
  }
  batch.push_back(make_card("run-miss-1", "cancelled", {}));
  batch.push_back(make_card("run-miss-2", "cancelled", {}));

  ScoreReport counted = score_mean(batch, mean_rule(strict_policy()));
  CHECK(counted.headline == doctest::Approx(3.0 / 8.0));
  CHECK(counted.accounting == FailureAccounting{8, 6, 2, 0, 0, 0});

  FailurePolicy exclude(MissingArtifactPolicy::exclude_from_denominator(),
                        ErrorStatusPolicy::count_as_failure(),
                        UnparseablePolicy::count_as_failure(),
                        GroupVarianceFilter::Off);
  ScoreReport excluded = score_mean(batch, mean_rule(exclude, "2"));
  CHECK(excluded.headline == doctest::Approx(3.0 / 6.0));
  CHECK(excluded.accounting == FailureAccounting{8, 6, 0, 0, 0, 2});
}

TEST_CASE("coerced error statuses stay visible in the errored bucket") {
  Batch batch;
  for (int i = 0; i < 8; ++i) {
    batch.push_back(value_card("run-" + std::to_string(i), 1.0));
  }
  batch.push_back(make_card("run-err-1", "errored", {}));
  batch.push_back(make_card("run-err-2", "errored", {}));

  FailurePolicy coerce(MissingArtifactPolicy::count_as_failure(),
                       ErrorStatusPolicy::coerce_to_fixed(0.0),
                       UnparseablePolicy::count_as_failure(),
                       GroupVarianceFilter::Off);
  ScoreReport report = score_mean(batch, mean_rule(coerce));
  CHECK(report.accounting.errored == 2);
  CHECK(report.denominator == 10);  // ten contributions entered the mean
  CHECK(report.headline == doctest::Approx(0.8));
  CHECK(report.coercions == 2);
  CHECK(report.accounting.conserved());

  // propagate turns the same batch into an error.
  FailurePolicy propagate(MissingArtifactPolicy::count_as_failure(),
                          ErrorStatusPolicy::propagate(),
                          UnparseablePolicy::count_as_failure(),
                          GroupVarianceFilter::Off);
  CHECK_THROWS_AS(score_mean(batch, mean_rule(propagate, "3")),
                  PropagatedErrorStatus);
}

TEST_CASE("unparseable outputs: coerce lands in scored with a coercion flag") {
  Batch batch;
  batch.push_back(value_card("run-0", 1.0));
  batch.push_back(
      make_card("run-bad", "succeeded",
                {{"score.final", Json{{"value", "not-a-number"}}}}));

  FailurePolicy coerce(MissingArtifactPolicy::count_as_failure(),
                       ErrorStatusPolicy::count_as_failure(),
                       UnparseablePolicy::coerce_to_fixed(0.0),
                       GroupVarianceFilter::Off);
  ScoreReport report = score_mean(batch, mean_rule(coerce));
  CHECK(report.accounting.errored == 0);
  CHECK(report.accounting.scored == 2);
  CHECK(report.coercions == 1);

  FailurePolicy skip(MissingArtifactPolicy::count_as_failure(),
                     ErrorStatusPolicy::count_as_failure(),
                     UnparseablePolicy::mark_skipped(),
                     GroupVarianceFilter::Off);
  ScoreReport skipped = score_mean(batch, mean_rule(skip, "2"));
  CHECK(skipped.accounting.skipped == 1);
  CHECK(skipped.denominator == 1);
}

TEST_CASE("policy changes never change raw per-run labels") {
  Batch batch;
  batch.push_back(value_card("run-0", 1.0));
  batch.push_back(make_card("run-miss", "cancelled", {}));
  batch.push_back(make_card("run-err", "errored", {}));

  FailurePolicy a(MissingArtifactPolicy::count_as_failure(),
                  ErrorStatusPolicy::coerce_to_fixed(0.5),
                  UnparseablePolicy::mark_skipped(), GroupVarianceFilter::Off);
  FailurePolicy b(MissingArtifactPolicy::exclude_from_denominator(),
                  ErrorStatusPolicy::exclude_from_denominator(),
                  UnparseablePolicy::count_as_failure(),
                  GroupVarianceFilter::Off);
  ScoreReport ra = score_mean(batch, mean_rule(a));
  ScoreReport rb = score_mean(batch, mean_rule(b, "2"));
  REQUIRE(ra.per_run.size() == rb.per_run.size());
  for (std::size_t i = 0; i < ra.per_run.size(); ++i) {
    CHECK(ra.per_run[i].run_id == rb.per_run[i].run_id);
    CHECK(ra.per_run[i].label == rb.per_run[i].label);
    CHECK(ra.per_run[i].raw == rb.per_run[i].raw);
  }
}

TEST_CASE("zero-variance groups move wholesale to excluded") {
  Batch batch;
  auto grouped = [&](const std::string& id, double value,
                     const std::string& group) {
    return make_card(id, "succeeded",
                     {{"score.final", Json{{"value", value}}},
                      {"grading.group", Json{{"group", group}}}});
  };
  batch.push_back(grouped("run-0", 1.0, "g1"));
  batch.push_back(grouped("run-1", 1.0, "g1"));  // g1 variance zero
  batch.push_back(grouped("run-2", 1.0, "g2"));
  batch.push_back(grouped("run-3", 0.0, "g2"));  // g2 keeps variance

  FailurePolicy filter(MissingArtifactPolicy::count_as_failure(),
                       ErrorStatusPolicy::count_as_failure(),
                       UnparseablePolicy::count_as_failure(),
                       GroupVarianceFilter::DropZeroVarianceGroups);
  ScoreReport report = score_mean(batch, mean_rule(filter));
  CHECK(report.accounting.excluded == 2);
  CHECK(report.denominator == 2);
  CHECK(report.headline == doctest::Approx(0.5));
}

TEST_CASE("threshold rule: full passing set is 100%, empty batch errors") {
  Batch batch;
  const char* tiers[] = {"gold", "silver", "below"};
  for (int i = 0; i < 3; ++i) {
    batch.push_back(make_card("run-" + std::to_string(i), "succeeded",
                              {{"grading.tier", Json{{"tier", tiers[i]}}}}));
  }
  ReportingRuleEntry entry{
      "threshold", "1",
      Json{{"tiers", Json::array({"gold", "silver", "below"})},
           {"passing_set", Json::array({"gold", "silver", "below"})}},
      "final_score", "pass_rate", strict_policy(), std::nullopt};
  ScoreReport report = score_threshold(batch, entry);
  CHECK(report.headline == 1.0);

  CHECK_THROWS_AS(score_threshold({}, entry), EmptyDenominator);

  ReportingRuleEntry bad = entry;
  bad.config["passing_set"] = Json::array({"platinum"});
  CHECK_THROWS_AS(score_threshold(batch, bad), UnknownTier);
}

TEST_CASE("judged rule: normalization, coerced verdicts, recorded labels") {
  ReportingRuleEntry rule_based{
      "judged", "rb", Json{{"grader", "rule_based"}},
      "final_score", "accuracy", strict_policy(), std::nullopt};

  Batch batch;
  batch.push_back(make_card("run-0", "succeeded",
                            {{"answers.gold", Json{{"text", "Paris"}}},
                             {"answers.predicted", Json{{"text", "  paris "}}}}));
  ScoreReport rb = score_judged(batch, rule_based);
  CHECK(rb.headline == 1.0);
  CHECK(rb.per_run[0].label == "correct");

  FailurePolicy coerce(MissingArtifactPolicy::count_as_failure(),
                       ErrorStatusPolicy::count_as_failure(),
                       UnparseablePolicy::coerce_to_fixed(0.0),
                       GroupVarianceFilter::Off);
  ReportingRuleEntry judge{
      "judged", "j",
      Json{{"grader", "recorded_judge_labels"}, {"verdict_column", "verdict"}},
      "final_score", "accuracy", coerce, std::nullopt};
  Batch judged;
  judged.push_back(make_card("run-0", "succeeded",
                             {{"judge", Json{{"verdict", "CORRECT"}}}}));
  judged.push_back(make_card("run-1", "succeeded",
                             {{"judge", Json{{"verdict", "INVALID"}}}}));
  ScoreReport jr = score_judged(judged, judge);
  CHECK(jr.headline == doctest::Approx(0.5));
  CHECK(jr.coercions == 1);
  CHECK(jr.per_run[1].label == "unparseable_verdict");
  CHECK(jr.per_run[1].bucket == Bucket::Scored);

  Batch no_column;
  no_column.push_back(make_card(
      "run-0", "succeeded", {{"judge", Json{{"note", "no verdict here"}}}}));
  CHECK_THROWS_AS(score_judged(no_column, judge), MissingVerdictColumn);
}

namespace {

CardBundle trajectory_card(const std::string& run_id, const Json& calls,
                           const Json& final_state, const Json& gold_calls,
                           const Json& gold_state) {
  CardBundle card = make_card(
      run_id, "succeeded",
      {{"trajectory.gold", Json{{"calls", gold_calls}, {"state", gold_state}}},
       {"trajectory.final_state", Json{{"state", final_state}}}});
  std::vector<EventRow> events;
  std::int64_t seq = 0;
  for (const Json& call : calls) {
    EventRow row;
    row.event_id = "e-" + run_id + "-" + std::to_string(seq);
    row.task_execution_id = run_id;
    row.worker_binding_key = "w";
    row.sequence = seq++;
    row.event_type = "tool_call";
    row.payload = rawjson::RawValue{call.dump()};
    events.push_back(std::move(row));
  }
  card.streams.events = RowStream<EventRow>(events);
  return card;
}

ReportingRuleEntry trajectory_rule(const std::string& definition) {
  return ReportingRuleEntry{
      "trajectory", definition, Json{{"success_definition", definition}},
      "per_worker", "success_rate",
      FailurePolicy(MissingArtifactPolicy::count_as_failure(),
                    ErrorStatusPolicy::count_as_failure(),
                    UnparseablePolicy::count_as_failure(),
                    GroupVarianceFilter::Off),
      std::nullopt};
}

}  // namespace

TEST_CASE("trajectory graders disagree on order-divergent runs") {
  Json c1 = Json{{"name", "a"}, {"args", Json{{"x", 1}}}};
  Json c2 = Json{{"name", "b"}, {"args", Json{{"y", 2}}}};
  Json gold_calls = Json::array({c1, c2});
  Json gold_state = Json{{"done", true}};

  Batch batch;
  batch.push_back(trajectory_card("run-0", Json::array({c2, c1}), gold_state,
                                  gold_calls, gold_state));
  CHECK(score_trajectory(batch, trajectory_rule("db_state")).headline == 1.0);
  CHECK(score_trajectory(batch, trajectory_rule("action_sequence")).headline ==
        0.0);
  CHECK(score_trajectory(batch, trajectory_rule("action_set")).headline == 1.0);
}

TEST_CASE("empty gold, empty trajectory, untouched state succeeds everywhere") {
  Json initial = Json{{"inventory", Json::object()}};
  Batch batch;
  batch.push_back(trajectory_card("run-0", Json::array(), initial,
                                  Json::array(), initial));
  for (const char* definition : {"db_state", "action_sequence", "action_set"}) {
    CHECK(score_trajectory(batch, trajectory_rule(definition)).headline == 1.0);
  }
}

TEST_CASE("db_state grading without a state record fails loudly") {
  CardBundle card = make_card(
      "run-0", "succeeded",
      {{"trajectory.gold",
        Json{{"calls", Json::array()}, {"state", Json{{"x", 1}}}}}});
  CHECK_THROWS_AS(score_trajectory({card}, trajectory_rule("db_state")),
                  MissingStateRecord);
  // sequence/set graders do not need the state record
  CHECK_NOTHROW(score_trajectory({card}, trajectory_rule("action_set")));
}

TEST_CASE("registry rejects duplicates and round-trips through manifests") {
  RuleRegistry registry;
  registry.register_rule(mean_rule(strict_policy()));
  CHECK_THROWS_AS(registry.register_rule(mean_rule(strict_policy())),
                  DuplicateRule);
  registry.register_rule(mean_rule(strict_policy(), "2"));
  CHECK(registry.lookup("mean", "2") != nullptr);
  CHECK(registry.lookup("mean", "9") == nullptr);

  CardBundle card = value_card("run-0", 1.0);
  card.manifest.rule_registry = registry.entries();
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "rollcard-registry";
  fs::remove_all(dir);
  write_bundle(card, Carrier::directory(dir));
  CardBundle back = read_bundle(Carrier::directory(dir));
  REQUIRE(back.manifest.rule_registry.size() == 2);
  CHECK(to_json(back.manifest.rule_registry[0]) ==
        to_json(registry.entries()[0]));
}

TEST_CASE("accounting conservation holds under randomized policies") {
  Rng rng(2026);
  Batch pool;
  for (int i = 0; i < 12; ++i) {
    switch (i % 4) {
      case 0: pool.push_back(value_card("run-" + std::to_string(i), 1.0)); break;
      case 1: pool.push_back(value_card("run-" + std::to_string(i), 0.0)); break;
      case 2:
        pool.push_back(make_card("run-" + std::to_string(i), "errored", {}));
        break;
      default:
        pool.push_back(make_card("run-" + std::to_string(i), "cancelled", {}));
    }
  }
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    MissingArtifactPolicy missing =
        rng.below(2) ? MissingArtifactPolicy::count_as_failure()
                     : MissingArtifactPolicy::exclude_from_denominator();
    ErrorStatusPolicy error = ErrorStatusPolicy::count_as_failure();
    switch (rng.below(3)) {
      case 0: error = ErrorStatusPolicy::count_as_failure(); break;
      case 1: error = ErrorStatusPolicy::exclude_from_denominator(); break;
      default: error = ErrorStatusPolicy::coerce_to_fixed(0.0); break;
    }
    UnparseablePolicy unparseable = UnparseablePolicy::count_as_failure();
    switch (rng.below(3)) {
      case 0: unparseable = UnparseablePolicy::count_as_failure(); break;
      case 1: unparseable = UnparseablePolicy::coerce_to_fixed(0.5); break;
      default: unparseable = UnparseablePolicy::mark_skipped(); break;
    }
    FailurePolicy policy(missing, error, unparseable, GroupVarianceFilter::Off);
    try {
      ScoreReport report = score_mean(pool, mean_rule(policy));
      CHECK(report.accounting.conserved());
      CHECK(recompute_headline(report) == report.headline);
      ++checked;
    } catch (const EmptyDenominator&) {
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("the one-line summary always carries the accounting") {
  ScoreReport report = score_mean({value_card("run-0", 1.0)},
                                  mean_rule(strict_policy()));
  std::string line = render_line(report);
  for (const char* field : {"attempted=", "scored=", "failed=", "errored=",
                            "skipped=", "excluded="}) {
    CHECK(line.find(field) != std::string::npos);
  }
  Json j = to_json(report);
  CHECK(j.contains("headline"));
  CHECK(j.contains("accounting"));
}
