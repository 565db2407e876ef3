#include <doctest.h>

#include "rollcard/discrepancy.hpp"
#include "rollcard/errors.hpp"
#include "rollcard/format.hpp"
#include "rollcard/synth.hpp"

using namespace rollcard;

namespace {

FailurePolicy base_policy(MissingArtifactPolicy missing) {
  return FailurePolicy(missing, ErrorStatusPolicy::count_as_failure(),
                       UnparseablePolicy::count_as_failure(),
                       GroupVarianceFilter::Off);
}

ReportingRuleEntry mean_rule(const std::string& version,
                             MissingArtifactPolicy missing) {
  return ReportingRuleEntry{"mean",        version,
                            Json::object(), "final_score",
                            "mean_score",  base_policy(missing),
                            std::nullopt};
}

ReportingRuleEntry trajectory_rule(const std::string& definition) {
  return ReportingRuleEntry{
      "trajectory", definition, Json{{"success_definition", definition}},
      "per_worker", "success_rate",
      base_policy(MissingArtifactPolicy::count_as_failure()), std::nullopt};
}

}  // namespace

TEST_CASE("one system under two identical graders: zero gap, no inversions") {
  NamedFixtureOutput fixture = gen_named("mlebench_medal");
  ReportingRuleEntry gold_only{
      "threshold", "gold",
      Json{{"tiers",
            Json::array({"gold", "silver", "bronze", "above_median", "below"})},
           {"passing_set", Json::array({"gold"})}},
      "final_score", "pass_rate",
      base_policy(MissingArtifactPolicy::count_as_failure()), std::nullopt};
  ReportingRuleEntry gold_only_again = gold_only;
  gold_only_again.version = "gold2";

  DiscrepancyReport report =
      compare(fixture.batches, {gold_only, gold_only_again}, "mle");
  REQUIRE(report.gaps.size() == 1);
  CHECK(report.gaps[0].gap == 0.0);
  CHECK(report.inversions.empty());
  CHECK(report.disagreements[0].count == 0);
}

TEST_CASE("planted trajectory fixture flips the ordering exactly once") {
  NamedFixtureOutput fixture = gen_named("taubench_graders");
  DiscrepancyReport report =
      compare(fixture.batches,
              {trajectory_rule("db_state"), trajectory_rule("action_sequence")},
              "tau");
  REQUIRE(report.inversions.size() == 1);
  const RankingInversion& inv = report.inversions[0];
  CHECK(inv.order_under_x == "system_a > system_b");
  CHECK(inv.order_under_y == "system_a < system_b");

  // The 16.9pp rule gap on system_a.
  bool found = false;
  for (const RuleGap& gap : report.gaps) {
    if (gap.system == "system_a") {
      CHECK(format_pp(gap.gap) == "16.9");
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("gap antisymmetry holds across the score matrix") {
  NamedFixtureOutput fixture = gen_named("taubench_graders");
  DiscrepancyReport report =
      compare(fixture.batches,
              {trajectory_rule("db_state"), trajectory_rule("action_set")},
              "tau");
  for (const RuleGap& gap : report.gaps) {
    double x = report.cells.at({gap.system, gap.rule_x}).headline;
    double y = report.cells.at({gap.system, gap.rule_y}).headline;
    CHECK(gap.gap == x - y);
    CHECK(gap.gap == -(y - x));
  }
}

TEST_CASE("swebench decomposition: 15.6pp inclusive, 13.3pp exclusive, 2.3pp share") {
  NamedFixtureOutput fixture = gen_named("swebench_gap");
  GapDecomposition d = decompose_gap(
      fixture.batches.at("system_a"), fixture.batches.at("system_b"),
      mean_rule("incl", MissingArtifactPolicy::count_as_failure()),
      mean_rule("excl", MissingArtifactPolicy::exclude_from_denominator()));
  CHECK(format_pp(d.gap_inclusive) == "15.6");
  CHECK(format_pp(d.gap_exclusive) == "13.3");
  CHECK(format_pp(d.convention_share) == "2.3");
  // Exact identity, no tolerance.
  CHECK(d.convention_share == d.gap_inclusive - d.gap_exclusive);
  CHECK(d.missing_a == 4);
  CHECK(d.missing_b == 50);
}

TEST_CASE("identical batches decompose to zero everywhere") {
  NamedFixtureOutput fixture = gen_named("swebench_gap");
  const Batch& batch = fixture.batches.at("system_a");
  GapDecomposition d = decompose_gap(
      batch, batch, mean_rule("incl", MissingArtifactPolicy::count_as_failure()),
      mean_rule("excl", MissingArtifactPolicy::exclude_from_denominator()));
  CHECK(d.gap_inclusive == 0.0);
  CHECK(d.gap_exclusive == 0.0);
  CHECK(d.convention_share == 0.0);
}

TEST_CASE("batches without missing artifacts have zero convention share") {
  NamedFixtureOutput fixture = gen_named("mlebench_medal");
  const Batch& batch = fixture.batches.at("submissions");
  Batch half_a(batch.begin(), batch.begin() + 400);
  Batch half_b(batch.begin() + 400, batch.begin() + 800);
  ReportingRuleEntry incl{
      "threshold", "incl",
      Json{{"tiers",
            Json::array({"gold", "silver", "bronze", "above_median", "below"})},
           {"passing_set", Json::array({"gold"})}},
      "final_score", "pass_rate",
      base_policy(MissingArtifactPolicy::count_as_failure()), std::nullopt};
  ReportingRuleEntry excl = incl;
  excl.version = "excl";
  excl.policy = base_policy(MissingArtifactPolicy::exclude_from_denominator());
  GapDecomposition d = decompose_gap(half_a, half_b, incl, excl);
  CHECK(d.missing_a == 0);
  CHECK(d.missing_b == 0);
  CHECK(d.convention_share == 0.0);
}

TEST_CASE("decomposition refuses rules that differ beyond the denominator") {
  NamedFixtureOutput fixture = gen_named("swebench_gap");
  ReportingRuleEntry incl = mean_rule("incl", MissingArtifactPolicy::count_as_failure());
  ReportingRuleEntry excl = mean_rule("excl", MissingArtifactPolicy::exclude_from_denominator());
  ReportingRuleEntry wrong = excl;
  wrong.policy = FailurePolicy(MissingArtifactPolicy::exclude_from_denominator(),
                               ErrorStatusPolicy::coerce_to_fixed(0.0),
                               UnparseablePolicy::count_as_failure(),
                               GroupVarianceFilter::Off);
  CHECK_THROWS_AS(decompose_gap(fixture.batches.at("system_a"),
                                fixture.batches.at("system_b"), incl, wrong),
                  RulesDifferBeyondDenominator);
  // Swapped directions are also rejected.
  CHECK_THROWS_AS(decompose_gap(fixture.batches.at("system_a"),
                                fixture.batches.at("system_b"), excl, incl),
                  RulesDifferBeyondDenominator);
}

TEST_CASE("failure table carries accounting beside every headline") {
  NamedFixtureOutput fixture = gen_named("swebench_gap");
  Json table = failure_table(
      fixture.batches,
      {mean_rule("incl", MissingArtifactPolicy::count_as_failure()),
       mean_rule("excl", MissingArtifactPolicy::exclude_from_denominator())});
  REQUIRE(table.size() == 4);
  for (const Json& row : table) {
    for (const char* key : {"system", "rule", "headline", "attempted", "scored",
                            "failed", "errored", "skipped", "excluded",
                            "coercions"}) {
      CHECK(row.contains(key));
    }
  }
  // 50/500 missing under exclude: excluded=50, attempted=500.
  bool checked = false;
  for (const Json& row : table) {
    if (row["system"] == "system_b" && row["rule"] == "mean@excl") {
      CHECK(row["excluded"] == 50);
      CHECK(row["attempted"] == 500);
      checked = true;
    }
  }
  CHECK(checked);
}

TEST_CASE("rendered table always includes the accounting columns") {
  NamedFixtureOutput fixture = gen_named("mlebench_medal");
  ReportingRuleEntry rule{
      "threshold", "1",
      Json{{"tiers",
            Json::array({"gold", "silver", "bronze", "above_median", "below"})},
           {"passing_set", Json::array({"gold"})}},
      "final_score", "pass_rate",
      base_policy(MissingArtifactPolicy::count_as_failure()), std::nullopt};
  ReportingRuleEntry rule2 = rule;
  rule2.version = "2";
  DiscrepancyReport report = compare(fixture.batches, {rule, rule2}, "mle");
  std::string text = render_table(report);
  for (const char* column : {"attempted", "scored", "failed", "errored",
                             "skipped", "excluded"}) {
    CHECK(text.find(column) != std::string::npos);
  }
}

TEST_CASE("brute-force ordering enumeration finds exactly the reported inversions") {
  NamedFixtureOutput fixture = gen_named("taubench_graders");
  std::vector<ReportingRuleEntry> rules = {trajectory_rule("db_state"),
                                           trajectory_rule("action_sequence"),
                                           trajectory_rule("action_set")};
  DiscrepancyReport report = compare(fixture.batches, rules, "tau");

  // Independent enumeration over the score matrix.
  int expected = 0;
  auto sign = [](double a, double b) { return a < b ? -1 : (a > b ? 1 : 0); };
  for (std::size_t a = 0; a < report.systems.size(); ++a) {
    for (std::size_t b = a + 1; b < report.systems.size(); ++b) {
      for (std::size_t x = 0; x < report.rules.size(); ++x) {
        for (std::size_t y = x + 1; y < report.rules.size(); ++y) {
          double ax = report.cells.at({report.systems[a], report.rules[x]}).headline;
          double bx = report.cells.at({report.systems[b], report.rules[x]}).headline;
          double ay = report.cells.at({report.systems[a], report.rules[y]}).headline;
          double by = report.cells.at({report.systems[b], report.rules[y]}).headline;
          if (sign(ax, bx) != sign(ay, by)) ++expected;
        }
      }
    }
  }
  CHECK(static_cast<int>(report.inversions.size()) == expected);
  // db_state vs action_sequence and action_sequence vs action_set both flip.
  CHECK(expected == 2);
}
