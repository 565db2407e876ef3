#pragma once

#include <map>
#include <string>
#include <vector>

#include "rollcard/rules.hpp"

namespace rollcard {

struct RankingInversion {
  std::string system_a;
  std::string system_b;
  std::string rule_x;
  std::string rule_y;
  std::string order_under_x;  // "a > b" | "a < b" | "a = b"
  std::string order_under_y;
};

struct RuleGap {
  std::string system;
  std::string rule_x;
  std::string rule_y;
  double gap = 0.0;  // headline_x - headline_y, as a fraction
};

struct LabelDisagreement {
  std::string system;
  std::string rule_x;
  std::string rule_y;
  std::int64_t count = 0;
};

struct DiscrepancyReport {
  std::string batch_id;
  std::vector<std::string> systems;  // sorted
  std::vector<std::string> rules;    // rule refs, given order
  // (system, rule ref) -> full score report
  std::map<std::pair<std::string, std::string>, ScoreReport> cells;
  std::vector<RuleGap> gaps;
  std::vector<RankingInversion> inversions;
  std::vector<LabelDisagreement> disagreements;
};

// Scores every batch under every rule; emits the score matrix, all pairwise
// rule gaps per system, ranking inversions across system pairs, and per-run
// label disagreements between rule pairs.
DiscrepancyReport compare(const std::map<std::string, Batch>& batches,
                          const std::vector<ReportingRuleEntry>& rules,
                          const std::string& batch_id = "");

struct GapDecomposition {
  double gap_inclusive = 0.0;
  double gap_exclusive = 0.0;
  // gap_inclusive - gap_exclusive, attributable entirely to the denominator
  // choice. Exact identity, no tolerance.
  double convention_share = 0.0;
  std::int64_t missing_a = 0;
  std::int64_t missing_b = 0;
};

// The two rules must differ only in on_missing_artifact
// (count_as_failure vs exclude_from_denominator).
GapDecomposition decompose_gap(const Batch& batch_a, const Batch& batch_b,
                               const ReportingRuleEntry& rule_inclusive,
                               const ReportingRuleEntry& rule_exclusive);

// Accounting rows per (system, rule); rendered beside every headline.
Json failure_table(const std::map<std::string, Batch>& batches,
                   const std::vector<ReportingRuleEntry>& rules);

Json to_json(const DiscrepancyReport& report);
std::string render_table(const DiscrepancyReport& report);

}  // namespace rollcard
