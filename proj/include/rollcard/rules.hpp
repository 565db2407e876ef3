#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rollcard/access.hpp"
#include "rollcard/bundle.hpp"
#include "rollcard/rule_entry.hpp"

namespace rollcard {

// Raw per-run outcomes, fixed before any policy is applied.
enum class RawOutcome { Scored, MissingArtifact, ErrorStatus, Unparseable };

// Accounting buckets; together they partition the attempted runs.
enum class Bucket { Scored, Failed, Errored, Skipped, Excluded };

std::string_view raw_outcome_name(RawOutcome raw);
std::string_view bucket_name(Bucket bucket);

struct FailureAccounting {
  std::int64_t attempted = 0;
  std::int64_t scored = 0;
  std::int64_t failed = 0;
  std::int64_t errored = 0;
  std::int64_t skipped = 0;
  std::int64_t excluded = 0;

  bool conserved() const {
    return attempted == scored + failed + errored + skipped + excluded;
  }
  bool operator==(const FailureAccounting&) const = default;
};

struct PerRun {
  std::string run_id;
  RawOutcome raw = RawOutcome::Scored;
  // Raw outcome label; never changes with the policy.
  std::string label;
  Bucket bucket = Bucket::Scored;
  // Present exactly when the run is in the denominator.
  std::optional<double> contribution;
  bool coerced = false;
  std::optional<std::string> group;
};

struct ScoreReport {
  std::string rule_name;
  std::string rule_version;
  std::string metric;
  double headline = 0.0;
  std::int64_t denominator = 0;
  FailureAccounting accounting;
  std::int64_t coercions = 0;
  std::vector<PerRun> per_run;
  DropsManifest drops;
};

// Recomputes the headline from per_run alone; equals `headline` exactly.
double recompute_headline(const ScoreReport& report);

Json to_json(const ScoreReport& report);
// One-line summary; the headline never appears without its accounting.
std::string render_line(const ScoreReport& report);

class RuleRegistry {
 public:
  void register_rule(ReportingRuleEntry entry);
  const ReportingRuleEntry* lookup(const std::string& name,
                                   const std::string& version) const;
  const std::vector<ReportingRuleEntry>& entries() const { return entries_; }

 private:
  std::vector<ReportingRuleEntry> entries_;
};

using Batch = std::vector<CardBundle>;

// Scoring rules. Each card yields one run; outcomes are read through a
// tracked reader and the merged drops manifest rides on the report.
ScoreReport score_mean(const Batch& batch, const ReportingRuleEntry& entry);
ScoreReport score_threshold(const Batch& batch, const ReportingRuleEntry& entry);
ScoreReport score_judged(const Batch& batch, const ReportingRuleEntry& entry);
ScoreReport score_trajectory(const Batch& batch, const ReportingRuleEntry& entry);

// Dispatch on entry.name ("mean", "threshold", "judged", "trajectory").
ScoreReport score_rule(const Batch& batch, const ReportingRuleEntry& entry);

// Answer normalization used by the rule-based grader: trim, casefold,
// collapse internal whitespace.
std::string normalize_answer(std::string_view text);

}  // namespace rollcard
