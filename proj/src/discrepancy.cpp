#include "rollcard/discrepancy.hpp"

#include <algorithm>
#include <sstream>

#include "rollcard/errors.hpp"
#include "rollcard/format.hpp"

namespace rollcard {

namespace {

std::string order_text(const std::string& a, const std::string& b, double sa,
                       double sb) {
  if (sa > sb) return a + " > " + b;
  if (sa < sb) return a + " < " + b;
  return a + " = " + b;
}

std::string policy_brief(const FailurePolicy& policy) {
  std::string missing = policy.on_missing_artifact.kind ==
                                MissingArtifactPolicy::Kind::CountAsFailure
                            ? "missing=fail"
                            : "missing=exclude";
  std::string error;
  switch (policy.on_error_status.kind) {
    case ErrorStatusPolicy::Kind::CountAsFailure: error = "error=fail"; break;
    case ErrorStatusPolicy::Kind::ExcludeFromDenominator:
      error = "error=exclude";
      break;
    case ErrorStatusPolicy::Kind::CoerceToFixed: error = "error=coerce"; break;
    case ErrorStatusPolicy::Kind::Propagate: error = "error=propagate"; break;
  }
  std::string unparseable;
  switch (policy.on_unparseable_output.kind) {
    case UnparseablePolicy::Kind::CountAsFailure:
      unparseable = "unparseable=fail";
      break;
    case UnparseablePolicy::Kind::CoerceToFixed:
      unparseable = "unparseable=coerce";
      break;
    case UnparseablePolicy::Kind::MarkSkipped:
      unparseable = "unparseable=skip";
      break;
  }
  return missing + "," + error + "," + unparseable;
}

// Rule labels in a report must be unique; entries sharing name@version are
// told apart by their policy, then by position.
std::vector<std::string> rule_labels(const std::vector<ReportingRuleEntry>& rules) {
  std::map<std::string, int> ref_counts;
  for (const ReportingRuleEntry& rule : rules) ++ref_counts[rule.ref()];
  std::vector<std::string> labels;
  for (const ReportingRuleEntry& rule : rules) {
    std::string label = rule.ref();
    if (ref_counts[label] > 1) label += "[" + policy_brief(rule.policy) + "]";
    labels.push_back(label);
  }
  std::map<std::string, int> label_counts;
  for (const std::string& label : labels) ++label_counts[label];
  std::map<std::string, int> seen;
  for (std::string& label : labels) {
    if (label_counts[label] > 1) {
      label += "#" + std::to_string(++seen[label]);
    }
  }
  return labels;
}

std::int64_t missing_count(const ScoreReport& report) {
  std::int64_t n = 0;
  for (const PerRun& run : report.per_run) {
    if (run.raw == RawOutcome::MissingArtifact) ++n;
  }
  return n;
}

}  // namespace

DiscrepancyReport compare(const std::map<std::string, Batch>& batches,
                          const std::vector<ReportingRuleEntry>& rules,
                          const std::string& batch_id) {
  DiscrepancyReport report;
  report.batch_id = batch_id;
  for (const auto& [system, batch] : batches) {
    (void)batch;
    report.systems.push_back(system);
  }
  std::sort(report.systems.begin(), report.systems.end());
  report.rules = rule_labels(rules);

  for (const std::string& system : report.systems) {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      try {
        report.cells[{system, report.rules[r]}] =
            score_rule(batches.at(system), rules[r]);
      } catch (const MissingStateRecord& e) {
        throw RuleNotApplicable(system, report.rules[r], e.what());
      } catch (const MissingVerdictColumn& e) {
        throw RuleNotApplicable(system, report.rules[r], e.what());
      } catch (const UnknownTier& e) {
        throw RuleNotApplicable(system, report.rules[r], e.what());
      }
    }
  }

  // Pairwise rule gaps per system, and label disagreements.
  for (const std::string& system : report.systems) {
    for (std::size_t x = 0; x < report.rules.size(); ++x) {
      for (std::size_t y = x + 1; y < report.rules.size(); ++y) {
        const ScoreReport& rx = report.cells.at({system, report.rules[x]});
        const ScoreReport& ry = report.cells.at({system, report.rules[y]});
        report.gaps.push_back(
            {system, report.rules[x], report.rules[y], rx.headline - ry.headline});

        // Raw labels are policy-independent, so disagreement counts reflect
        // the graders, not the failure handling.
        std::map<std::string, std::string> labels_x;
        for (const PerRun& run : rx.per_run) labels_x[run.run_id] = run.label;
        std::int64_t disagreements = 0;
        for (const PerRun& run : ry.per_run) {
          auto it = labels_x.find(run.run_id);
          if (it != labels_x.end() && it->second != run.label) ++disagreements;
        }
        report.disagreements.push_back(
            {system, report.rules[x], report.rules[y], disagreements});
      }
    }
  }

  // Ranking inversions across system pairs and rule pairs.
  for (std::size_t a = 0; a < report.systems.size(); ++a) {
    for (std::size_t b = a + 1; b < report.systems.size(); ++b) {
      for (std::size_t x = 0; x < report.rules.size(); ++x) {
        for (std::size_t y = x + 1; y < report.rules.size(); ++y) {
          const std::string& sa = report.systems[a];
          const std::string& sb = report.systems[b];
          double ax = report.cells.at({sa, report.rules[x]}).headline;
          double bx = report.cells.at({sb, report.rules[x]}).headline;
          double ay = report.cells.at({sa, report.rules[y]}).headline;
          double by = report.cells.at({sb, report.rules[y]}).headline;
          std::string under_x = order_text(sa, sb, ax, bx);
          std::string under_y = order_text(sa, sb, ay, by);
          if (under_x != under_y) {
            report.inversions.push_back(
                {sa, sb, report.rules[x], report.rules[y], under_x, under_y});
          }
        }
      }
    }
  }
  return report;
}

GapDecomposition decompose_gap(const Batch& batch_a, const Batch& batch_b,
                               const ReportingRuleEntry& rule_inclusive,
                               const ReportingRuleEntry& rule_exclusive) {
  if (rule_inclusive.name != rule_exclusive.name ||
      rule_inclusive.config != rule_exclusive.config ||
      !rule_inclusive.policy.differs_only_in_missing(rule_exclusive.policy)) {
    throw RulesDifferBeyondDenominator();
  }
  if (rule_inclusive.policy.on_missing_artifact.kind !=
          MissingArtifactPolicy::Kind::CountAsFailure ||
      rule_exclusive.policy.on_missing_artifact.kind !=
          MissingArtifactPolicy::Kind::ExcludeFromDenominator) {
    throw RulesDifferBeyondDenominator();
  }

  ScoreReport a_inclusive = score_rule(batch_a, rule_inclusive);
  ScoreReport b_inclusive = score_rule(batch_b, rule_inclusive);
  ScoreReport a_exclusive = score_rule(batch_a, rule_exclusive);
  ScoreReport b_exclusive = score_rule(batch_b, rule_exclusive);

  GapDecomposition d;
  d.gap_inclusive = a_inclusive.headline - b_inclusive.headline;
  d.gap_exclusive = a_exclusive.headline - b_exclusive.headline;
  d.convention_share = d.gap_inclusive - d.gap_exclusive;
  d.missing_a = missing_count(a_inclusive);
  d.missing_b = missing_count(b_inclusive);
  return d;
}

Json failure_table(const std::map<std::string, Batch>& batches,
                   const std::vector<ReportingRuleEntry>& rules) {
  Json rows = Json::array();
  std::vector<std::string> systems;
  for (const auto& [system, batch] : batches) {
    (void)batch;
    systems.push_back(system);
  }
  std::sort(systems.begin(), systems.end());
  std::vector<std::string> labels = rule_labels(rules);
  for (const std::string& system : systems) {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      const ReportingRuleEntry& rule = rules[r];
      ScoreReport report = score_rule(batches.at(system), rule);
      Json row = Json::object();
      row["system"] = system;
      row["rule"] = labels[r];
      row["headline"] = report.headline;
      row["attempted"] = report.accounting.attempted;
      row["scored"] = report.accounting.scored;
      row["failed"] = report.accounting.failed;
      row["errored"] = report.accounting.errored;
      row["skipped"] = report.accounting.skipped;
      row["excluded"] = report.accounting.excluded;
      row["coercions"] = report.coercions;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Json to_json(const DiscrepancyReport& report) {
  Json j = Json::object();
  j["batch_id"] = report.batch_id;
  j["systems"] = report.systems;
  j["rules"] = report.rules;
  Json scores = Json::array();
  for (const std::string& system : report.systems) {
    for (const std::string& rule : report.rules) {
      const ScoreReport& cell = report.cells.at({system, rule});
      Json row = Json::object();
      row["system"] = system;
      row["rule"] = rule;
      row["headline"] = cell.headline;
      row["accounting"] = Json{{"attempted", cell.accounting.attempted},
                               {"scored", cell.accounting.scored},
                               {"failed", cell.accounting.failed},
                               {"errored", cell.accounting.errored},
                               {"skipped", cell.accounting.skipped},
                               {"excluded", cell.accounting.excluded}};
      row["coercions"] = cell.coercions;
      scores.push_back(std::move(row));
    }
  }
  j["scores"] = std::move(scores);
  Json gaps = Json::array();
  for (const RuleGap& gap : report.gaps) {
    gaps.push_back(Json{{"system", gap.system},
                        {"rule_x", gap.rule_x},
                        {"rule_y", gap.rule_y},
                        {"gap", gap.gap},
                        {"gap_pp_display", format_pp(gap.gap)}});
  }
  j["gaps"] = std::move(gaps);
  Json inversions = Json::array();
  for (const RankingInversion& inv : report.inversions) {
    inversions.push_back(Json{{"system_a", inv.system_a},
                              {"system_b", inv.system_b},
                              {"rule_x", inv.rule_x},
                              {"rule_y", inv.rule_y},
                              {"order_under_x", inv.order_under_x},
                              {"order_under_y", inv.order_under_y}});
  }
  j["inversions"] = std::move(inversions);
  Json disagreements = Json::array();
  for (const LabelDisagreement& d : report.disagreements) {
    disagreements.push_back(Json{{"system", d.system},
                                 {"rule_x", d.rule_x},
                                 {"rule_y", d.rule_y},
                                 {"count", d.count}});
  }
  j["label_disagreements"] = std::move(disagreements);
  return j;
}

std::string render_table(const DiscrepancyReport& report) {
  std::ostringstream out;
  out << "system\trule\theadline\tattempted\tscored\tfailed\terrored\tskipped"
         "\texcluded\tcoercions\n";
  for (const std::string& system : report.systems) {
    for (const std::string& rule : report.rules) {
      const ScoreReport& cell = report.cells.at({system, rule});
      out << system << "\t" << rule << "\t" << format_percent(cell.headline)
          << "%\t" << cell.accounting.attempted << "\t"
          << cell.accounting.scored << "\t" << cell.accounting.failed << "\t"
          << cell.accounting.errored << "\t" << cell.accounting.skipped << "\t"
          << cell.accounting.excluded << "\t" << cell.coercions << "\n";
    }
  }
  for (const RuleGap& gap : report.gaps) {
    out << "gap\t" << gap.system << "\t" << gap.rule_x << " vs " << gap.rule_y
        << "\t" << format_pp(gap.gap) << "pp\n";
  }
  for (const LabelDisagreement& d : report.disagreements) {
    if (d.count > 0) {
      out << "label_disagreements\t" << d.system << "\t" << d.rule_x << " vs "
          << d.rule_y << "\t" << d.count << "\n";
    }
  }
  for (const RankingInversion& inv : report.inversions) {
    out << "inversion\t" << inv.rule_x << ": " << inv.order_under_x << "\t"
        << inv.rule_y << ": " << inv.order_under_y << "\n";
  }
  return out.str();
}

}  // namespace rollcard
