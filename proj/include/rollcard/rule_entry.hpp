#pragma once

#include <optional>
#include <string>

#include "rollcard/drops.hpp"
#include "rollcard/jsonio.hpp"

namespace rollcard {

// Failure-handling policies. Every branch is explicit: none of these types is
// default-constructible, so a policy cannot exist with an unstated choice.

struct MissingArtifactPolicy {
  enum class Kind { CountAsFailure, ExcludeFromDenominator };
  Kind kind;

  static MissingArtifactPolicy count_as_failure() {
    return MissingArtifactPolicy(Kind::CountAsFailure);
  }
  static MissingArtifactPolicy exclude_from_denominator() {
    return MissingArtifactPolicy(Kind::ExcludeFromDenominator);
  }
  bool operator==(const MissingArtifactPolicy&) const = default;

 private:
  explicit MissingArtifactPolicy(Kind k) : kind(k) {}
};

struct ErrorStatusPolicy {
  enum class Kind { CountAsFailure, ExcludeFromDenominator, CoerceToFixed, Propagate };
  Kind kind;
  double fixed_value = 0.0;

  static ErrorStatusPolicy count_as_failure() {
    return ErrorStatusPolicy(Kind::CountAsFailure, 0.0);
  }
  static ErrorStatusPolicy exclude_from_denominator() {
    return ErrorStatusPolicy(Kind::ExcludeFromDenominator, 0.0);
  }
  static ErrorStatusPolicy coerce_to_fixed(double value) {
    return ErrorStatusPolicy(Kind::CoerceToFixed, value);
  }
  static ErrorStatusPolicy propagate() { return ErrorStatusPolicy(Kind::Propagate, 0.0); }
  bool operator==(const ErrorStatusPolicy&) const = default;

 private:
  ErrorStatusPolicy(Kind k, double v) : kind(k), fixed_value(v) {}
};

struct UnparseablePolicy {
  enum class Kind { CountAsFailure, CoerceToFixed, MarkSkipped };
  Kind kind;
  double fixed_value = 0.0;

  static UnparseablePolicy count_as_failure() {
    return UnparseablePolicy(Kind::CountAsFailure, 0.0);
  }
  static UnparseablePolicy coerce_to_fixed(double value) {
    return UnparseablePolicy(Kind::CoerceToFixed, value);
  }
  static UnparseablePolicy mark_skipped() { return UnparseablePolicy(Kind::MarkSkipped, 0.0); }
  bool operator==(const UnparseablePolicy&) const = default;

 private:
  UnparseablePolicy(Kind k, double v) : kind(k), fixed_value(v) {}
};

enum class GroupVarianceFilter { Off, DropZeroVarianceGroups };

struct FailurePolicy {
  FailurePolicy(MissingArtifactPolicy missing, ErrorStatusPolicy error,
                UnparseablePolicy unparseable, GroupVarianceFilter variance)
      : on_missing_artifact(missing),
        on_error_status(error),
        on_unparseable_output(unparseable),
        group_variance_filter(variance) {}

  MissingArtifactPolicy on_missing_artifact;
  ErrorStatusPolicy on_error_status;
  UnparseablePolicy on_unparseable_output;
  GroupVarianceFilter group_variance_filter;

  bool operator==(const FailurePolicy&) const = default;

  // Both rules identical apart from the missing-artifact branch.
  bool differs_only_in_missing(const FailurePolicy& other) const {
    return on_error_status == other.on_error_status &&
           on_unparseable_output == other.on_unparseable_output &&
           group_variance_filter == other.group_variance_filter;
  }
};

Json to_json(const FailurePolicy& policy);
FailurePolicy failure_policy_from_json(const Json& j);

// A named, versioned scoring procedure. `drops` is attached after execution.
struct ReportingRuleEntry {
  std::string name;
  std::string version;
  Json config = Json::object();
  std::string input_view;
  std::string output_target;
  FailurePolicy policy;
  std::optional<DropsManifest> drops;

  std::string ref() const { return name + "@" + version; }
};

Json to_json(const ReportingRuleEntry& entry);
ReportingRuleEntry rule_entry_from_json(const Json& j);

}  // namespace rollcard
