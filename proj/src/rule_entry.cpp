#include "rollcard/rule_entry.hpp"

#include "rollcard/errors.hpp"

namespace rollcard {

namespace {

Json branch_json(const ErrorStatusPolicy& p) {
  switch (p.kind) {
    case ErrorStatusPolicy::Kind::CountAsFailure: return "count_as_failure";
    case ErrorStatusPolicy::Kind::ExcludeFromDenominator:
      return "exclude_from_denominator";
    case ErrorStatusPolicy::Kind::CoerceToFixed:
      return Json{{"coerce_to_fixed", p.fixed_value}};
    case ErrorStatusPolicy::Kind::Propagate: return "propagate";
  }
  return {};
}

Json branch_json(const UnparseablePolicy& p) {
  switch (p.kind) {
    case UnparseablePolicy::Kind::CountAsFailure: return "count_as_failure";
    case UnparseablePolicy::Kind::CoerceToFixed:
      return Json{{"coerce_to_fixed", p.fixed_value}};
    case UnparseablePolicy::Kind::MarkSkipped: return "mark_skipped";
  }
  return {};
}

}  // namespace

Json to_json(const FailurePolicy& policy) {
  Json j = Json::object();
  j["on_missing_artifact"] =
      policy.on_missing_artifact.kind == MissingArtifactPolicy::Kind::CountAsFailure
          ? "count_as_failure"
          : "exclude_from_denominator";
  j["on_error_status"] = branch_json(policy.on_error_status);
  j["on_unparseable_output"] = branch_json(policy.on_unparseable_output);
  j["group_variance_filter"] =
      policy.group_variance_filter == GroupVarianceFilter::Off
          ? "off"
          : "drop_zero_variance_groups";
  return j;
}

FailurePolicy failure_policy_from_json(const Json& j) {
  auto need = [&](const char* key) -> const Json& {
    if (!j.contains(key)) throw MissingRequiredColumn(key);
    return j.at(key);
  };

  const Json& jm = need("on_missing_artifact");
  MissingArtifactPolicy missing =
      jm == "count_as_failure"
          ? MissingArtifactPolicy::count_as_failure()
          : (jm == "exclude_from_denominator"
                 ? MissingArtifactPolicy::exclude_from_denominator()
                 : throw TypeMismatch("on_missing_artifact",
                                      "count_as_failure | "
                                      "exclude_from_denominator"));

  const Json& je = need("on_error_status");
  ErrorStatusPolicy error = ErrorStatusPolicy::count_as_failure();
  if (je.is_object() && je.contains("coerce_to_fixed")) {
    error = ErrorStatusPolicy::coerce_to_fixed(je.at("coerce_to_fixed").get<double>());
  } else if (je == "count_as_failure") {
    error = ErrorStatusPolicy::count_as_failure();
  } else if (je == "exclude_from_denominator") {
    error = ErrorStatusPolicy::exclude_from_denominator();
  } else if (je == "propagate") {
    error = ErrorStatusPolicy::propagate();
  } else {
    throw TypeMismatch("on_error_status",
                       "count_as_failure | exclude_from_denominator | "
                       "coerce_to_fixed | propagate");
  }

  const Json& ju = need("on_unparseable_output");
  UnparseablePolicy unparseable = UnparseablePolicy::count_as_failure();
  if (ju.is_object() && ju.contains("coerce_to_fixed")) {
    unparseable =
        UnparseablePolicy::coerce_to_fixed(ju.at("coerce_to_fixed").get<double>());
  } else if (ju == "count_as_failure") {
    unparseable = UnparseablePolicy::count_as_failure();
  } else if (ju == "mark_skipped") {
    unparseable = UnparseablePolicy::mark_skipped();
  } else {
    throw TypeMismatch("on_unparseable_output",
                       "count_as_failure | coerce_to_fixed | mark_skipped");
  }

  const Json& jg = need("group_variance_filter");
  GroupVarianceFilter variance =
      jg == "off" ? GroupVarianceFilter::Off
                  : (jg == "drop_zero_variance_groups"
                         ? GroupVarianceFilter::DropZeroVarianceGroups
                         : throw TypeMismatch("group_variance_filter",
                                              "off | drop_zero_variance_groups"));

  return FailurePolicy(missing, error, unparseable, variance);
}

Json to_json(const ReportingRuleEntry& entry) {
  Json j = Json::object();
  j["name"] = entry.name;
  j["version"] = entry.version;
  j["config"] = entry.config;
  j["input_view"] = entry.input_view;
  j["output_target"] = entry.output_target;
  j["policy"] = to_json(entry.policy);
  if (entry.drops) j["drops"] = to_json(*entry.drops);
  return j;
}

ReportingRuleEntry rule_entry_from_json(const Json& j) {
  if (!j.contains("name")) throw MissingRequiredColumn("name");
  if (!j.contains("version")) throw MissingRequiredColumn("version");
  if (!j.contains("policy")) throw MissingRequiredColumn("policy");
  ReportingRuleEntry entry{
      j.at("name").get<std::string>(),
      j.at("version").get<std::string>(),
      j.value("config", Json::object()),
      j.value("input_view", ""),
      j.value("output_target", ""),
      failure_policy_from_json(j.at("policy")),
      std::nullopt};
  if (j.contains("drops")) entry.drops = drops_manifest_from_json(j.at("drops"));
  return entry;
}

}  // namespace rollcard
