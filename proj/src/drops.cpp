#include "rollcard/drops.hpp"

#include <algorithm>

#include "rollcard/errors.hpp"

namespace rollcard {

Json to_json(const ReleaseScope& scope) {
  Json j = Json::object();
  j["kind"] = scope.kind;
  Json omitted = Json::array();
  for (const auto& [selector, reason] : scope.omitted) {
    omitted.push_back(Json{{"selector", selector}, {"reason", reason}});
  }
  j["omitted"] = std::move(omitted);
  j["license_note"] = scope.license_note;
  j["redistribution_limit"] = scope.redistribution_limit;
  return j;
}

ReleaseScope release_scope_from_json(const Json& j) {
  ReleaseScope scope;
  scope.kind = j.value("kind", "full_trace");
  if (std::find(kReleaseScopeKinds.begin(), kReleaseScopeKinds.end(),
                scope.kind) == kReleaseScopeKinds.end()) {
    throw TypeMismatch("release_scope.kind",
                       "full_trace | redacted_trace | gated_trace | "
                       "derived_view | metadata_only");
  }
  if (j.contains("omitted")) {
    for (const auto& item : j.at("omitted")) {
      scope.omitted.emplace_back(item.value("selector", ""),
                                 item.value("reason", ""));
    }
  }
  scope.license_note = j.value("license_note", "");
  scope.redistribution_limit = j.value("redistribution_limit", "");
  return scope;
}

Json to_json(const DropsManifest& manifest) {
  Json j = Json::object();
  j["rule_or_view_name"] = manifest.rule_or_view_name;

  Json footprint = Json::object();
  footprint["streams_opened"] = manifest.footprint.streams_opened;
  Json fields = Json::array();
  for (const auto& [stream, column] : manifest.footprint.fields_read) {
    fields.push_back(Json::array({stream, column}));
  }
  footprint["fields_read"] = std::move(fields);
  Json rows = Json::object();
  for (const auto& [stream, access] : manifest.footprint.rows_read) {
    rows[stream] =
        Json{{"count", access.count}, {"selectors", access.selectors}};
  }
  footprint["rows_read"] = std::move(rows);
  Json filters = Json::array();
  for (const auto& f : manifest.footprint.filters_applied) {
    filters.push_back(Json{{"stream", f.stream},
                           {"description", f.description},
                           {"matched", f.matched},
                           {"total", f.total},
                           {"spec", f.spec}});
  }
  footprint["filters_applied"] = std::move(filters);
  footprint["collapses"] = manifest.footprint.collapses;
  j["footprint"] = std::move(footprint);

  Json losses = Json::array();
  for (const auto& loss : manifest.declared_losses) {
    losses.push_back(Json{{"name", loss.name}, {"note", loss.note}});
  }
  j["declared_losses"] = std::move(losses);

  Json complement = Json::array();
  for (const auto& [stream, column] : manifest.complement) {
    complement.push_back(Json::array({stream, column}));
  }
  j["complement"] = std::move(complement);
  j["omissions"] = manifest.omissions;
  if (manifest.release_note) {
    j["release_note"] = to_json(*manifest.release_note);
  }
  return j;
}

DropsManifest drops_manifest_from_json(const Json& j) {
  DropsManifest m;
  m.rule_or_view_name = j.value("rule_or_view_name", "");
  if (j.contains("footprint")) {
    const Json& fp = j.at("footprint");
    for (const auto& s : fp.value("streams_opened", Json::array())) {
      m.footprint.streams_opened.insert(s.get<std::string>());
    }
    for (const auto& f : fp.value("fields_read", Json::array())) {
      m.footprint.fields_read.emplace(f.at(0).get<std::string>(),
                                      f.at(1).get<std::string>());
    }
    if (fp.contains("rows_read")) {
      for (const auto& [stream, access] : fp.at("rows_read").items()) {
        RowAccess ra;
        ra.count = access.value("count", 0);
        for (const auto& sel : access.value("selectors", Json::array())) {
          ra.selectors.push_back(sel.get<std::string>());
        }
        m.footprint.rows_read[stream] = std::move(ra);
      }
    }
    for (const auto& f : fp.value("filters_applied", Json::array())) {
      FilterRecord rec;
      rec.stream = f.value("stream", "");
      rec.description = f.value("description", "");
      rec.matched = f.value("matched", 0);
      rec.total = f.value("total", 0);
      rec.spec = f.value("spec", Json());
      m.footprint.filters_applied.push_back(std::move(rec));
    }
    for (const auto& c : fp.value("collapses", Json::array())) {
      m.footprint.collapses.push_back(c.get<std::string>());
    }
  }
  for (const auto& loss : j.value("declared_losses", Json::array())) {
    m.declared_losses.push_back(
        SemanticLossClass{loss.value("name", ""), loss.value("note", "")});
  }
  for (const auto& c : j.value("complement", Json::array())) {
    m.complement.emplace(c.at(0).get<std::string>(),
                         c.at(1).get<std::string>());
  }
  for (const auto& o : j.value("omissions", Json::array())) {
    m.omissions.push_back(o.get<std::string>());
  }
  if (j.contains("release_note")) {
    m.release_note = release_scope_from_json(j.at("release_note"));
  }
  return m;
}

}  // namespace rollcard
