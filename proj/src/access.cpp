#include "rollcard/access.hpp"

#include <algorithm>

#include "rollcard/errors.hpp"

namespace rollcard {

namespace {

Json parse_raw(const rawjson::RawValue& raw) {
  Json j = Json::parse(raw.text, nullptr, false);
  if (j.is_discarded()) return nullptr;
  return j;
}

void put_extras(Record& record, const Extras& extras) {
  for (const auto& [key, value] : extras) record[key] = parse_raw(value);
}

}  // namespace

Record to_record(const EventRow& row) {
  Record r = Record::object();
  r["event_id"] = row.event_id;
  r["task_execution_id"] = row.task_execution_id;
  r["worker_binding_key"] = row.worker_binding_key;
  r["sequence"] = row.sequence;
  r["event_type"] = row.event_type;
  if (row.turn_id) r["turn_id"] = *row.turn_id;
  r["payload"] = parse_raw(row.payload);
  if (row.started_at) r["started_at"] = row.started_at->text;
  if (row.completed_at) r["completed_at"] = row.completed_at->text;
  if (row.policy_version) r["policy_version"] = *row.policy_version;
  put_extras(r, row.extras);
  return r;
}

Record to_record(const NodeRow& row) {
  Record r = Record::object();
  r["node_id"] = row.node_id;
  if (row.parent_id) r["parent_id"] = *row.parent_id;
  r["instance_key"] = row.instance_key;
  r["task_key"] = row.task_key;
  r["status"] = row.status;
  if (row.assigned_worker_key) r["assigned_worker_key"] = *row.assigned_worker_key;
  r["level"] = row.level;
  r["created_at"] = row.created_at.text;
  r["updated_at"] = row.updated_at.text;
  put_extras(r, row.extras);
  return r;
}

Record to_record(const EdgeRow& row) {
  Record r = Record::object();
  r["source_node_id"] = row.source_node_id;
  r["target_node_id"] = row.target_node_id;
  r["status"] = row.status;
  r["created_at"] = row.created_at.text;
  r["updated_at"] = row.updated_at.text;
  put_extras(r, row.extras);
  return r;
}

Record to_record(const AnnotationRow& row) {
  Record r = Record::object();
  r["target_type"] = row.target_type;
  r["target_id"] = row.target_id;
  r["namespace"] = row.ns;
  r["sequence"] = row.sequence;
  r["payload"] = parse_raw(row.payload);
  r["created_at"] = row.created_at.text;
  put_extras(r, row.extras);
  return r;
}

Record to_record(const MutationRow& row) {
  Record r = Record::object();
  r["sequence"] = row.sequence;
  r["mutation_type"] = row.mutation_type;
  r["target_type"] = row.target_type;
  r["target_id"] = row.target_id;
  r["actor"] = row.actor;
  r["old_value"] = parse_raw(row.old_value);
  r["new_value"] = parse_raw(row.new_value);
  r["reason"] = row.reason;
  r["created_at"] = row.created_at.text;
  put_extras(r, row.extras);
  return r;
}

// --- Filter ---

Filter Filter::always() { return Filter{}; }

Filter Filter::compare(std::string column, Op op, Json literal) {
  Filter f;
  f.kind_ = Kind::Compare;
  f.column_ = std::move(column);
  f.op_ = op;
  f.literal_ = std::move(literal);
  return f;
}

Filter Filter::all_of(std::vector<Filter> children) {
  Filter f;
  f.kind_ = Kind::All;
  f.children_ = std::move(children);
  return f;
}

Filter Filter::any_of(std::vector<Filter> children) {
  Filter f;
  f.kind_ = Kind::Any;
  f.children_ = std::move(children);
  return f;
}

Filter Filter::negate(Filter child) {
  Filter f;
  f.kind_ = Kind::Not;
  f.children_.push_back(std::move(child));
  return f;
}

namespace {

// Three-way comparison across JSON scalars; nullopt when incomparable.
std::optional<int> compare_values(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    double x = a.get<double>();
    double y = b.get<double>();
    if (x < y) return -1;
    if (x > y) return 1;
    return 0;
  }
  if (a.is_string() && b.is_string()) {
    const auto& x = a.get_ref<const std::string&>();
    const auto& y = b.get_ref<const std::string&>();
    if (x < y) return -1;
    if (x > y) return 1;
    return 0;
  }
  if (a == b) return 0;
  return std::nullopt;
}

}  // namespace

bool Filter::matches(const Record& record) const {
  switch (kind_) {
    case Kind::True:
      return true;
    case Kind::Compare: {
      if (!record.contains(column_)) return false;
      const Json& value = record.at(column_);
      if (op_ == Op::In) {
        if (!literal_.is_array()) return false;
        return std::any_of(literal_.begin(), literal_.end(),
                           [&](const Json& item) { return item == value; });
      }
      auto cmp = compare_values(value, literal_);
      if (!cmp) return op_ == Op::Ne;
      switch (op_) {
        case Op::Eq: return *cmp == 0;
        case Op::Ne: return *cmp != 0;
        case Op::Lt: return *cmp < 0;
        case Op::Le: return *cmp <= 0;
        case Op::Gt: return *cmp > 0;
        case Op::Ge: return *cmp >= 0;
        case Op::In: return false;
      }
      return false;
    }
    case Kind::All:
      return std::all_of(children_.begin(), children_.end(),
                         [&](const Filter& f) { return f.matches(record); });
    case Kind::Any:
      return std::any_of(children_.begin(), children_.end(),
                         [&](const Filter& f) { return f.matches(record); });
    case Kind::Not:
      return !children_.front().matches(record);
  }
  return false;
}

namespace {

const char* op_text(Filter::Op op) {
  switch (op) {
    case Filter::Op::Eq: return "==";
    case Filter::Op::Ne: return "!=";
    case Filter::Op::Lt: return "<";
    case Filter::Op::Le: return "<=";
    case Filter::Op::Gt: return ">";
    case Filter::Op::Ge: return ">=";
    case Filter::Op::In: return "in";
  }
  return "?";
}

Filter::Op op_from_text(const std::string& text) {
  if (text == "==") return Filter::Op::Eq;
  if (text == "!=") return Filter::Op::Ne;
  if (text == "<") return Filter::Op::Lt;
  if (text == "<=") return Filter::Op::Le;
  if (text == ">") return Filter::Op::Gt;
  if (text == ">=") return Filter::Op::Ge;
  if (text == "in") return Filter::Op::In;
  throw MalformedRecord("unknown filter operator: " + text);
}

}  // namespace

std::string Filter::describe() const {
  switch (kind_) {
    case Kind::True:
      return "true";
    case Kind::Compare:
      return column_ + " " + op_text(op_) + " " + literal_.dump();
    case Kind::All:
    case Kind::Any: {
      std::string out = kind_ == Kind::All ? "all(" : "any(";
      for (std::size_t i = 0; i < children_.size(); ++i) {
        if (i) out += ", ";
        out += children_[i].describe();
      }
      return out + ")";
    }
    case Kind::Not:
      return "not(" + children_.front().describe() + ")";
  }
  return "";
}

Json Filter::to_json() const {
  switch (kind_) {
    case Kind::True:
      return Json{{"kind", "true"}};
    case Kind::Compare:
      return Json{{"kind", "compare"},
                  {"column", column_},
                  {"op", op_text(op_)},
                  {"literal", literal_}};
    case Kind::All:
    case Kind::Any:
    case Kind::Not: {
      Json children = Json::array();
      for (const Filter& child : children_) children.push_back(child.to_json());
      const char* kind = kind_ == Kind::All ? "all" : (kind_ == Kind::Any ? "any" : "not");
      return Json{{"kind", kind}, {"children", std::move(children)}};
    }
  }
  return {};
}

Filter Filter::from_json(const Json& j) {
  std::string kind = j.value("kind", "true");
  if (kind == "true") return always();
  if (kind == "compare") {
    return compare(j.at("column").get<std::string>(),
                   op_from_text(j.at("op").get<std::string>()),
                   j.value("literal", Json()));
  }
  std::vector<Filter> children;
  for (const Json& child : j.value("children", Json::array())) {
    children.push_back(from_json(child));
  }
  if (kind == "all") return all_of(std::move(children));
  if (kind == "any") return any_of(std::move(children));
  if (kind == "not" && !children.empty()) return negate(std::move(children.front()));
  throw MalformedRecord("unknown filter kind: " + kind);
}

void Filter::collect_columns(std::set<std::string>& out) const {
  if (kind_ == Kind::Compare) out.insert(column_);
  for (const Filter& child : children_) child.collect_columns(out);
}

// --- sources ---

FullCardSource::FullCardSource(const CardBundle& card) {
  scope_ = card.manifest.release_scope;
  auto build = [this](const std::string& name, const auto& stream) {
    auto& records = records_[name];
    auto& columns = columns_[name];
    StreamKind kind = *stream_from_name(name);
    for (const std::string& column : schema_columns(kind)) columns.insert(column);
    stream.for_each([&](const auto& row) {
      Record r = to_record(row);
      for (const auto& [key, value] : r.items()) {
        (void)value;
        columns.insert(key);
      }
      records.push_back(std::move(r));
    });
  };
  build("events", card.streams.events);
  build("nodes", card.streams.nodes);
  build("edges", card.streams.edges);
  build("annotations", card.streams.annotations);
  build("mutations", card.streams.mutations);
}

bool FullCardSource::has_stream(const std::string& stream) const {
  return records_.contains(stream);
}

const std::vector<Record>& FullCardSource::records(
    const std::string& stream) const {
  auto it = records_.find(stream);
  if (it == records_.end()) throw UnknownStream(stream);
  return it->second;
}

std::set<std::string> FullCardSource::columns(const std::string& stream) const {
  auto it = columns_.find(stream);
  if (it == columns_.end()) throw UnknownStream(stream);
  return it->second;
}

std::set<FieldRef> FullCardSource::field_universe() const {
  std::set<FieldRef> universe;
  for (const auto& [stream, columns] : columns_) {
    for (const std::string& column : columns) universe.emplace(stream, column);
  }
  return universe;
}

bool StrippedCard::has_stream(const std::string& stream) const {
  return streams.contains(stream);
}

const std::vector<Record>& StrippedCard::records(const std::string& stream) const {
  auto it = streams.find(stream);
  if (it == streams.end()) throw UnknownStream(stream);
  return it->second;
}

std::set<std::string> StrippedCard::columns(const std::string& stream) const {
  auto it = streams.find(stream);
  if (it == streams.end()) throw UnknownStream(stream);
  std::set<std::string> out;
  for (const Record& record : it->second) {
    for (const auto& [key, value] : record.items()) {
      (void)value;
      out.insert(key);
    }
  }
  return out;
}

std::set<FieldRef> StrippedCard::field_universe() const {
  std::set<FieldRef> universe;
  for (const auto& [stream, records] : streams) {
    for (const Record& record : records) {
      for (const auto& [key, value] : record.items()) {
        (void)value;
        universe.emplace(stream, key);
      }
    }
  }
  return universe;
}

StrippedCard strip_to_footprint(const CardSource& source,
                                const DropsManifest& drops) {
  StrippedCard stripped;
  for (const std::string& stream : drops.footprint.streams_opened) {
    if (!source.has_stream(stream)) continue;
    // Columns to keep: everything the footprint read from this stream.
    std::set<std::string> keep;
    for (const auto& [s, column] : drops.footprint.fields_read) {
      if (s == stream) keep.insert(column);
    }
    // Rows to keep: the union of the recorded, replayable filters.
    std::vector<Filter> filters;
    for (const FilterRecord& record : drops.footprint.filters_applied) {
      if (record.stream == stream) filters.push_back(Filter::from_json(record.spec));
    }
    std::vector<Record> rows;
    for (const Record& record : source.records(stream)) {
      bool wanted = std::any_of(filters.begin(), filters.end(),
                                [&](const Filter& f) { return f.matches(record); });
      if (!wanted) continue;
      Record reduced = Record::object();
      for (const auto& [key, value] : record.items()) {
        if (keep.contains(key)) reduced[key] = value;
      }
      rows.push_back(std::move(reduced));
    }
    stripped.streams[stream] = std::move(rows);
  }
  return stripped;
}

// --- TrackedReader ---

const std::vector<std::string>& key_columns(const std::string& stream) {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"events", {"event_id", "task_execution_id", "sequence"}},
      {"nodes", {"node_id"}},
      {"edges", {"source_node_id", "target_node_id"}},
      {"annotations", {"target_type", "target_id", "namespace", "sequence"}},
      {"mutations", {"sequence"}},
  };
  auto it = keys.find(stream);
  if (it == keys.end()) throw UnknownStream(stream);
  return it->second;
}

TrackedReader::TrackedReader(const CardSource& source, std::string name)
    : source_(source), name_(std::move(name)) {}

TrackedReader open_tracked(const CardSource& source, std::string name) {
  return TrackedReader(source, std::move(name));
}

std::vector<Record> TrackedReader::read_rows(
    const std::string& stream, const std::vector<std::string>& columns,
    const Filter& filter) {
  if (finished_) throw AlreadyFinished();
  if (!source_.has_stream(stream)) throw UnknownStream(stream);
  std::set<std::string> known = source_.columns(stream);
  for (const std::string& column : columns) {
    if (!known.contains(column)) throw UnknownColumn(stream, column);
  }

  log_.streams_opened.insert(stream);
  for (const std::string& column : columns) log_.fields_read.emplace(stream, column);
  std::set<std::string> filter_columns;
  filter.collect_columns(filter_columns);
  for (const std::string& column : filter_columns) {
    if (known.contains(column)) log_.fields_read.emplace(stream, column);
  }
  for (const std::string& column : key_columns(stream)) {
    if (known.contains(column)) log_.fields_read.emplace(stream, column);
  }

  std::vector<Record> out;
  std::int64_t total = 0;
  for (const Record& record : source_.records(stream)) {
    ++total;
    if (!filter.matches(record)) continue;
    Record reduced = Record::object();
    for (const std::string& column : columns) {
      if (record.contains(column)) reduced[column] = record.at(column);
    }
    out.push_back(std::move(reduced));
  }

  std::string description = filter.describe();
  log_.filters_applied.push_back(FilterRecord{
      stream, description, static_cast<std::int64_t>(out.size()), total,
      filter.to_json()});
  RowAccess& access = log_.rows_read[stream];
  access.count += static_cast<std::int64_t>(out.size());
  access.selectors.push_back(description);
  return out;
}

void TrackedReader::declare_loss(SemanticLossClass loss) {
  if (finished_) throw AlreadyFinished();
  if (loss.name.empty()) {
    throw InvariantViolation("semantic loss class needs a name");
  }
  if (std::find(losses_.begin(), losses_.end(), loss) == losses_.end()) {
    losses_.push_back(std::move(loss));
  }
}

void TrackedReader::note_collapse(std::string description) {
  if (finished_) throw AlreadyFinished();
  log_.collapses.push_back(std::move(description));
}

void TrackedReader::note_omission(std::string description) {
  if (finished_) throw AlreadyFinished();
  omissions_.push_back(std::move(description));
}

DropsManifest TrackedReader::finish() {
  if (finished_) throw AlreadyFinished();
  finished_ = true;
  DropsManifest manifest;
  manifest.rule_or_view_name = name_;
  manifest.footprint = log_;
  manifest.declared_losses = losses_;
  manifest.omissions = omissions_;
  std::set<FieldRef> universe = source_.field_universe();
  for (const FieldRef& field : universe) {
    if (!log_.fields_read.contains(field)) manifest.complement.insert(field);
  }
  if (const ReleaseScope* scope = source_.release_scope()) {
    manifest.release_note = *scope;
  }
  return manifest;
}

}  // namespace rollcard
