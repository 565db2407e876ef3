#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "rollcard/bundle.hpp"
#include "rollcard/drops.hpp"
#include "rollcard/jsonio.hpp"

namespace rollcard {

// A row presented to analyses: an ordered column -> value object.
using Record = Json;

// Declarative row filter: a comparison tree over columns and literals.
// Opaque callbacks are deliberately unsupported so every applied filter is a
// replayable record.
class Filter {
 public:
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge, In };

  static Filter always();
  static Filter compare(std::string column, Op op, Json literal);
  static Filter all_of(std::vector<Filter> children);
  static Filter any_of(std::vector<Filter> children);
  static Filter negate(Filter child);

  bool matches(const Record& record) const;
  std::string describe() const;
  Json to_json() const;
  static Filter from_json(const Json& j);

  // Columns the filter inspects.
  void collect_columns(std::set<std::string>& out) const;

 private:
  enum class Kind { True, Compare, All, Any, Not };
  Kind kind_ = Kind::True;
  std::string column_;
  Op op_ = Op::Eq;
  Json literal_;
  std::vector<Filter> children_;
};

// Read-only row access shared by full and stripped cards.
class CardSource {
 public:
  virtual ~CardSource() = default;
  virtual bool has_stream(const std::string& stream) const = 0;
  virtual const std::vector<Record>& records(const std::string& stream) const = 0;
  // Valid columns: schema columns plus extras observed anywhere in the card.
  virtual std::set<std::string> columns(const std::string& stream) const = 0;
  virtual std::set<FieldRef> field_universe() const = 0;
  virtual const ReleaseScope* release_scope() const { return nullptr; }
};

class FullCardSource : public CardSource {
 public:
  explicit FullCardSource(const CardBundle& card);
  bool has_stream(const std::string& stream) const override;
  const std::vector<Record>& records(const std::string& stream) const override;
  std::set<std::string> columns(const std::string& stream) const override;
  std::set<FieldRef> field_universe() const override;
  const ReleaseScope* release_scope() const override { return &scope_; }

 private:
  std::map<std::string, std::vector<Record>> records_;
  std::map<std::string, std::set<std::string>> columns_;
  ReleaseScope scope_;
};

// A card reduced to one footprint: only the streams, rows, and fields a
// recorded analysis read. Used for the operational preservation test and for
// derived-view release.
class StrippedCard : public CardSource {
 public:
  bool has_stream(const std::string& stream) const override;
  const std::vector<Record>& records(const std::string& stream) const override;
  std::set<std::string> columns(const std::string& stream) const override;
  std::set<FieldRef> field_universe() const override;

  std::map<std::string, std::vector<Record>> streams;
};

StrippedCard strip_to_footprint(const CardSource& source,
                                const DropsManifest& drops);

// Logs every read made through it; finish() seals the log into a drops
// manifest whose complement is taken against the card's full field universe.
class TrackedReader {
 public:
  TrackedReader(const CardSource& source, std::string name);

  std::vector<Record> read_rows(const std::string& stream,
                                const std::vector<std::string>& columns,
                                const Filter& filter);
  void declare_loss(SemanticLossClass loss);
  void note_collapse(std::string description);
  DropsManifest finish();

  const AccessLog& log() const { return log_; }

 private:
  const CardSource& source_;
  std::string name_;
  AccessLog log_;
  std::vector<SemanticLossClass> losses_;
  std::vector<std::string> omissions_;
  bool finished_ = false;

 public:
  // Degraded-view notes recorded into the manifest at finish().
  void note_omission(std::string description);
};

TrackedReader open_tracked(const CardSource& source, std::string name);

// Key columns logged on any read so footprints can locate rows.
const std::vector<std::string>& key_columns(const std::string& stream);

// Record conversion used by sources and the validator-independent tooling.
Record to_record(const EventRow& row);
Record to_record(const NodeRow& row);
Record to_record(const EdgeRow& row);
Record to_record(const AnnotationRow& row);
Record to_record(const MutationRow& row);

}  // namespace rollcard
