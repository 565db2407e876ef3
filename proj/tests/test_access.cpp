#include <doctest.h>

#include "rollcard/access.hpp"
#include "rollcard/errors.hpp"
#include "rollcard/synth.hpp"

using namespace rollcard;

namespace {

CardBundle ten_row_card() {
  // Hand-built 10-event card: 3 tool_call events among 10.
  FixtureProfile profile;
  profile.seed = 77;
  profile.runs = 1;
  profile.steps_per_run = {1, 1};
  CardBundle card = gen_card(profile);

  std::vector<EventRow> events;
  for (int i = 0; i < 10; ++i) {
    EventRow row;
    row.event_id = "e" + std::to_string(i);
    row.task_execution_id = "exec-0000";
    row.worker_binding_key = "w";
    row.sequence = i;
    row.event_type = (i % 3 == 0) ? "tool_call" : "message";
    row.payload = rawjson::RawValue{i % 3 == 0 ? R"({"name":"t"})"
                                               : R"({"text":"m"})"};
    events.push_back(std::move(row));
  }
  // 10 rows, tool_call at 0,3,6,9 -> adjust to exactly 3 matches
  events[9].event_type = "message";
  events[9].payload = rawjson::RawValue{R"({"text":"m"})"};
  card.streams.events = RowStream<EventRow>(events);
  return card;
}

}  // namespace

TEST_CASE("reading nothing leaves an empty footprint, complement is everything") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);
  TrackedReader reader = open_tracked(source, "idle");
  DropsManifest drops = reader.finish();
  CHECK(drops.footprint.streams_opened.empty());
  CHECK(drops.footprint.fields_read.empty());
  CHECK(drops.complement == source.field_universe());
}

TEST_CASE("reading one column logs it plus the key columns") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);
  TrackedReader reader = open_tracked(source, "payload-only");
  reader.read_rows("events", {"payload"}, Filter::always());
  DropsManifest drops = reader.finish();
  CHECK(drops.footprint.fields_read.contains({"events", "payload"}));
  CHECK(drops.footprint.fields_read.contains({"events", "event_id"}));
  CHECK(drops.footprint.fields_read.contains({"events", "task_execution_id"}));
  CHECK(drops.footprint.fields_read.contains({"events", "sequence"}));
  // Nothing else from events.
  for (const auto& [stream, column] : drops.footprint.fields_read) {
    CHECK(stream == "events");
    CHECK((column == "payload" || column == "event_id" ||
           column == "task_execution_id" || column == "sequence"));
  }
}

TEST_CASE("two readers on one card keep independent logs") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);
  TrackedReader nodes_reader = open_tracked(source, "nodes-side");
  TrackedReader edges_reader = open_tracked(source, "edges-side");
  nodes_reader.read_rows("nodes", {"status"}, Filter::always());
  edges_reader.read_rows("edges", {"status"}, Filter::always());
  DropsManifest nodes_drops = nodes_reader.finish();
  DropsManifest edges_drops = edges_reader.finish();
  CHECK(nodes_drops.footprint.streams_opened ==
        std::set<std::string>{"nodes"});
  CHECK(edges_drops.footprint.streams_opened ==
        std::set<std::string>{"edges"});
}

TEST_CASE("filters log their description and matched/total counts") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);
  TrackedReader reader = open_tracked(source, "filtered");
  auto rows = reader.read_rows(
      "events", {"sequence"},
      Filter::compare("event_type", Filter::Op::Eq, "tool_call"));
  CHECK(rows.size() == 3);
  for (const Record& row : rows) {
    CHECK(row.size() == 1);  // only the requested column
    CHECK(row.contains("sequence"));
  }
  DropsManifest drops = reader.finish();
  REQUIRE(drops.footprint.filters_applied.size() == 1);
  const FilterRecord& record = drops.footprint.filters_applied[0];
  CHECK(record.matched == 3);
  CHECK(record.total == 10);
  CHECK(record.description == "event_type == \"tool_call\"");
}

TEST_CASE("unknown streams and columns are rejected") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);
  TrackedReader reader = open_tracked(source, "bad");
  CHECK_THROWS_AS(reader.read_rows("scores", {"x"}, Filter::always()),
                  UnknownStream);
  CHECK_THROWS_AS(reader.read_rows("events", {"no_such_column"}, Filter::always()),
                  UnknownColumn);
}

TEST_CASE("loss declarations are idempotent and open-vocabulary") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);
  TrackedReader reader = open_tracked(source, "losses");
  reader.declare_loss({kDurationErasure, ""});
  reader.declare_loss({kDurationErasure, ""});
  reader.declare_loss({"negotiation_structure_erasure", "custom"});
  DropsManifest drops = reader.finish();
  REQUIRE(drops.declared_losses.size() == 2);
  CHECK(drops.declared_losses[0].name == kDurationErasure);
  CHECK(drops.declared_losses[1].name == "negotiation_structure_erasure");
}

TEST_CASE("finish twice raises AlreadyFinished") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);
  TrackedReader reader = open_tracked(source, "twice");
  reader.finish();
  CHECK_THROWS_AS(reader.finish(), AlreadyFinished);
}

TEST_CASE("footprint and complement partition the field universe exactly") {
  CardBundle card = gen_card([] {
    FixtureProfile p;
    p.seed = 99;
    p.runs = 3;
    p.steps_per_run = {2, 3};
    p.annotation_namespaces = {"custom.beta"};
    return p;
  }());
  FullCardSource source(card);
  TrackedReader reader = open_tracked(source, "partition");
  reader.read_rows("events", {"payload", "event_type"}, Filter::always());
  reader.read_rows("annotations", {"namespace", "payload"}, Filter::always());
  DropsManifest drops = reader.finish();

  std::set<FieldRef> universe = source.field_universe();
  std::set<FieldRef> joined = drops.complement;
  for (const FieldRef& field : drops.footprint.fields_read) {
    CHECK(!drops.complement.contains(field));  // no overlap
    joined.insert(field);
  }
  CHECK(joined == universe);  // no gap
}

TEST_CASE("the field universe includes observed extras columns") {
  CardBundle card = ten_row_card();
  auto events = card.streams.events.rows();
  events[0].extras.emplace_back("x_side_channel",
                                rawjson::RawValue{"\"hi\""});
  card.streams.events = RowStream<EventRow>(events);
  FullCardSource source(card);
  CHECK(source.field_universe().contains({"events", "x_side_channel"}));
  // And it is readable like any column.
  TrackedReader reader = open_tracked(source, "extras");
  auto rows = reader.read_rows("events", {"x_side_channel"}, Filter::always());
  CHECK(rows[0].value("x_side_channel", "") == "hi");
}

TEST_CASE("a stripped card reproduces the tracked analysis bit-exactly") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);

  auto analysis = [](const CardSource& src) {
    TrackedReader reader = open_tracked(src, "toolcall-count");
    auto rows = reader.read_rows(
        "events", {"sequence", "payload"},
        Filter::compare("event_type", Filter::Op::Eq, "tool_call"));
    Json out = Json::array();
    for (const Record& row : rows) out.push_back(row);
    return std::make_pair(out.dump(), reader.finish());
  };

  auto [full_output, drops] = analysis(source);
  StrippedCard stripped = strip_to_footprint(source, drops);
  auto [stripped_output, stripped_drops] = analysis(stripped);
  (void)stripped_drops;
  CHECK(full_output == stripped_output);
}

TEST_CASE("tracking is observation-only") {
  CardBundle card = ten_row_card();
  FullCardSource source(card);
  Filter filter = Filter::compare("event_type", Filter::Op::Eq, "message");
  // Direct filtering over records vs tracked read.
  std::vector<Record> direct;
  for (const Record& record : source.records("events")) {
    if (filter.matches(record)) {
      Record reduced = Record::object();
      reduced["event_id"] = record.at("event_id");
      direct.push_back(reduced);
    }
  }
  TrackedReader reader = open_tracked(source, "observer");
  auto tracked = reader.read_rows("events", {"event_id"}, filter);
  CHECK(tracked == direct);
}

TEST_CASE("filters serialize and replay") {
  Filter f = Filter::all_of(
      {Filter::compare("sequence", Filter::Op::Ge, 2),
       Filter::negate(Filter::compare("event_type", Filter::Op::Eq, "message"))});
  Filter back = Filter::from_json(f.to_json());
  CHECK(back.describe() == f.describe());
  Record row = Record::object();
  row["sequence"] = 5;
  row["event_type"] = "tool_call";
  CHECK(f.matches(row));
  CHECK(back.matches(row));
  row["event_type"] = "message";
  CHECK(!back.matches(row));
}
