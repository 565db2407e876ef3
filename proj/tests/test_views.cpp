#include <doctest.h>

#include "rollcard/errors.hpp"
#include "rollcard/synth.hpp"
#include "rollcard/bundle_io.hpp"
#include "rollcard/views.hpp"

using namespace rollcard;

namespace {

// Reference preservation matrix over the six built-in views and six
// quantities: P = preserved, ~ = partial, E = erased.
const std::map<std::string, std::array<char, 6>> kExpectedMatrix = {
    //                         return timing worker tool  proof search
    {"final_score",          {'P', 'E', 'E', 'E', 'E', 'E'}},
    {"token_step_rl",        {'P', '~', 'E', '~', 'E', 'E'}},
    {"per_worker",           {'~', '~', 'P', '~', 'E', 'E'}},
    {"tool_call_safety",     {'E', 'E', '~', 'P', 'E', 'E'}},
    {"proof_search_summary", {'P', '~', 'E', 'E', 'P', '~'}},
    {"search_tree",          {'~', '~', 'E', 'E', 'E', 'P'}},
};

char status_char(Preservation p) {
  switch (p) {
    case Preservation::Preserved: return 'P';
    case Preservation::Partial: return '~';
    case Preservation::Erased: return 'E';
  }
  return '?';
}

}  // namespace

TEST_CASE("final_score over a one-run card yields a one-row table") {
  FixtureProfile profile;
  profile.seed = 5;
  profile.runs = 1;
  profile.steps_per_run = {1, 1};
  CardBundle card = gen_card(profile);
  ViewTable table = project(card, ViewSpec::builtin_view("final_score"));
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].value("terminal_status", "") == "succeeded");
  CHECK(table.rows[0].value("final_score", 0.0) == 1.0);
  CHECK(table.provenance.rule_or_view_name == "final_score");
}

TEST_CASE("preservation statuses match the reference matrix on all 36 cells") {
  CardBundle card = gen_preservation_card();
  FullCardSource source(card);
  for (const auto& [view_name, expected] : kExpectedMatrix) {
    ViewSpec spec = ViewSpec::builtin_view(view_name);
    for (std::size_t q = 0; q < kQuantities.size(); ++q) {
      PreservationStatus status =
          preservation_status(source, spec, std::string(kQuantities[q]));
      CAPTURE(view_name);
      CAPTURE(kQuantities[q]);
      CAPTURE(status.note);
      CHECK(status_char(status.status) == expected[q]);
      if (status.status == Preservation::Partial) {
        CHECK(!status.note.empty());  // partial carries a proxy note
      }
    }
  }
}

TEST_CASE("statuses come from the operational test, not a lookup table") {
  // On a card whose step rewards do NOT sum to the final score, the token
  // view no longer preserves return; the same spec, different card, must
  // yield a different status.
  CardBundle card = gen_preservation_card();
  auto annotations = card.streams.annotations.rows();
  for (AnnotationRow& row : annotations) {
    if (row.ns == "score.final" && row.target_id == "n1-root") {
      row.payload = rawjson::RawValue{R"({"value":0.75})"};
    }
  }
  card.streams.annotations = RowStream<AnnotationRow>(annotations);
  PreservationStatus status = preservation_status(
      card, ViewSpec::builtin_view("token_step_rl"), "return");
  CHECK(status.status == Preservation::Partial);
}

TEST_CASE("every built-in view re-projects identically from its own footprint") {
  CardBundle card = gen_preservation_card();
  FullCardSource source(card);
  for (std::string_view name : kBuiltinViews) {
    ViewSpec spec = ViewSpec::builtin_view(std::string(name));
    ViewTable full = project(source, spec);
    StrippedCard stripped = strip_to_footprint(source, full.provenance);
    ViewTable again = project(stripped, spec);
    CAPTURE(name);
    CHECK(serialize_table(again) == serialize_table(full));
  }
}

TEST_CASE("projection is deterministic") {
  CardBundle card = gen_preservation_card();
  for (std::string_view name : kBuiltinViews) {
    ViewSpec spec = ViewSpec::builtin_view(std::string(name));
    CHECK(serialize_table(project(card, spec)) ==
          serialize_table(project(card, spec)));
  }
}

TEST_CASE("views degrade explicitly when optional source fields are absent") {
  FixtureProfile profile;
  profile.seed = 8;
  profile.runs = 2;
  profile.steps_per_run = {1, 2};
  CardBundle card = gen_card(profile);  // no proof steps, no search steps
  ViewTable proof = project(card, ViewSpec::builtin_view("proof_search_summary"));
  CHECK(proof.rows.size() == 2);  // still one row per episode
  REQUIRE(!proof.provenance.omissions.empty());
  ViewTable search = project(card, ViewSpec::builtin_view("search_tree"));
  CHECK(search.rows.empty());
  CHECK(!search.provenance.omissions.empty());
}

TEST_CASE("tool_call_safety exposes divergence inputs") {
  CardBundle card = gen_preservation_card();
  ViewTable table = project(card, ViewSpec::builtin_view("tool_call_safety"));
  REQUIRE(table.rows.size() == 3);
  // exec-01 is text-safe yet made one forbidden call.
  const Record& row = table.rows[0];
  CHECK(row.value("run_id", "") == "exec-01");
  CHECK(row.value("text_safe", false) == true);
  CHECK(row.value("forbidden_call_count", std::int64_t{0}) == 1);
  CHECK(row.value("tool_call_count", std::int64_t{0}) == 2);
}

TEST_CASE("custom views name their fields or fail loudly") {
  CardBundle card = gen_preservation_card();
  ViewSpec ok = ViewSpec::custom("just-edges", "edges",
                                 {"source_node_id", "target_node_id", "status"},
                                 Filter::always());
  ViewTable table = project(card, ok);
  CHECK(table.rows.size() == 1);

  ViewSpec bad = ViewSpec::custom("broken", "edges", {"no_such_field"},
                                  Filter::always());
  try {
    project(card, bad);
    FAIL("expected MissingSourceField");
  } catch (const MissingSourceField& e) {
    CHECK(std::string(e.what()).find("no_such_field") != std::string::npos);
  }
}

TEST_CASE("unknown quantities are rejected") {
  CardBundle card = gen_preservation_card();
  CHECK_THROWS_AS(preservation_status(
                      card, ViewSpec::builtin_view("final_score"), "vibes"),
                  UnknownQuantity);
}

TEST_CASE("view tables attach drops manifests with collapses and losses") {
  CardBundle card = gen_preservation_card();
  ViewTable table = project(card, ViewSpec::builtin_view("per_worker"));
  bool has_grouping_collapse = false;
  for (const std::string& collapse : table.provenance.footprint.collapses) {
    if (collapse.find("per-worker") != std::string::npos) {
      has_grouping_collapse = true;
    }
  }
  CHECK(has_grouping_collapse);
  CHECK(!table.provenance.declared_losses.empty());
  CHECK(!table.provenance.complement.empty());
}

TEST_CASE("prune pairs: tied rewards, different search shapes") {
  NamedFixtureOutput fixture = gen_named("tot_prune_pairs");
  // Pair 1 is reward-tied by construction.
  const CardBundle& pruned = fixture.batches.at("prune").at(0);
  const CardBundle& unpruned = fixture.batches.at("no_prune").at(0);
  ViewSpec spec = ViewSpec::builtin_view("search_tree");
  Json pruned_shape =
      compute_quantity(FullCardSource(pruned), "search_shape");
  Json unpruned_shape =
      compute_quantity(FullCardSource(unpruned), "search_shape");
  std::int64_t pruned_unique =
      pruned_shape.begin().value()["unique_actions"].get<std::int64_t>();
  std::int64_t unpruned_unique =
      unpruned_shape.begin().value()["unique_actions"].get<std::int64_t>();
  CHECK(pruned_unique == 29);
  CHECK(unpruned_unique == 49);

  // Final rewards tie while the search-tree tables differ.
  ViewTable pt = project(pruned, ViewSpec::builtin_view("final_score"));
  ViewTable ut = project(unpruned, ViewSpec::builtin_view("final_score"));
  CHECK(pt.rows.at(0).at("final_score") == ut.rows.at(0).at("final_score"));
  CHECK(serialize_table(project(pruned, spec)) !=
        serialize_table(project(unpruned, spec)));
}
