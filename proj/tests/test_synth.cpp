#include <doctest.h>

#include <filesystem>

#include "rollcard/bundle_io.hpp"
#include "rollcard/errors.hpp"
#include "rollcard/format.hpp"
#include "rollcard/synth.hpp"
#include "rollcard/validator.hpp"

using namespace rollcard;
namespace fs = std::filesystem;

namespace {

fs::path work_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rollcard-synth" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("a minimal profile yields a valid card") {
  FixtureProfile profile;
  profile.seed = 1;
  profile.runs = 1;
  profile.steps_per_run = {1, 1};
  CardBundle card = gen_card(profile);
  fs::path dir = work_dir("minimal");
  write_bundle(card, Carrier::directory(dir));
  ValidationReport report = validate_bundle(Carrier::directory(dir));
  CHECK(report.pass());
}

TEST_CASE("the same seed produces byte-identical bundles") {
  FixtureProfile profile;
  profile.seed = 314159;
  profile.runs = 5;
  profile.steps_per_run = {1, 6};
  profile.worker_count = {1, 3};
  profile.failure_mix = {{"failed", 0.2}, {"errored", 0.2}};
  profile.edge_density = 0.7;
  fs::path a = work_dir("det-a");
  fs::path b = work_dir("det-b");
  write_bundle(gen_card(profile), Carrier::directory(a));
  write_bundle(gen_card(profile), Carrier::directory(b));
  for (const char* file : {"manifest.json", "events.jsonl", "nodes.jsonl",
                           "edges.jsonl", "annotations.jsonl",
                           "mutations.jsonl"}) {
    CHECK(read_file(a / file) == read_file(b / file));
  }
}

TEST_CASE("failure mix allocates exact status counts") {
  FixtureProfile profile;
  profile.seed = 9;
  profile.runs = 100;
  profile.steps_per_run = {1, 2};
  profile.failure_mix = {{"errored", 0.2}};
  CardBundle card = gen_card(profile);
  int errored = 0;
  card.streams.nodes.for_each([&](const NodeRow& node) {
    if (node.level == 0 && node.status == "errored") ++errored;
  });
  CHECK(errored == 20);
}

TEST_CASE("invalid profiles are rejected") {
  FixtureProfile profile;
  profile.runs = -1;
  CHECK_THROWS_AS(gen_card(profile), InvalidProfile);
  profile.runs = 1;
  profile.failure_mix = {{"failed", 0.9}, {"errored", 0.3}};
  CHECK_THROWS_AS(gen_card(profile), InvalidProfile);
  profile.failure_mix.clear();
  profile.edge_density = 1.5;
  CHECK_THROWS_AS(gen_card(profile), InvalidProfile);
}

TEST_CASE("unknown fixtures and defect classes are rejected") {
  CHECK_THROWS_AS(gen_named("no_such_fixture"), UnknownFixture);
  CHECK_THROWS_AS(defect_from_name("no_such_defect"), UnknownDefectClass);
}

TEST_CASE("named fixtures regenerate byte-identically") {
  NamedFixtureOutput first = gen_named("tot_prune_pairs");
  NamedFixtureOutput second = gen_named("tot_prune_pairs");
  fs::path a = work_dir("fixture-a");
  fs::path b = work_dir("fixture-b");
  write_fixture(first, a);
  write_fixture(second, b);
  CHECK(read_file(a / "gold.json") == read_file(b / "gold.json"));
  CHECK(read_file(a / "prune" / "tot-prune-01" / "events.jsonl") ==
        read_file(b / "prune" / "tot-prune-01" / "events.jsonl"));
  CHECK(read_file(a / "no_prune" / "tot-noprune-20" / "manifest.json") ==
        read_file(b / "no_prune" / "tot-noprune-20" / "manifest.json"));
}

TEST_CASE("named fixtures are validator-clean") {
  // Sample cards from each fixture through the full write/validate path.
  for (std::string_view name : kNamedFixtures) {
    NamedFixtureOutput fixture = gen_named(std::string(name));
    const auto& [batch_name, batch] = *fixture.batches.begin();
    (void)batch_name;
    REQUIRE(!batch.empty());
    fs::path dir = work_dir("clean-" + std::string(name));
    write_bundle(batch.front(), Carrier::directory(dir));
    ValidationReport report = validate_bundle(Carrier::directory(dir));
    CAPTURE(name);
    CHECK(report.pass());
  }
}

TEST_CASE("the preservation card is itself validator-clean") {
  CardBundle card = gen_preservation_card();
  fs::path dir = work_dir("omni");
  write_bundle(card, Carrier::directory(dir));
  ValidationReport report = validate_bundle(Carrier::directory(dir));
  CHECK(report.pass());
}

TEST_CASE("fixture gold metadata carries the planted counts") {
  NamedFixtureOutput swe = gen_named("swebench_gap");
  CHECK(swe.gold["system_a"]["resolved"] == 196);
  CHECK(swe.gold["system_b"]["missing"] == 50);
  NamedFixtureOutput mle = gen_named("mlebench_medal");
  CHECK(mle.gold["tiers"]["gold"] == 133);
  NamedFixtureOutput bc = gen_named("browsecomp_judges");
  CHECK(bc.gold["disagreements"] == 274);
  NamedFixtureOutput gap = gen_named("gap_toolsafety");
  CHECK(gap.gold["text_safe_tool_unsafe"] == 1002);
  NamedFixtureOutput tot = gen_named("tot_prune_pairs");
  CHECK(tot.gold["reward_tied_pairs"] == 5);
}

TEST_CASE("identity: writing a fixture card unmutated passes validation") {
  NamedFixtureOutput fixture = gen_named("tot_prune_pairs");
  fs::path dir = work_dir("identity");
  write_bundle(fixture.batches["prune"].front(), Carrier::directory(dir));
  CHECK(validate_bundle(Carrier::directory(dir)).pass());
}

TEST_CASE("an injected hash defect surfaces as HashMismatch on read") {
  FixtureProfile profile;
  profile.seed = 71;
  profile.runs = 2;
  profile.steps_per_run = {1, 2};
  CardBundle card = gen_card(profile);
  fs::path dir = work_dir("hash-read");
  Carrier carrier = inject_defect(card, DefectClass::HashMismatch, 4, dir);
  CHECK_THROWS_AS(read_bundle(carrier), HashMismatch);
}
