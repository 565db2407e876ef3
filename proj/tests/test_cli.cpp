#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include "rollcard/bundle_io.hpp"

#ifndef ROLLCARD_BIN
#error "ROLLCARD_BIN must point at the CLI binary"
#endif

using namespace rollcard;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  std::string command = env + " " + std::string(ROLLCARD_BIN) + " " + args +
                        " 2>/tmp/rollcard-cli-stderr";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buffer;
  std::size_t n;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), n);
  }
  result.exit_code = WEXITSTATUS(pclose(pipe));
  return result;
}

fs::path work_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rollcard-cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

}  // namespace

TEST_CASE("gen + validate round: clean card exits 0 and says pass") {
  fs::path card = work_dir("card");
  RunResult gen = run_cli("gen --seed 4 --runs 2 --steps 1:2 --out " +
                          card.string());
  CHECK(gen.exit_code == 0);
  RunResult validate = run_cli("validate " + card.string());
  CHECK(validate.exit_code == 0);
  CHECK(validate.output.find("pass, 0 violations") != std::string::npos);
}

TEST_CASE("validate exits 2 on conformance failure and 1 on io failure") {
  fs::path card = work_dir("broken");
  run_cli("gen --seed 5 --runs 1 --out " + card.string());
  // Break a stream after the manifest was written.
  std::string events = read_file(card / "events.jsonl");
  write_file(card / "events.jsonl", events + "\n");
  RunResult broken = run_cli("validate " + card.string());
  CHECK(broken.exit_code == 2);
  CHECK(broken.output.find("HASH_MISMATCH") != std::string::npos);

  RunResult missing = run_cli("validate /no/such/path");
  CHECK(missing.exit_code == 1);
}

TEST_CASE("usage errors exit 64") {
  CHECK(run_cli("frobnicate").exit_code == 64);
  CHECK(run_cli("score").exit_code == 64);  // missing required --rule
  CHECK(run_cli("score --rule nonsense").exit_code == 64);
}

TEST_CASE("score never prints a headline without failure accounting") {
  RunResult score = run_cli(
      "score --fixture swebench_gap --batch system_b --rule "
      "mean@1:missing=fail");
  CHECK(score.exit_code == 0);
  for (const char* field :
       {"mean_score=", "attempted=", "scored=", "failed=", "errored=",
        "skipped=", "excluded="}) {
    CHECK(score.output.find(field) != std::string::npos);
  }
  CHECK(score.output.find("failed=50") != std::string::npos);
}

TEST_CASE("machine-readable output is byte-stable and a single document") {
  std::string args =
      "--format json score --fixture mlebench_medal --rule "
      "threshold@1:passing=gold";
  RunResult first = run_cli(args);
  RunResult second = run_cli(args);
  CHECK(first.exit_code == 0);
  CHECK(first.output == second.output);
  Json parsed = Json::parse(first.output, nullptr, false);
  REQUIRE(!parsed.is_discarded());
  CHECK(parsed["headline"] == 0.133);
  CHECK(parsed["accounting"]["attempted"] == 1000);
}

TEST_CASE("the environment variable selects machine output") {
  fs::path card = work_dir("envfmt");
  run_cli("gen --seed 6 --runs 1 --out " + card.string());
  RunResult json = run_cli("validate " + card.string(), "ROLLCARD_FORMAT=json");
  Json parsed = Json::parse(json.output, nullptr, false);
  REQUIRE(!parsed.is_discarded());
  CHECK(parsed["verdict"] == "pass");
}

TEST_CASE("compare on the swebench fixture prints the decomposition") {
  RunResult cmp = run_cli(
      "compare --fixture swebench_gap --rule mean@1:missing=fail --rule "
      "mean@1:missing=exclude");
  CHECK(cmp.exit_code == 0);
  CHECK(cmp.output.find("15.6pp") != std::string::npos);
  CHECK(cmp.output.find("13.3pp") != std::string::npos);
  CHECK(cmp.output.find("convention 2.3pp") != std::string::npos);
  for (const char* column : {"attempted", "failed", "excluded"}) {
    CHECK(cmp.output.find(column) != std::string::npos);
  }
}

TEST_CASE("project writes the table and its sidecar drops manifest") {
  fs::path card = work_dir("proj");
  fs::path out = work_dir("proj-out");
  run_cli("gen --seed 7 --runs 2 --out " + card.string());
  RunResult proj = run_cli("project " + card.string() +
                           " --view final_score --out " + out.string());
  CHECK(proj.exit_code == 0);
  CHECK(fs::exists(out / "final_score.table.jsonl"));
  CHECK(fs::exists(out / "final_score.drops.json"));
  Json drops = Json::parse(read_file(out / "final_score.drops.json"));
  CHECK(drops["rule_or_view_name"] == "final_score");
  CHECK(drops.contains("complement"));
}

TEST_CASE("pack, unpack, and inspect work over both carriers") {
  fs::path card = work_dir("carriers");
  fs::path zip = work_dir("carriers-zip").string() + ".zip";
  fs::path back = work_dir("carriers-back");
  run_cli("gen --seed 8 --runs 1 --out " + card.string());
  CHECK(run_cli("pack " + card.string() + " " + zip.string()).exit_code == 0);
  CHECK(run_cli("validate " + zip.string()).exit_code == 0);
  CHECK(run_cli("unpack " + zip.string() + " " + back.string()).exit_code == 0);
  RunResult inspect = run_cli("inspect " + back.string());
  CHECK(inspect.exit_code == 0);
  CHECK(inspect.output.find("run_id: synth-8") != std::string::npos);
}

TEST_CASE("gen writes named fixtures with gold sidecars") {
  fs::path out = work_dir("fixture-out");
  RunResult gen = run_cli("gen --fixture tot_prune_pairs --out " + out.string());
  CHECK(gen.exit_code == 0);
  CHECK(fs::exists(out / "gold.json"));
  CHECK(fs::exists(out / "prune" / "tot-prune-01" / "manifest.json"));
  RunResult validate =
      run_cli("validate " + (out / "no_prune" / "tot-noprune-01").string());
  CHECK(validate.exit_code == 0);
}

TEST_CASE("schema subcommand emits the row-schema document") {
  RunResult schema = run_cli("schema");
  CHECK(schema.exit_code == 0);
  Json parsed = Json::parse(schema.output, nullptr, false);
  REQUIRE(!parsed.is_discarded());
  CHECK(parsed["$defs"].size() == 6);
}

TEST_CASE("score works over a batch directory written to disk") {
  fs::path out = work_dir("disk-batch");
  run_cli("gen --fixture swebench_gap --out " + out.string());
  RunResult score = run_cli("score " + (out / "system_b").string() +
                            " --rule mean@1:missing=exclude");
  CHECK(score.exit_code == 0);
  CHECK(score.output.find("attempted=500") != std::string::npos);
  CHECK(score.output.find("excluded=50") != std::string::npos);
}

TEST_CASE("bad fixture and view names are usage errors") {
  CHECK(run_cli("gen --fixture bogus --out /tmp/rollcard-cli/x").exit_code == 64);
  fs::path card = work_dir("badview");
  run_cli("gen --seed 9 --runs 1 --out " + card.string());
  CHECK(run_cli("project " + card.string() + " --view bogus").exit_code == 64);
}
