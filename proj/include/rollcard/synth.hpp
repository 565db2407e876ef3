#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rollcard/bundle_io.hpp"
#include "rollcard/rules.hpp"

namespace rollcard {

// splitmix64; all fixture randomness flows from one explicitly seeded
// sequence so outputs are byte-stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  double unit() {
    return static_cast<double>(next() >> 11) / 9007199254740992.0;
  }

 private:
  std::uint64_t state_;
};

struct FixtureProfile {
  std::uint64_t seed = 1;
  std::int64_t runs = 1;
  std::pair<int, int> steps_per_run{1, 1};
  std::pair<int, int> worker_count{1, 1};
  // terminal status -> proportion; remainder becomes "succeeded"
  std::map<std::string, double> failure_mix;
  std::vector<std::string> annotation_namespaces;
  double edge_density = 0.0;
};

// Conformant bundle with the requested shape; deterministic in the seed.
CardBundle gen_card(const FixtureProfile& profile);

inline constexpr std::array<std::string_view, 6> kNamedFixtures = {
    "swebench_gap",     "mlebench_medal", "taubench_graders",
    "browsecomp_judges", "gap_toolsafety", "tot_prune_pairs"};

struct NamedFixtureOutput {
  std::string name;
  std::map<std::string, Batch> batches;  // system / batch label -> cards
  Json gold;                             // sidecar metadata
};

// Builds one of the named fixtures and verifies its arithmetic with an
// independent recount over the generated rows before returning.
NamedFixtureOutput gen_named(const std::string& name);

// A single card populating every field the six built-in views and quantities
// touch, used by the operational preservation tests.
CardBundle gen_preservation_card();

enum class DefectClass {
  BadLayout,
  HashMismatch,
  SchemaViolation,
  EventSequence,
  MutationSequence,
  AnnotationSequence,
  ParentLevel,
  BlobDangling,
  EdgeCycle,
  AppendOnly,
};

inline constexpr std::array<std::string_view, 10> kDefectNames = {
    "bad_layout",        "hash_mismatch",     "schema_violation",
    "event_sequence",    "mutation_sequence", "annotation_sequence",
    "parent_level",      "blob_dangling",     "edge_cycle",
    "append_only"};

DefectClass defect_from_name(const std::string& name);
std::string_view defect_name(DefectClass defect);

// Writes the card to out_dir and plants exactly one defect of the named
// class, leaving everything else untouched. Returns the mutated carrier.
Carrier inject_defect(const CardBundle& card, DefectClass defect,
                      std::uint64_t seed, const std::filesystem::path& out_dir);

// Writes a named fixture to disk: one bundle directory per card under
// <out>/<batch>/<run_id>/, plus gold.json.
void write_fixture(const NamedFixtureOutput& fixture,
                   const std::filesystem::path& out);

}  // namespace rollcard
