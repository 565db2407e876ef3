#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rollcard/bundle_io.hpp"
#include "rollcard/errors.hpp"
#include "rollcard/sha256.hpp"
#include "rollcard/zipfile.hpp"

using namespace rollcard;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rollcard-io" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CardBundle tiny_card() {
  CardBundle card;
  card.manifest.run_id = "run-io-1";
  card.manifest.created_at = Timestamp{"2026-01-01T00:00:00.000Z"};

  Timestamp t0{"2026-01-01T00:00:01.000Z"};
  Timestamp t1{"2026-01-01T00:00:02.000Z"};

  NodeRow root;
  root.node_id = "n-1";
  root.instance_key = "exec-1";
  root.task_key = "task-1";
  root.status = "succeeded";
  root.level = 0;
  root.created_at = t0;
  root.updated_at = t1;

  EventRow ev;
  ev.event_id = "e-1";
  ev.task_execution_id = "exec-1";
  ev.worker_binding_key = "w-1";
  ev.sequence = 0;
  ev.event_type = "message";
  ev.payload = rawjson::RawValue{R"({"text":"hello"})"};
  ev.started_at = t0;
  ev.completed_at = t1;

  AnnotationRow ann;
  ann.target_type = "node";
  ann.target_id = "n-1";
  ann.ns = "score.final";
  ann.sequence = 0;
  ann.payload = rawjson::RawValue{R"({"value":1.0})"};
  ann.created_at = t1;

  MutationRow mut;
  mut.sequence = 0;
  mut.mutation_type = "node_status";
  mut.target_type = "node";
  mut.target_id = "n-1";
  mut.actor = "scheduler";
  mut.old_value = rawjson::RawValue{R"({"status":"running"})"};
  mut.new_value = rawjson::RawValue{R"({"status":"succeeded"})"};
  mut.reason = "finished";
  mut.created_at = t1;

  card.streams.nodes = RowStream<NodeRow>({root});
  card.streams.events = RowStream<EventRow>({ev});
  card.streams.annotations = RowStream<AnnotationRow>({ann});
  card.streams.mutations = RowStream<MutationRow>({mut});
  return card;
}

std::string slurp(const fs::path& p) { return read_file(p); }

}  // namespace

TEST_CASE("empty run writes five empty streams hashed as the empty string") {
  CardBundle card;
  card.manifest.run_id = "empty";
  card.manifest.created_at = Timestamp{"2026-01-01T00:00:00.000Z"};
  fs::path dir = fresh_dir("empty");
  Manifest written = write_bundle(card, Carrier::directory(dir));
  const std::string empty_hash = sha256_hex("");
  CHECK(written.stream_hashes.size() == 5);
  for (const auto& [stream, hash] : written.stream_hashes) {
    CHECK(hash == empty_hash);
    CHECK(slurp(dir / (stream + ".jsonl")).empty());
  }
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("write then read returns an equal card value") {
  CardBundle card = tiny_card();
  fs::path dir = fresh_dir("roundtrip");
  write_bundle(card, Carrier::directory(dir));
  CardBundle back = read_bundle(Carrier::directory(dir));
  CHECK(back.streams == card.streams);
  CHECK(back.manifest.run_id == card.manifest.run_id);
  CHECK(back.blobs == card.blobs);
}

TEST_CASE("write - read - write produces byte-identical carriers") {
  CardBundle card = tiny_card();
  fs::path first = fresh_dir("det1");
  fs::path second = fresh_dir("det2");
  write_bundle(card, Carrier::directory(first));
  CardBundle back = read_bundle(Carrier::directory(first));
  write_bundle(back, Carrier::directory(second));
  for (const char* file : {"manifest.json", "events.jsonl", "nodes.jsonl",
                           "edges.jsonl", "annotations.jsonl",
                           "mutations.jsonl"}) {
    CHECK(slurp(first / file) == slurp(second / file));
  }
}

TEST_CASE("identical cards produce bit-identical zip archives") {
  CardBundle card = tiny_card();
  fs::path dir = fresh_dir("zipdet");
  write_bundle(card, Carrier::zip(dir / "a.zip"));
  write_bundle(card, Carrier::zip(dir / "b.zip"));
  CHECK(slurp(dir / "a.zip") == slurp(dir / "b.zip"));

  CardBundle back = read_bundle(Carrier::zip(dir / "a.zip"));
  CHECK(back.streams == card.streams);
}

TEST_CASE("appending to a stream after the manifest is detected") {
  CardBundle card = tiny_card();
  fs::path dir = fresh_dir("tamper");
  write_bundle(card, Carrier::directory(dir));
  {
    std::ofstream f(dir / "events.jsonl", std::ios::app);
    f << R"({"event_id":"late","task_execution_id":"exec-1","worker_binding_key":"w-1","sequence":9,"event_type":"m","payload":{}})"
      << "\n";
  }
  try {
    read_bundle(Carrier::directory(dir));
    FAIL("expected HashMismatch");
  } catch (const HashMismatch& e) {
    CHECK(e.stream() == "events");
  }
  // Explicit opt-out skips verification.
  ReadOptions opts;
  opts.verify_hashes = false;
  CHECK_NOTHROW(read_bundle(Carrier::directory(dir), opts));
}

TEST_CASE("major version 2 is refused by a major-1 toolkit") {
  CardBundle card = tiny_card();
  fs::path dir = fresh_dir("version");
  write_bundle(card, Carrier::directory(dir));
  std::string manifest = slurp(dir / "manifest.json");
  auto at = manifest.find("[1, 0]");
  REQUIRE(at != std::string::npos);
  manifest.replace(at, 6, "[2, 0]");
  write_file(dir / "manifest.json", manifest);
  CHECK_THROWS_AS(read_bundle(Carrier::directory(dir)),
                  UnsupportedMajorVersion);
}

TEST_CASE("minor version ahead of ours is tolerated") {
  CardBundle card = tiny_card();
  card.manifest.minor = 7;
  fs::path dir = fresh_dir("minor");
  write_bundle(card, Carrier::directory(dir));
  CardBundle back = read_bundle(Carrier::directory(dir));
  CHECK(back.manifest.minor == 7);
}

TEST_CASE("missing stream file raises MissingStream") {
  CardBundle card = tiny_card();
  fs::path dir = fresh_dir("missing");
  write_bundle(card, Carrier::directory(dir));
  fs::remove(dir / "nodes.jsonl");
  CHECK_THROWS_AS(read_bundle(Carrier::directory(dir)), MissingStream);
}

TEST_CASE("oversized inline payloads are rejected or converted to blobs") {
  CardBundle card = tiny_card();
  std::string big(100 * 1024, 'x');
  EventRow ev;
  ev.event_id = "e-big";
  ev.task_execution_id = "exec-1";
  ev.worker_binding_key = "w-1";
  ev.sequence = 1;
  ev.event_type = "tool_result";
  ev.payload = rawjson::RawValue{std::string(R"({"output":")") + big + "\"}"};
  auto rows = card.streams.events.rows();
  rows.push_back(ev);
  card.streams.events = RowStream<EventRow>(rows);

  fs::path dir = fresh_dir("oversize");
  CHECK_THROWS_AS(write_bundle(card, Carrier::directory(dir)),
                  OversizedInlinePayload);

  WriteOptions opts;
  opts.convert_oversized_payloads = true;
  Manifest written = write_bundle(card, Carrier::directory(dir), opts);
  REQUIRE(written.blob_index.size() == 1);

  CardBundle back = read_bundle(Carrier::directory(dir));
  const EventRow& stored = back.streams.events.rows().at(1);
  auto refs = find_blob_refs(stored.payload);
  REQUIRE(refs.size() == 1);
  CHECK(refs[0].byte_length > kInlinePayloadCap);
  CHECK(back.blobs.at(refs[0].digest).find(big) != std::string::npos);
}

TEST_CASE("lazy and eager reads yield identical row sequences") {
  CardBundle card = tiny_card();
  fs::path dir = fresh_dir("lazy");
  write_bundle(card, Carrier::directory(dir));
  ReadOptions lazy;
  lazy.mode = ReadOptions::Mode::Lazy;
  CardBundle eager = read_bundle(Carrier::directory(dir));
  CardBundle deferred = read_bundle(Carrier::directory(dir), lazy);
  CHECK(!deferred.streams.events.materialized());
  std::vector<EventRow> streamed;
  deferred.streams.events.for_each(
      [&](const EventRow& row) { streamed.push_back(row); });
  CHECK(streamed == eager.streams.events.rows());
  CHECK(deferred.streams == eager.streams);
}

TEST_CASE("blob store: put/get round-trip, idempotence, corruption") {
  fs::path dir = fresh_dir("blobs");
  BlobStore store(dir / "blobs");

  BlobRef zero = store.put("");
  CHECK(zero.byte_length == 0);
  CHECK(store.get(zero).empty());

  std::string payload(1024 * 1024, 'q');
  BlobRef a = store.put(payload);
  BlobRef b = store.put(payload);
  CHECK(a == b);
  CHECK(store.index().size() == 2);
  CHECK(store.get(a) == payload);

  // Unknown digest.
  BlobRef bogus;
  bogus.digest = std::string(64, '0');
  CHECK_THROWS_AS(store.get(bogus), UnknownDigest);

  // Deliberate corruption is caught on get.
  write_file(dir / "blobs" / a.digest, "corrupted");
  CHECK_THROWS_AS(store.get(a), DigestMismatch);
}

TEST_CASE("zip writer emits parseable archives with exact bytes") {
  std::vector<ZipEntry> entries = {{"a.txt", "alpha"}, {"dir/b.txt", "beta"}};
  std::string archive = build_zip(entries);
  auto back = parse_zip(archive);
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "a.txt");
  CHECK(back[0].bytes == "alpha");
  CHECK(back[1].name == "dir/b.txt");
  CHECK(back[1].bytes == "beta");
}

TEST_CASE("any single-byte stream modification is detected at read time") {
  CardBundle card = tiny_card();
  fs::path dir = fresh_dir("bitflip");
  write_bundle(card, Carrier::directory(dir));
  std::string original = slurp(dir / "events.jsonl");
  REQUIRE(!original.empty());
  // Flip one byte at a spread of positions; the hash check must fire every
  // time regardless of where the byte lands.
  for (std::size_t pos : {std::size_t{0}, original.size() / 3,
                          original.size() / 2, original.size() - 2}) {
    std::string tampered = original;
    tampered[pos] = tampered[pos] == 'x' ? 'y' : 'x';
    if (tampered == original) continue;
    write_file(dir / "events.jsonl", tampered);
    CHECK_THROWS_AS(read_bundle(Carrier::directory(dir)), HashMismatch);
  }
  write_file(dir / "events.jsonl", original);
  CHECK_NOTHROW(read_bundle(Carrier::directory(dir)));
}

TEST_CASE("manifest extras and unknown keys survive round-trips verbatim") {
  CardBundle card = tiny_card();
  card.manifest.extra.emplace_back("exporter",
                                   rawjson::RawValue{"\"workbench 3.2\""});
  card.manifest.extra.emplace_back("sample_rate",
                                   rawjson::RawValue{"0.250"});
  fs::path dir = fresh_dir("manifest-extra");
  write_bundle(card, Carrier::directory(dir));
  std::string first = slurp(dir / "manifest.json");
  CHECK(first.find("0.250") != std::string::npos);

  // A foreign consumer adds a top-level key this toolkit does not know.
  std::string patched = first;
  patched.insert(patched.rfind("\n}"), ",\n  \"x_minor_addition\": [1, 2]");
  write_file(dir / "manifest.json", patched);
  ReadOptions opts;
  opts.verify_hashes = true;
  CardBundle back = read_bundle(Carrier::directory(dir), opts);
  REQUIRE(back.manifest.unknown.size() == 1);
  CHECK(back.manifest.unknown[0].first == "x_minor_addition");

  fs::path second_dir = fresh_dir("manifest-extra-2");
  write_bundle(back, Carrier::directory(second_dir));
  std::string second = slurp(second_dir / "manifest.json");
  CHECK(second.find("\"x_minor_addition\": [1, 2]") != std::string::npos);
  CHECK(second.find("0.250") != std::string::npos);
  // Fixed point from here on.
  CardBundle back2 = read_bundle(Carrier::directory(second_dir));
  fs::path third_dir = fresh_dir("manifest-extra-3");
  write_bundle(back2, Carrier::directory(third_dir));
  CHECK(slurp(third_dir / "manifest.json") == second);
}
