#include "rollcard/bundle_io.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>

#include "rollcard/errors.hpp"
#include "rollcard/sha256.hpp"
#include "rollcard/zipfile.hpp"

namespace rollcard {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("short write: " + path.string());
}

BlobStore::BlobStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoFailure("cannot create blob store: " + root_.string());
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_regular_file()) index_.insert(entry.path().filename().string());
  }
}

BlobRef BlobStore::put(std::string_view bytes, std::string media_type) {
  BlobRef ref;
  ref.digest = sha256_hex(bytes);
  ref.byte_length = bytes.size();
  if (!media_type.empty()) ref.media_type = std::move(media_type);

  fs::path target = root_ / ref.digest;
  if (!index_.contains(ref.digest) && !fs::exists(target)) {
    static std::atomic<unsigned> counter{0};
    fs::path tmp = root_ / (".tmp-" + std::to_string(::getpid()) + "-" +
                            std::to_string(counter.fetch_add(1)));
    write_file(tmp, bytes);
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      fs::remove(tmp);
      if (!fs::exists(target)) {
        throw IoFailure("cannot store blob: " + target.string());
      }
    }
  }
  index_.insert(ref.digest);
  return ref;
}

std::string BlobStore::get(const BlobRef& ref) const {
  if (!index_.contains(ref.digest)) throw UnknownDigest(ref.digest);
  std::string bytes = read_file(root_ / ref.digest);
  if (sha256_hex(bytes) != ref.digest) throw DigestMismatch(ref.digest);
  return bytes;
}

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kBlobsDir = "blobs";

struct PreparedBundle {
  std::map<std::string, std::string> stream_bytes;  // stream name -> bytes
  std::map<std::string, std::string> blobs;         // digest -> bytes
  Manifest manifest;
};

// Enforces the inline cap on every payload column; converts to blobs when
// requested.
std::string guard_payload(const rawjson::RawValue& payload,
                          const std::string& locator, bool convert,
                          std::map<std::string, std::string>& blobs,
                          bool& converted) {
  if (payload.text.size() <= kInlinePayloadCap) {
    converted = false;
    return payload.text;
  }
  if (!convert) {
    throw OversizedInlinePayload(locator, payload.text.size());
  }
  BlobRef ref;
  ref.digest = sha256_hex(payload.text);
  ref.byte_length = payload.text.size();
  ref.media_type = "application/json";
  blobs[ref.digest] = payload.text;
  converted = true;
  return blob_ref_payload(ref);
}

PreparedBundle prepare(const CardBundle& card, const WriteOptions& options) {
  PreparedBundle prep;
  prep.blobs = card.blobs;

  // Events need payload-cap handling; other streams serialize as-is but are
  // still checked.
  std::string events;
  card.streams.events.for_each([&](const EventRow& row) {
    bool converted = false;
    std::string payload = guard_payload(row.payload, row.event_id,
                                        options.convert_oversized_payloads,
                                        prep.blobs, converted);
    if (!converted) {
      events += serialize_row(row);
    } else {
      EventRow copy = row;
      copy.payload = rawjson::RawValue{payload};
      events += serialize_row(copy);
    }
    events.push_back('\n');
  });
  prep.stream_bytes["events"] = std::move(events);

  std::string annotations;
  card.streams.annotations.for_each([&](const AnnotationRow& row) {
    bool converted = false;
    std::string payload = guard_payload(
        row.payload, "annotation " + row.target_id + "/" + row.ns,
        options.convert_oversized_payloads, prep.blobs, converted);
    if (!converted) {
      annotations += serialize_row(row);
    } else {
      AnnotationRow copy = row;
      copy.payload = rawjson::RawValue{payload};
      annotations += serialize_row(copy);
    }
    annotations.push_back('\n');
  });
  prep.stream_bytes["annotations"] = std::move(annotations);

  prep.stream_bytes["nodes"] = serialize_stream(card, StreamKind::Nodes);
  prep.stream_bytes["edges"] = serialize_stream(card, StreamKind::Edges);
  prep.stream_bytes["mutations"] = serialize_stream(card, StreamKind::Mutations);

  prep.manifest = card.manifest;
  prep.manifest.stream_hashes.clear();
  for (StreamKind kind : kAllStreams) {
    std::string name(stream_name(kind));
    prep.manifest.stream_hashes[name] = sha256_hex(prep.stream_bytes[name]);
  }
  prep.manifest.blob_index.clear();
  for (const auto& [digest, bytes] : prep.blobs) {
    (void)bytes;
    prep.manifest.blob_index.push_back(digest);
  }
  return prep;
}

}  // namespace

Manifest write_bundle(const CardBundle& card, const Carrier& carrier,
                      const WriteOptions& options) {
  PreparedBundle prep = prepare(card, options);
  std::string manifest_bytes = serialize_manifest(prep.manifest);

  if (carrier.kind == Carrier::Kind::Directory) {
    std::error_code ec;
    fs::create_directories(carrier.path, ec);
    if (ec) throw IoFailure("cannot create: " + carrier.path.string());
    for (StreamKind kind : kAllStreams) {
      std::string name(stream_name(kind));
      write_file(carrier.path / (name + ".jsonl"), prep.stream_bytes[name]);
    }
    if (!prep.blobs.empty()) {
      fs::create_directories(carrier.path / kBlobsDir, ec);
      for (const auto& [digest, bytes] : prep.blobs) {
        write_file(carrier.path / kBlobsDir / digest, bytes);
      }
    }
    write_file(carrier.path / kManifestFile, manifest_bytes);
  } else {
    std::vector<ZipEntry> entries;
    for (StreamKind kind : kAllStreams) {
      std::string name(stream_name(kind));
      entries.push_back({name + ".jsonl", prep.stream_bytes[name]});
    }
    for (const auto& [digest, bytes] : prep.blobs) {
      entries.push_back({std::string(kBlobsDir) + "/" + digest, bytes});
    }
    entries.push_back({kManifestFile, manifest_bytes});
    write_zip(carrier.path, entries);
  }
  return prep.manifest;
}

namespace {

struct RawCarrier {
  std::string manifest_bytes;
  std::map<std::string, std::string> files;  // path -> bytes (streams, blobs)
  bool has(const std::string& name) const { return files.contains(name); }
};

RawCarrier load_carrier(const Carrier& carrier) {
  RawCarrier raw;
  if (carrier.kind == Carrier::Kind::Directory) {
    fs::path manifest_path = carrier.path / kManifestFile;
    if (!fs::exists(manifest_path)) {
      throw IoFailure("no manifest.json in " + carrier.path.string());
    }
    raw.manifest_bytes = read_file(manifest_path);
    for (StreamKind kind : kAllStreams) {
      std::string file = std::string(stream_name(kind)) + ".jsonl";
      if (fs::exists(carrier.path / file)) {
        raw.files[file] = read_file(carrier.path / file);
      }
    }
    fs::path blobs = carrier.path / kBlobsDir;
    if (fs::exists(blobs)) {
      for (const auto& entry : fs::directory_iterator(blobs)) {
        if (entry.is_regular_file()) {
          raw.files[std::string(kBlobsDir) + "/" +
                    entry.path().filename().string()] =
              read_file(entry.path());
        }
      }
    }
  } else {
    for (auto& entry : read_zip(carrier.path)) {
      if (entry.name == kManifestFile) {
        raw.manifest_bytes = std::move(entry.bytes);
      } else {
        raw.files[entry.name] = std::move(entry.bytes);
      }
    }
    if (raw.manifest_bytes.empty()) {
      throw IoFailure("no manifest.json in " + carrier.path.string());
    }
  }
  return raw;
}

}  // namespace

Manifest read_manifest(const Carrier& carrier) {
  return parse_manifest(load_carrier(carrier).manifest_bytes);
}

CardBundle read_bundle(const Carrier& carrier, const ReadOptions& options) {
  RawCarrier raw = load_carrier(carrier);
  CardBundle card;
  card.manifest = parse_manifest(raw.manifest_bytes);

  auto stream_bytes = [&](StreamKind kind) -> std::string {
    std::string name(stream_name(kind));
    std::string file = name + ".jsonl";
    auto hash = card.manifest.stream_hashes.find(name);
    if (hash == card.manifest.stream_hashes.end()) {
      // Absent optional stream: tolerated when the file is absent too.
      return {};
    }
    if (!raw.has(file)) throw MissingStream(name);
    std::string bytes = std::move(raw.files[file]);
    if (options.verify_hashes && sha256_hex(bytes) != hash->second) {
      throw HashMismatch(name);
    }
    return bytes;
  };

  std::string events = stream_bytes(StreamKind::Events);
  std::string nodes = stream_bytes(StreamKind::Nodes);
  std::string edges = stream_bytes(StreamKind::Edges);
  std::string annotations = stream_bytes(StreamKind::Annotations);
  std::string mutations = stream_bytes(StreamKind::Mutations);

  if (options.mode == ReadOptions::Mode::Lazy) {
    card.streams.events = RowStream<EventRow>::lazy(std::move(events));
    card.streams.nodes = RowStream<NodeRow>::lazy(std::move(nodes));
    card.streams.edges = RowStream<EdgeRow>::lazy(std::move(edges));
    card.streams.annotations =
        RowStream<AnnotationRow>::lazy(std::move(annotations));
    card.streams.mutations = RowStream<MutationRow>::lazy(std::move(mutations));
  } else {
    auto parse_all = [](const std::string& bytes, auto parse_fn, auto& out) {
      std::size_t start = 0;
      while (start < bytes.size()) {
        std::size_t end = bytes.find('\n', start);
        if (end == std::string::npos) end = bytes.size();
        if (end > start) {
          out.push_back(parse_fn(std::string_view(bytes).substr(start, end - start)));
        }
        start = end + 1;
      }
    };
    std::vector<EventRow> ev;
    std::vector<NodeRow> nd;
    std::vector<EdgeRow> ed;
    std::vector<AnnotationRow> an;
    std::vector<MutationRow> mu;
    parse_all(events, parse_event_row, ev);
    parse_all(nodes, parse_node_row, nd);
    parse_all(edges, parse_edge_row, ed);
    parse_all(annotations, parse_annotation_row, an);
    parse_all(mutations, parse_mutation_row, mu);
    card.streams.events = RowStream<EventRow>(std::move(ev));
    card.streams.nodes = RowStream<NodeRow>(std::move(nd));
    card.streams.edges = RowStream<EdgeRow>(std::move(ed));
    card.streams.annotations = RowStream<AnnotationRow>(std::move(an));
    card.streams.mutations = RowStream<MutationRow>(std::move(mu));
  }

  for (const std::string& digest : card.manifest.blob_index) {
    std::string file = std::string(kBlobsDir) + "/" + digest;
    if (!raw.has(file)) continue;  // dangling refs are the validator's call
    std::string bytes = std::move(raw.files[file]);
    if (options.verify_hashes && sha256_hex(bytes) != digest) {
      throw DigestMismatch(digest);
    }
    card.blobs[digest] = std::move(bytes);
  }
  return card;
}

}  // namespace rollcard
