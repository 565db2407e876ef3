#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rollcard/manifest.hpp"
#include "rollcard/row_codec.hpp"
#include "rollcard/rows.hpp"

namespace rollcard {

// Ordered rows of one stream. Either materialized up front (eager) or backed
// by raw line bytes parsed on demand (lazy). Both present the same sequence.
template <typename Row>
class RowStream {
 public:
  RowStream() : rows_(std::vector<Row>{}) {}
  explicit RowStream(std::vector<Row> rows) : rows_(std::move(rows)) {}

  static RowStream lazy(std::string bytes) {
    RowStream s;
    s.rows_.reset();
    s.raw_ = std::move(bytes);
    return s;
  }

  bool materialized() const { return rows_.has_value(); }

  // Parses and caches when lazy.
  const std::vector<Row>& rows() const {
    if (!rows_) {
      std::vector<Row> parsed;
      scan_lines(*raw_, [&](std::string_view line) {
        parsed.push_back(parse_line(line));
      });
      rows_ = std::move(parsed);
    }
    return *rows_;
  }

  // Streaming pass that never caches; this is the lazy iterator surface.
  void for_each(const std::function<void(const Row&)>& fn) const {
    if (rows_) {
      for (const Row& row : *rows_) fn(row);
      return;
    }
    scan_lines(*raw_, [&](std::string_view line) { fn(parse_line(line)); });
  }

  std::size_t size() const {
    if (rows_) return rows_->size();
    std::size_t n = 0;
    scan_lines(*raw_, [&](std::string_view) { ++n; });
    return n;
  }

  bool operator==(const RowStream& other) const {
    return rows() == other.rows();
  }

 private:
  static Row parse_line(std::string_view line);

  template <typename Fn>
  static void scan_lines(const std::string& bytes, Fn&& fn) {
    std::size_t start = 0;
    while (start < bytes.size()) {
      std::size_t end = bytes.find('\n', start);
      if (end == std::string::npos) end = bytes.size();
      if (end > start) fn(std::string_view(bytes).substr(start, end - start));
      start = end + 1;
    }
  }

  mutable std::optional<std::vector<Row>> rows_;
  std::optional<std::string> raw_;
};

struct StreamSet {
  RowStream<EventRow> events;
  RowStream<NodeRow> nodes;
  RowStream<EdgeRow> edges;
  RowStream<AnnotationRow> annotations;
  RowStream<MutationRow> mutations;

  bool operator==(const StreamSet&) const = default;
};

// One rollout card: manifest + five row streams + content-addressed blobs.
struct CardBundle {
  Manifest manifest;
  StreamSet streams;
  std::map<std::string, std::string> blobs;  // digest -> bytes

  bool operator==(const CardBundle& other) const {
    return manifest == other.manifest && streams == other.streams &&
           blobs == other.blobs;
  }
};

// Canonical bytes of one stream: serialized rows, LF-terminated, no BOM.
std::string serialize_stream(const CardBundle& card, StreamKind kind);

// Blob references found inside a payload value ({"$blob": {...}} markers).
std::vector<BlobRef> find_blob_refs(const rawjson::RawValue& payload);

// Raw payload text for a BlobRef, e.g. used when converting oversized inline
// payloads at write time.
std::string blob_ref_payload(const BlobRef& ref);

// Root-episode identifiers: level-0 nodes in file order.
std::vector<NodeRow> root_nodes(const CardBundle& card);

}  // namespace rollcard
