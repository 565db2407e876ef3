#pragma once

#include <map>
#include <string>
#include <vector>

#include "rollcard/rawjson.hpp"
#include "rollcard/release_scope.hpp"
#include "rollcard/rule_entry.hpp"
#include "rollcard/timestamp.hpp"

namespace rollcard {

inline constexpr int kSupportedMajorVersion = 1;
inline constexpr int kCurrentMinorVersion = 0;

// manifest.json: run-level metadata, format version, content hashes.
struct Manifest {
  int major = kSupportedMajorVersion;
  int minor = kCurrentMinorVersion;
  std::string run_id;
  Timestamp created_at;
  // stream name -> sha256 hex over the stream file's raw bytes; absent
  // optional streams are absent keys.
  std::map<std::string, std::string> stream_hashes;
  std::vector<std::string> blob_index;  // sorted hex digests
  ReleaseScope release_scope;
  std::vector<ReportingRuleEntry> rule_registry;
  // Open key-value map; values keep their source text verbatim.
  rawjson::Members extra;
  // Unrecognised top-level manifest keys, preserved for minor-version
  // tolerance.
  rawjson::Members unknown;
};

bool operator==(const Manifest& a, const Manifest& b);

// Canonical manifest bytes; writing the same manifest twice is bit-identical.
std::string serialize_manifest(const Manifest& manifest);

// Throws MalformedRecord / MissingRequiredColumn / TypeMismatch on bad input
// and UnsupportedMajorVersion when the major version is not ours.
Manifest parse_manifest(std::string_view text);

}  // namespace rollcard
