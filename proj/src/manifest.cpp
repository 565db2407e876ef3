#include "rollcard/manifest.hpp"

#include <sstream>

#include "rollcard/rows.hpp"

#include "rollcard/errors.hpp"

namespace rollcard {

namespace {

using rawjson::RawValue;
using rawjson::ValueKind;

const RawValue* find_member(const rawjson::Members& members,
                            std::string_view key) {
  for (const auto& [k, v] : members) {
    if (k == key) return &v;
  }
  return nullptr;
}

const RawValue& need_member(const rawjson::Members& members,
                            std::string_view key) {
  const RawValue* v = find_member(members, key);
  if (!v) throw MissingRequiredColumn(std::string(key));
  return *v;
}

Json parse_value(const RawValue& raw, std::string_view what) {
  Json j = Json::parse(raw.text, nullptr, false);
  if (j.is_discarded()) {
    throw TypeMismatch(std::string(what), "valid JSON");
  }
  return j;
}

// Compact object text from raw-preserved members.
std::string compact_members(const rawjson::Members& members) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : members) {
    if (!first) out += ",";
    first = false;
    out += rawjson::encode_string(key);
    out += ":";
    out += value.text;
  }
  out += "}";
  return out;
}

constexpr std::string_view kKnownKeys[] = {
    "format_version", "run_id",        "created_at", "stream_hashes",
    "blob_index",     "release_scope", "rule_registry", "extra"};

bool is_known_key(std::string_view key) {
  for (auto k : kKnownKeys) {
    if (k == key) return true;
  }
  return false;
}

}  // namespace

bool operator==(const Manifest& a, const Manifest& b) {
  return a.major == b.major && a.minor == b.minor && a.run_id == b.run_id &&
         a.created_at == b.created_at && a.stream_hashes == b.stream_hashes &&
         a.blob_index == b.blob_index && a.release_scope == b.release_scope &&
         a.extra == b.extra && a.unknown == b.unknown &&
         a.rule_registry.size() == b.rule_registry.size() &&
         [&] {
           for (std::size_t i = 0; i < a.rule_registry.size(); ++i) {
             if (to_json(a.rule_registry[i]) != to_json(b.rule_registry[i])) {
               return false;
             }
           }
           return true;
         }();
}

std::string serialize_manifest(const Manifest& manifest) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"format_version\": [" << manifest.major << ", " << manifest.minor
      << "],\n";
  out << "  \"run_id\": " << rawjson::encode_string(manifest.run_id) << ",\n";
  out << "  \"created_at\": "
      << rawjson::encode_string(manifest.created_at.text) << ",\n";

  out << "  \"stream_hashes\": {";
  bool first = true;
  for (StreamKind kind : kAllStreams) {
    auto it = manifest.stream_hashes.find(std::string(stream_name(kind)));
    if (it == manifest.stream_hashes.end()) continue;
    if (!first) out << ",";
    first = false;
    out << "\n    " << rawjson::encode_string(it->first) << ": "
        << rawjson::encode_string(it->second);
  }
  out << (first ? "}" : "\n  }") << ",\n";

  out << "  \"blob_index\": [";
  first = true;
  for (const auto& digest : manifest.blob_index) {
    if (!first) out << ",";
    first = false;
    out << "\n    " << rawjson::encode_string(digest);
  }
  out << (first ? "]" : "\n  ]") << ",\n";

  out << "  \"release_scope\": " << to_json(manifest.release_scope).dump()
      << ",\n";

  out << "  \"rule_registry\": [";
  first = true;
  for (const auto& entry : manifest.rule_registry) {
    if (!first) out << ",";
    first = false;
    out << "\n    " << to_json(entry).dump();
  }
  out << (first ? "]" : "\n  ]");

  if (!manifest.extra.empty()) {
    out << ",\n  \"extra\": " << compact_members(manifest.extra);
  }
  for (const auto& [key, value] : manifest.unknown) {
    out << ",\n  " << rawjson::encode_string(key) << ": " << value.text;
  }
  out << "\n}\n";
  return out.str();
}

Manifest parse_manifest(std::string_view text) {
  rawjson::Members members = rawjson::split_object(text);
  Manifest m;

  Json version = parse_value(need_member(members, "format_version"),
                             "format_version");
  if (!version.is_array() || version.size() != 2 ||
      !version[0].is_number_integer() || !version[1].is_number_integer()) {
    throw TypeMismatch("format_version", "[major, minor] integer pair");
  }
  m.major = version[0].get<int>();
  m.minor = version[1].get<int>();
  if (m.major != kSupportedMajorVersion) {
    throw UnsupportedMajorVersion(m.major, kSupportedMajorVersion);
  }

  const RawValue& run_id = need_member(members, "run_id");
  if (rawjson::kind(run_id) != ValueKind::String) {
    throw TypeMismatch("run_id", "string");
  }
  m.run_id = rawjson::decode_string(run_id);

  const RawValue& created = need_member(members, "created_at");
  if (rawjson::kind(created) != ValueKind::String) {
    throw TypeMismatch("created_at", "RFC 3339 UTC millisecond timestamp");
  }
  m.created_at.text = rawjson::decode_string(created);
  if (!is_valid_timestamp(m.created_at.text)) {
    throw TypeMismatch("created_at", "RFC 3339 UTC millisecond timestamp");
  }

  Json hashes = parse_value(need_member(members, "stream_hashes"),
                            "stream_hashes");
  if (!hashes.is_object()) throw TypeMismatch("stream_hashes", "object");
  for (const auto& [key, value] : hashes.items()) {
    if (!stream_from_name(key)) {
      throw TypeMismatch("stream_hashes", "keys drawn from the five streams");
    }
    if (!value.is_string()) throw TypeMismatch("stream_hashes", "hex strings");
    m.stream_hashes[key] = value.get<std::string>();
  }

  if (const RawValue* blobs = find_member(members, "blob_index")) {
    Json arr = parse_value(*blobs, "blob_index");
    if (!arr.is_array()) throw TypeMismatch("blob_index", "array of digests");
    for (const auto& digest : arr) {
      if (!digest.is_string()) throw TypeMismatch("blob_index", "hex strings");
      m.blob_index.push_back(digest.get<std::string>());
    }
  }

  if (const RawValue* scope = find_member(members, "release_scope")) {
    m.release_scope = release_scope_from_json(parse_value(*scope, "release_scope"));
  }

  if (const RawValue* registry = find_member(members, "rule_registry")) {
    Json arr = parse_value(*registry, "rule_registry");
    if (!arr.is_array()) throw TypeMismatch("rule_registry", "array");
    for (const auto& entry : arr) {
      m.rule_registry.push_back(rule_entry_from_json(entry));
    }
  }

  if (const RawValue* extra = find_member(members, "extra")) {
    if (rawjson::kind(*extra) != ValueKind::Object) {
      throw TypeMismatch("extra", "object");
    }
    m.extra = rawjson::split_object(extra->text);
  }

  for (const auto& [key, value] : members) {
    if (!is_known_key(key)) m.unknown.emplace_back(key, value);
  }
  return m;
}

}  // namespace rollcard
