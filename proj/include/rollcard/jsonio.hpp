#pragma once

#include <json.hpp>

#include <string>

namespace rollcard {

// Order-preserving JSON document type for manifests, reports, and tables.
// Row streams never go through this type; they use the raw-preserving codec.
using Json = nlohmann::ordered_json;

// Canonical document bytes: two-space indent, trailing newline.
inline std::string dump_document(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace rollcard
