#pragma once

#include <string>
#include <string_view>

namespace rollcard {

// Hex digest over raw bytes. Stream hashes are taken over file bytes as
// written, never over re-serialized rows, so the hash is independent of
// parser behaviour.
std::string sha256_hex(std::string_view bytes);

}  // namespace rollcard
