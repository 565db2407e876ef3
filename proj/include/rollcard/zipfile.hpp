#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rollcard {

struct ZipEntry {
  std::string name;
  std::string bytes;
};

// Writes entries in the given order with the STORE method, zeroed mod times,
// and fixed attributes, so identical entries always produce identical
// archive bytes.
std::string build_zip(const std::vector<ZipEntry>& entries);
void write_zip(const std::filesystem::path& path,
               const std::vector<ZipEntry>& entries);

// Reads STORE and DEFLATE entries in central-directory order.
std::vector<ZipEntry> read_zip(const std::filesystem::path& path);
std::vector<ZipEntry> parse_zip(const std::string& bytes);

}  // namespace rollcard
