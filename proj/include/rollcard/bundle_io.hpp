#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "rollcard/bundle.hpp"

namespace rollcard {

// Where a bundle lives on disk.
struct Carrier {
  enum class Kind { Directory, Zip };
  Kind kind = Kind::Directory;
  std::filesystem::path path;

  static Carrier directory(std::filesystem::path p) {
    return {Kind::Directory, std::move(p)};
  }
  static Carrier zip(std::filesystem::path p) {
    return {Kind::Zip, std::move(p)};
  }
};

// Content-addressed blob directory. File name == sha256 hex of contents.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path root);

  // Idempotent on identical bytes; concurrent writers are safe because the
  // store writes to a temp file and renames onto the digest.
  BlobRef put(std::string_view bytes, std::string media_type = "");
  std::string get(const BlobRef& ref) const;

  const std::set<std::string>& index() const { return index_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::set<std::string> index_;
};

struct WriteOptions {
  // Convert payloads above the inline cap into blobs instead of failing.
  bool convert_oversized_payloads = false;
};

struct ReadOptions {
  enum class Mode { Eager, Lazy };
  Mode mode = Mode::Eager;
  bool verify_hashes = true;
};

// Writes manifest.json, the five stream files, and blobs/. Stream hashes in
// the returned manifest match the bytes written; manifest.json is written
// last so a partially written bundle is never hash-valid. Writing the same
// card twice produces byte-identical carriers.
Manifest write_bundle(const CardBundle& card, const Carrier& carrier,
                      const WriteOptions& options = {});

CardBundle read_bundle(const Carrier& carrier, const ReadOptions& options = {});

// Reads just the manifest, without stream verification.
Manifest read_manifest(const Carrier& carrier);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace rollcard
