#include "rollcard/zipfile.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>

#include "rollcard/errors.hpp"

namespace rollcard {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
// DOS date for 1980-01-01, the zip epoch.
constexpr std::uint16_t kDosDate = 0x0021;
constexpr std::uint16_t kDosTime = 0x0000;
// Regular file, mode 0644, in the upper unix half.
constexpr std::uint32_t kExternalAttrs = 0100644u << 16;

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get16(const std::string& in, std::size_t at) {
  return static_cast<std::uint8_t>(in[at]) |
         (static_cast<std::uint8_t>(in[at + 1]) << 8);
}

std::uint32_t get32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<std::uint8_t>(in[at + i]);
  }
  return v;
}

std::string inflate_raw(const std::string& in, std::size_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
    throw IoFailure("zip: inflate init failed");
  }
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw IoFailure("zip: corrupt deflate entry");
  out.resize(zs.total_out);
  return out;
}

}  // namespace

std::string build_zip(const std::vector<ZipEntry>& entries) {
  std::string out;
  struct CentralRecord {
    std::string name;
    std::uint32_t crc, size, offset;
  };
  std::vector<CentralRecord> central;
  central.reserve(entries.size());

  for (const auto& entry : entries) {
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(entry.bytes.data()),
              static_cast<uInt>(entry.bytes.size())));
    std::uint32_t offset = static_cast<std::uint32_t>(out.size());
    put32(out, kLocalSig);
    put16(out, 20);  // version needed
    put16(out, 0);   // flags
    put16(out, 0);   // method: store
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(entry.bytes.size()));
    put32(out, static_cast<std::uint32_t>(entry.bytes.size()));
    put16(out, static_cast<std::uint16_t>(entry.name.size()));
    put16(out, 0);  // extra length
    out += entry.name;
    out += entry.bytes;
    central.push_back(
        {entry.name, crc, static_cast<std::uint32_t>(entry.bytes.size()),
         offset});
  }

  std::uint32_t cd_start = static_cast<std::uint32_t>(out.size());
  for (const auto& rec : central) {
    put32(out, kCentralSig);
    put16(out, 20);  // version made by
    put16(out, 20);  // version needed
    put16(out, 0);
    put16(out, 0);  // method: store
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, rec.crc);
    put32(out, rec.size);
    put32(out, rec.size);
    put16(out, static_cast<std::uint16_t>(rec.name.size()));
    put16(out, 0);  // extra
    put16(out, 0);  // comment
    put16(out, 0);  // disk start
    put16(out, 0);  // internal attrs
    put32(out, kExternalAttrs);
    put32(out, rec.offset);
    out += rec.name;
  }
  std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_start;

  put32(out, kEndSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(central.size()));
  put16(out, static_cast<std::uint16_t>(central.size()));
  put32(out, cd_size);
  put32(out, cd_start);
  put16(out, 0);
  return out;
}

void write_zip(const std::filesystem::path& path,
               const std::vector<ZipEntry>& entries) {
  std::string bytes = build_zip(entries);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("short write: " + path.string());
}

std::vector<ZipEntry> parse_zip(const std::string& bytes) {
  if (bytes.size() < 22) throw IoFailure("zip: too short");
  // EOCD has a variable-length comment; scan backwards for the signature.
  std::size_t eocd = std::string::npos;
  std::size_t low = bytes.size() >= 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
  for (std::size_t i = bytes.size() - 22; ; --i) {
    if (get32(bytes, i) == kEndSig) {
      eocd = i;
      break;
    }
    if (i == low) break;
  }
  if (eocd == std::string::npos) throw IoFailure("zip: no end record");

  std::uint16_t count = get16(bytes, eocd + 10);
  std::uint32_t cd_offset = get32(bytes, eocd + 16);

  std::vector<ZipEntry> entries;
  entries.reserve(count);
  std::size_t at = cd_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (at + 46 > bytes.size() || get32(bytes, at) != kCentralSig) {
      throw IoFailure("zip: corrupt central directory");
    }
    std::uint16_t method = get16(bytes, at + 10);
    std::uint32_t comp_size = get32(bytes, at + 20);
    std::uint32_t uncomp_size = get32(bytes, at + 24);
    std::uint16_t name_len = get16(bytes, at + 28);
    std::uint16_t extra_len = get16(bytes, at + 30);
    std::uint16_t comment_len = get16(bytes, at + 32);
    std::uint32_t local_offset = get32(bytes, at + 42);
    std::string name = bytes.substr(at + 46, name_len);
    at += 46 + name_len + extra_len + comment_len;

    if (local_offset + 30 > bytes.size() ||
        get32(bytes, local_offset) != kLocalSig) {
      throw IoFailure("zip: corrupt local header for " + name);
    }
    std::uint16_t local_name_len = get16(bytes, local_offset + 26);
    std::uint16_t local_extra_len = get16(bytes, local_offset + 28);
    std::size_t data_at = local_offset + 30 + local_name_len + local_extra_len;
    if (data_at + comp_size > bytes.size()) {
      throw IoFailure("zip: truncated entry " + name);
    }
    std::string data = bytes.substr(data_at, comp_size);
    if (method == 8) {
      data = inflate_raw(data, uncomp_size);
    } else if (method != 0) {
      throw IoFailure("zip: unsupported compression method for " + name);
    }
    entries.push_back({std::move(name), std::move(data)});
  }
  return entries;
}

std::vector<ZipEntry> read_zip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return parse_zip(bytes);
}

}  // namespace rollcard
