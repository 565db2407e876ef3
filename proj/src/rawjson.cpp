#include "rollcard/rawjson.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "rollcard/errors.hpp"

namespace rollcard::rawjson {

namespace {

struct Scanner {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw MalformedRecord(what + " at byte " + std::to_string(pos));
  }

  bool done() const { return pos >= text.size(); }

  char peek() const {
    if (done()) const_cast<Scanner*>(this)->fail("unexpected end of record");
    return text[pos];
  }

  char take() {
    char c = peek();
    ++pos;
    return c;
  }

  void skip_ws() {
    while (!done()) {
      char c = text[pos];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (take() != c) {
      --pos;
      fail(std::string("expected '") + c + "'");
    }
  }

  void scan_string() {
    expect('"');
    while (true) {
      char c = take();
      if (c == '"') return;
      if (static_cast<unsigned char>(c) < 0x20) fail("raw control byte in string");
      if (c == '\\') {
        char e = take();
        switch (e) {
          case '"': case '\\': case '/': case 'b': case 'f':
          case 'n': case 'r': case 't':
            break;
          case 'u':
            for (int i = 0; i < 4; ++i) {
              char h = take();
              if (!std::isxdigit(static_cast<unsigned char>(h))) fail("bad \\u escape");
            }
            break;
          default:
            fail("bad escape");
        }
      }
    }
  }

  void scan_number() {
    if (peek() == '-') ++pos;
    if (done()) fail("truncated number");
    if (peek() == '0') {
      ++pos;
    } else if (std::isdigit(static_cast<unsigned char>(peek()))) {
      while (!done() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    } else {
      fail("bad number");
    }
    if (!done() && text[pos] == '.') {
      ++pos;
      if (done() || !std::isdigit(static_cast<unsigned char>(text[pos]))) fail("bad fraction");
      while (!done() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    if (!done() && (text[pos] == 'e' || text[pos] == 'E')) {
      ++pos;
      if (!done() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (done() || !std::isdigit(static_cast<unsigned char>(text[pos]))) fail("bad exponent");
      while (!done() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
  }

  void scan_literal(std::string_view word) {
    if (text.substr(pos, word.size()) != word) fail("bad literal");
    pos += word.size();
  }

  // Validates one value and leaves pos just past it.
  void scan_value() {
    skip_ws();
    char c = peek();
    switch (c) {
      case '"': scan_string(); return;
      case '{': scan_object(); return;
      case '[': scan_array(); return;
      case 't': scan_literal("true"); return;
      case 'f': scan_literal("false"); return;
      case 'n': scan_literal("null"); return;
      default: scan_number(); return;
    }
  }

  void scan_object() {
    expect('{');
    skip_ws();
    if (peek() == '}') { ++pos; return; }
    while (true) {
      skip_ws();
      scan_string();
      skip_ws();
      expect(':');
      scan_value();
      skip_ws();
      char c = take();
      if (c == '}') return;
      if (c != ',') { --pos; fail("expected ',' or '}'"); }
    }
  }

  void scan_array() {
    expect('[');
    skip_ws();
    if (peek() == ']') { ++pos; return; }
    while (true) {
      scan_value();
      skip_ws();
      char c = take();
      if (c == ']') return;
      if (c != ',') { --pos; fail("expected ',' or ']'"); }
    }
  }
};

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp <= 0x7F) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

Members split_object(std::string_view line) {
  Scanner s{line};
  s.skip_ws();
  if (s.done()) throw MalformedRecord("empty record");
  if (s.peek() != '{') throw MalformedRecord("record is not a JSON object");

  Members members;
  std::set<std::string, std::less<>> seen;

  s.expect('{');
  s.skip_ws();
  if (s.peek() == '}') {
    ++s.pos;
  } else {
    while (true) {
      s.skip_ws();
      std::size_t key_start = s.pos;
      s.scan_string();
      RawValue key_raw{std::string(line.substr(key_start, s.pos - key_start))};
      std::string key = decode_string(key_raw);
      if (!seen.insert(key).second) {
        throw MalformedRecord("duplicate column: " + key);
      }
      s.skip_ws();
      s.expect(':');
      s.skip_ws();
      std::size_t value_start = s.pos;
      s.scan_value();
      members.emplace_back(
          std::move(key),
          RawValue{std::string(line.substr(value_start, s.pos - value_start))});
      s.skip_ws();
      char c = s.take();
      if (c == '}') break;
      if (c != ',') { --s.pos; s.fail("expected ',' or '}'"); }
    }
  }
  s.skip_ws();
  if (!s.done()) s.fail("trailing bytes after record");
  return members;
}

ValueKind kind(const RawValue& value) {
  if (value.text.empty()) throw MalformedRecord("empty value");
  switch (value.text.front()) {
    case '"': return ValueKind::String;
    case '{': return ValueKind::Object;
    case '[': return ValueKind::Array;
    case 't': return ValueKind::True;
    case 'f': return ValueKind::False;
    case 'n': return ValueKind::Null;
    default: return ValueKind::Number;
  }
}

std::string decode_string(const RawValue& value) {
  const std::string& t = value.text;
  if (t.size() < 2 || t.front() != '"') throw MalformedRecord("not a string value");
  std::string out;
  out.reserve(t.size() - 2);
  std::size_t i = 1;
  while (i + 1 < t.size()) {
    char c = t[i];
    if (c != '\\') {
      out.push_back(c);
      ++i;
      continue;
    }
    char e = t[i + 1];
    i += 2;
    switch (e) {
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      case '/': out.push_back('/'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 't': out.push_back('\t'); break;
      case 'u': {
        std::uint32_t cp = 0;
        for (int k = 0; k < 4; ++k) cp = cp * 16 + hex_digit(t[i + k]);
        i += 4;
        if (cp >= 0xD800 && cp <= 0xDBFF && i + 6 <= t.size() && t[i] == '\\' &&
            t[i + 1] == 'u') {
          std::uint32_t lo = 0;
          for (int k = 0; k < 4; ++k) lo = lo * 16 + hex_digit(t[i + 2 + k]);
          if (lo >= 0xDC00 && lo <= 0xDFFF) {
            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
            i += 6;
          }
        }
        append_utf8(out, cp);
        break;
      }
      default: throw MalformedRecord("bad escape in string");
    }
  }
  return out;
}

std::string encode_string(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back('"');
  for (unsigned char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\u00";
          out.push_back(hex[c >> 4]);
          out.push_back(hex[c & 0xF]);
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
  return out;
}

std::optional<std::int64_t> as_integer(const RawValue& value) {
  if (kind(value) != ValueKind::Number) return std::nullopt;
  const std::string& t = value.text;
  if (t.find('.') != std::string::npos || t.find('e') != std::string::npos ||
      t.find('E') != std::string::npos) {
    return std::nullopt;
  }
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return out;
}

RawValue raw_string(std::string_view text) { return RawValue{encode_string(text)}; }

RawValue raw_integer(std::int64_t value) { return RawValue{std::to_string(value)}; }

}  // namespace rollcard::rawjson
