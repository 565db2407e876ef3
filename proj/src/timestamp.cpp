#include "rollcard/timestamp.hpp"

#include <cctype>
#include <cstdio>

#include "rollcard/errors.hpp"

namespace rollcard {

namespace {

bool digits(std::string_view s, std::size_t from, std::size_t count) {
  for (std::size_t i = from; i < from + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

int num(std::string_view s, std::size_t from, std::size_t count) {
  int v = 0;
  for (std::size_t i = from; i < from + count; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && leap(y)) return 29;
  return d[m - 1];
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

bool is_valid_timestamp(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS.mmmZ
  if (s.size() != 24) return false;
  if (s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':' || s[19] != '.' || s[23] != 'Z') {
    return false;
  }
  if (!digits(s, 0, 4) || !digits(s, 5, 2) || !digits(s, 8, 2) ||
      !digits(s, 11, 2) || !digits(s, 14, 2) || !digits(s, 17, 2) ||
      !digits(s, 20, 3)) {
    return false;
  }
  int y = num(s, 0, 4), mo = num(s, 5, 2), d = num(s, 8, 2);
  int h = num(s, 11, 2), mi = num(s, 14, 2), sec = num(s, 17, 2);
  if (mo < 1 || mo > 12) return false;
  if (d < 1 || d > days_in_month(y, mo)) return false;
  if (h > 23 || mi > 59 || sec > 59) return false;
  return true;
}

Timestamp timestamp_from_unix_millis(std::int64_t millis) {
  std::int64_t days = millis / 86400000;
  std::int64_t rem = millis % 86400000;
  if (rem < 0) {
    rem += 86400000;
    --days;
  }
  int y, mo, d;
  civil_from_days(days, y, mo, d);
  int h = static_cast<int>(rem / 3600000);
  rem %= 3600000;
  int mi = static_cast<int>(rem / 60000);
  rem %= 60000;
  int sec = static_cast<int>(rem / 1000);
  int ms = static_cast<int>(rem % 1000);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", y, mo,
                d, h, mi, sec, ms);
  return Timestamp{buf};
}

std::int64_t unix_millis(const Timestamp& ts) {
  const std::string& s = ts.text;
  if (!is_valid_timestamp(s)) {
    throw TypeMismatch("timestamp", "RFC 3339 UTC millisecond timestamp");
  }
  std::int64_t days =
      days_from_civil(num(s, 0, 4), num(s, 5, 2), num(s, 8, 2));
  std::int64_t secs = num(s, 11, 2) * 3600 + num(s, 14, 2) * 60 + num(s, 17, 2);
  return days * 86400000 + secs * 1000 + num(s, 20, 3);
}

}  // namespace rollcard
