#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <optional>
#include <string>
#include <string_view>

#include "repovitals/error.hpp"

namespace repovitals {

// Seconds since the Unix epoch, UTC. All timestamps in the library use this.
using UnixTime = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;
// Analysis "month": a fixed 30-day block. Gives deterministic, timezone-free
// window tiling.
inline constexpr std::int64_t kSecondsPerMonth = 30 * kSecondsPerDay;

// Civil calendar <-> day-count conversions (proleptic Gregorian).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : static_cast<unsigned>(-9));
  return {y + (m <= 2), m, d};
}

constexpr UnixTime make_utc(std::int64_t year, unsigned month, unsigned day,
                            unsigned hour = 0, unsigned minute = 0,
                            unsigned second = 0) {
  return days_from_civil(year, month, day) * kSecondsPerDay + hour * 3600 +
         minute * 60 + second;
}

// Parses ISO-8601 timestamps such as "2020-01-31T12:00:05Z". Accepts a bare
// date (midnight UTC), an optional fractional-second part (truncated), and
// numeric offsets.
inline std::optional<UnixTime> parse_iso8601(std::string_view s) {
  auto digits = [&](size_t pos, size_t len, long& out) -> bool {
    if (pos + len > s.size()) return false;
    long v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
  };
  long y, mo, d;
  if (!digits(0, 4, y) || s.size() < 10 || s[4] != '-' || !digits(5, 2, mo) ||
      s[7] != '-' || !digits(8, 2, d))
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  long h = 0, mi = 0, sec = 0;
  size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    ++pos;
    if (!digits(pos, 2, h) || pos + 8 > s.size() || s[pos + 2] != ':' ||
        !digits(pos + 3, 2, mi) || s[pos + 5] != ':' || !digits(pos + 6, 2, sec))
      return std::nullopt;
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    pos += 8;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
  }
  std::int64_t offset = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '+' ? 1 : -1;
      ++pos;
      long oh, om = 0;
      if (!digits(pos, 2, oh)) return std::nullopt;
      pos += 2;
      if (pos < s.size() && s[pos] == ':') ++pos;
      if (pos < s.size() && digits(pos, 2, om)) pos += 2;
      offset = sign * (oh * 3600 + om * 60);
    }
  }
  if (pos != s.size()) return std::nullopt;
  return make_utc(y, static_cast<unsigned>(mo), static_cast<unsigned>(d),
                  static_cast<unsigned>(h), static_cast<unsigned>(mi),
                  static_cast<unsigned>(sec)) -
         offset;
}

inline UnixTime parse_iso8601_or_throw(std::string_view s,
                                       std::string_view what) {
  auto t = parse_iso8601(s);
  if (!t)
    throw Error(Errc::malformed,
                "invalid timestamp '" + std::string(s) + "' in " +
                    std::string(what));
  return *t;
}

// Seconds-precision UTC formatting, e.g. "2020-01-31T12:00:05Z".
inline std::string format_iso8601(UnixTime t) {
  std::int64_t days = t / kSecondsPerDay;
  std::int64_t rem = t % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  const CivilDate cd = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(cd.year), cd.month, cd.day,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

inline UnixTime now_utc() {
  return static_cast<UnixTime>(std::time(nullptr));
}

}  // namespace repovitals
