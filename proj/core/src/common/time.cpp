#include "dr/time.hpp"

#include <cstdio>

#include <fmt/format.h>

#include "dr/error.hpp"

namespace dr {

namespace {

// Howard Hinnant's civil calendar conversions.
constexpr long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

struct Civil {
  long long y;
  unsigned m;
  unsigned d;
};

constexpr Civil civil_from_days(long long z) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long y = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

constexpr long long floor_div(long long a, long long b) {
  return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
}

}  // namespace

std::string format_rfc3339(Timestamp t) {
  const long long secs = t.time_since_epoch().count();
  const long long days = floor_div(secs, 86400);
  const long long rem = secs - days * 86400;
  const Civil c = civil_from_days(days);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", c.y, c.m, c.d, rem / 3600,
                     (rem / 60) % 60, rem % 60);
}

Timestamp parse_rfc3339(std::string_view s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  const std::string str(s);
  int consumed = 0;
  if (std::sscanf(str.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3 ||
      consumed != 10) {
    throw Error(ErrorCode::kParse, "invalid RFC 3339 timestamp: " + str);
  }
  std::size_t pos = 10;
  long long offset = 0;
  if (pos < str.size()) {
    if (str[pos] != 'T' && str[pos] != 't' && str[pos] != ' ') {
      throw Error(ErrorCode::kParse, "invalid RFC 3339 timestamp: " + str);
    }
    int n = 0;
    if (std::sscanf(str.c_str() + pos + 1, "%2d:%2d:%2d%n", &h, &mi, &se, &n) != 3 || n != 8) {
      throw Error(ErrorCode::kParse, "invalid RFC 3339 time: " + str);
    }
    pos += 9;
    if (pos < str.size() && str[pos] == '.') {
      ++pos;
      while (pos < str.size() && str[pos] >= '0' && str[pos] <= '9') ++pos;
    }
    if (pos < str.size()) {
      if (str[pos] == 'Z' || str[pos] == 'z') {
        ++pos;
      } else if (str[pos] == '+' || str[pos] == '-') {
        int oh = 0, om = 0;
        if (std::sscanf(str.c_str() + pos + 1, "%2d:%2d", &oh, &om) != 2) {
          throw Error(ErrorCode::kParse, "invalid RFC 3339 offset: " + str);
        }
        offset = (str[pos] == '+' ? 1 : -1) * (oh * 3600LL + om * 60LL);
        pos += 6;
      }
    }
    if (pos != str.size()) throw Error(ErrorCode::kParse, "trailing characters in timestamp: " + str);
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) {
    throw Error(ErrorCode::kParse, "timestamp field out of range: " + str);
  }
  const long long days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return Timestamp(std::chrono::seconds(days * 86400 + h * 3600LL + mi * 60LL + se - offset));
}

int year_of(Timestamp t) {
  const long long days = floor_div(t.time_since_epoch().count(), 86400);
  return static_cast<int>(civil_from_days(days).y);
}

Clock system_clock() {
  return [] {
    return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  };
}

Clock fixed_clock(Timestamp t) {
  return [t] { return t; };
}

}  // namespace dr
