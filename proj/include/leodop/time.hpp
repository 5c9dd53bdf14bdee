#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <string_view>

#include "leodop/error.hpp"

namespace leodop {

/// A UTC instant with nanosecond resolution. Leap seconds are ignored and UTC
/// is used in place of UT1 wherever Earth rotation is needed.
using UtcInstant = std::chrono::sys_time<std::chrono::nanoseconds>;

inline constexpr double kSecondsPerDay = 86400.0;

/// 2000-01-01T12:00:00 UTC.
inline constexpr UtcInstant kJ2000 =
    UtcInstant{std::chrono::sys_days{std::chrono::year{2000} / 1 / 1}} + std::chrono::hours{12};

/// to - from, in seconds.
inline double seconds_between(UtcInstant from, UtcInstant to) {
  const std::int64_t ns = (to - from).count();
  const std::int64_t whole = ns / 1'000'000'000;
  const std::int64_t frac = ns % 1'000'000'000;
  return static_cast<double>(whole) + static_cast<double>(frac) * 1e-9;
}

inline UtcInstant add_seconds(UtcInstant t, double seconds) {
  return t + std::chrono::nanoseconds{std::llround(seconds * 1e9)};
}

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace detail

/// Parses "YYYY-MM-DDThh:mm:ss[.fff...]Z" (the trailing Z is optional; a space
/// may replace the T).
inline UtcInstant parse_utc(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorCode::ParseError, "invalid ISO-8601 UTC instant '" + std::string(text) + "'");
  };
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    throw fail();
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!detail::parse_int(text.substr(0, 4), y) || !detail::parse_int(text.substr(5, 2), mo) ||
      !detail::parse_int(text.substr(8, 2), d) || !detail::parse_int(text.substr(11, 2), h) ||
      !detail::parse_int(text.substr(14, 2), mi) || !detail::parse_int(text.substr(17, 2), s)) {
    throw fail();
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw fail();

  std::int64_t frac_ns = 0;
  std::string_view rest = text.substr(19);
  if (!rest.empty()) {
    if (rest.front() != '.' || rest.size() < 2) throw fail();
    rest.remove_prefix(1);
    std::int64_t scale = 100'000'000;
    for (char c : rest) {
      if (c < '0' || c > '9') throw fail();
      frac_ns += (c - '0') * scale;
      scale /= 10;
    }
  }
  return UtcInstant{std::chrono::sys_days{ymd}} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{s} + std::chrono::nanoseconds{frac_ns};
}

/// ISO-8601 with `decimals` fractional digits (0-9) and a trailing Z.
inline std::string format_utc(UtcInstant t, int decimals = 3) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const auto tod = t - day;
  const auto secs = floor<seconds>(tod);
  const auto ns = (tod - secs).count();
  const long long s_of_day = secs.count();

  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), s_of_day / 3600,
                (s_of_day / 60) % 60, s_of_day % 60);
  std::string out = buf;
  if (decimals > 0) {
    if (decimals > 9) decimals = 9;
    char frac[16];
    std::snprintf(frac, sizeof frac, "%09lld", static_cast<long long>(ns));
    out += '.';
    out.append(frac, static_cast<std::size_t>(decimals));
  }
  out += 'Z';
  return out;
}

/// Greenwich mean sidereal angle (IAU-82 expression) at t - offset_s, radians
/// in [0, 2pi). The day count is split so that sub-microsecond offsets remain
/// resolvable.
inline double gmst_rad(UtcInstant t, double offset_s = 0.0) {
  using namespace std::chrono;
  constexpr std::int64_t ns_per_day = 86'400'000'000'000;
  const std::int64_t ns = (t - kJ2000).count();
  std::int64_t whole_days = ns / ns_per_day;
  std::int64_t rem = ns % ns_per_day;
  if (rem < 0) {
    rem += ns_per_day;
    --whole_days;
  }
  const double frac = static_cast<double>(rem) / static_cast<double>(ns_per_day) - offset_s / kSecondsPerDay;
  const double d = static_cast<double>(whole_days) + frac;
  const double tc = d / 36525.0;
  // 360.98564736629 * d with the integer-turn part of 360 * whole_days dropped.
  double deg = 280.46061837 + 360.0 * frac + 0.98564736629 * d + 0.000387933 * tc * tc -
               tc * tc * tc / 38710000.0;
  deg = std::fmod(deg, 360.0);
  if (deg < 0.0) deg += 360.0;
  return deg * std::numbers::pi / 180.0;
}

}  // namespace leodop
