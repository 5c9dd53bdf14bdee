#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "leodop/error.hpp"
#include "leodop/time.hpp"

namespace leodop {

/// One two-line element set. Angles are degrees, mean motion rev/day, bstar in
/// 1/earth-radii.
struct TleRecord {
  std::string name;
  std::string line1;
  std::string line2;
  int catalog_number = 0;
  UtcInstant epoch{};
  double mean_motion_dot = 0.0;   // rev/day^2 (already halved in the file)
  double mean_motion_ddot = 0.0;  // rev/day^3
  double bstar = 0.0;
  double inclination_deg = 0.0;
  double raan_deg = 0.0;
  double eccentricity = 0.0;
  double arg_perigee_deg = 0.0;
  double mean_anomaly_deg = 0.0;
  double mean_motion = 0.0;
  int revolution_number = 0;
};

/// Modulo-10 checksum over the first 68 characters: digits count their value,
/// '-' counts one, everything else zero.
inline int tle_checksum(std::string_view line) {
  int sum = 0;
  const std::size_t n = line.size() < 68 ? line.size() : 68;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = line[i];
    if (c >= '0' && c <= '9') sum += c - '0';
    else if (c == '-') sum += 1;
  }
  return sum % 10;
}

namespace tle_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::string columns(int first, int last) {
  return "columns " + std::to_string(first) + "-" + std::to_string(last);
}

// Columns are 1-based and inclusive, as in the published format description.
inline std::string_view field(std::string_view line, int first, int last) {
  return line.substr(static_cast<std::size_t>(first - 1), static_cast<std::size_t>(last - first + 1));
}

inline Error malformed(std::string_view name, int first, int last) {
  return Error(ErrorCode::MalformedField, std::string(name) + " (" + columns(first, last) + ")");
}

inline double parse_double(std::string_view line, std::string_view name, int first, int last) {
  std::string_view s = trim(field(line, first, last));
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  // from_chars rejects a bare leading '.', which the format uses (" .00000023").
  std::string buf;
  if (!s.empty() && s.front() == '.') {
    buf = "0" + std::string(s);
  } else if (s.size() > 1 && s.front() == '-' && s[1] == '.') {
    buf = "-0" + std::string(s.substr(1));
  } else {
    buf = std::string(s);
  }
  const char* end = buf.data() + buf.size();
  auto [ptr, ec] = std::from_chars(buf.data(), end, value);
  if (buf.empty() || ec != std::errc{} || ptr != end) throw malformed(name, first, last);
  return value;
}

inline int parse_int(std::string_view line, std::string_view name, int first, int last) {
  std::string_view s = trim(field(line, first, last));
  if (s.empty()) return 0;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw malformed(name, first, last);
  return value;
}

/// "+12345-4" style: optional sign, five-digit mantissa with an implied
/// leading decimal point, signed single-digit exponent.
inline double parse_implied_exponent(std::string_view line, std::string_view name, int first, int last) {
  std::string_view s = trim(field(line, first, last));
  if (s.empty()) return 0.0;
  double sign = 1.0;
  if (s.front() == '-' || s.front() == '+') {
    if (s.front() == '-') sign = -1.0;
    s.remove_prefix(1);
  }
  const auto pos = s.find_last_of("+-");
  if (pos == std::string_view::npos || pos == 0 || pos + 1 >= s.size()) throw malformed(name, first, last);
  const std::string_view mantissa = trim(s.substr(0, pos));
  const std::string_view exponent = s.substr(pos);
  long long m = 0;
  int e = 0;
  auto [p1, ec1] = std::from_chars(mantissa.data(), mantissa.data() + mantissa.size(), m);
  auto [p2, ec2] = std::from_chars(exponent.data() + 1, exponent.data() + exponent.size(), e);
  if (ec1 != std::errc{} || p1 != mantissa.data() + mantissa.size() || ec2 != std::errc{} ||
      p2 != exponent.data() + exponent.size() || m < 0) {
    throw malformed(name, first, last);
  }
  if (exponent.front() == '-') e = -e;
  return sign * static_cast<double>(m) * std::pow(10.0, e - static_cast<int>(mantissa.size()));
}

inline void check_line(std::string_view line, char number, int line_no) {
  if (line.size() != 69) {
    throw Error(ErrorCode::MalformedField,
                "line " + std::to_string(line_no) + " length " + std::to_string(line.size()) + " (columns 1-69)");
  }
  if (line[0] != number || line[1] != ' ') throw malformed("line number", 1, 1);
  const char check = line[68];
  if (check < '0' || check > '9' || tle_checksum(line) != check - '0') {
    throw Error(ErrorCode::ChecksumMismatch, "line " + std::to_string(line_no));
  }
}

inline bool is_element_line(std::string_view line, char number) {
  return line.size() >= 2 && line[0] == number && line[1] == ' ';
}

inline TleRecord decode(std::string name, std::string_view l1, std::string_view l2, int first_line_no) {
  check_line(l1, '1', first_line_no);
  check_line(l2, '2', first_line_no + 1);

  TleRecord r;
  r.name = std::move(name);
  r.line1 = std::string(l1);
  r.line2 = std::string(l2);
  r.catalog_number = parse_int(l1, "catalog number", 3, 7);
  if (parse_int(l2, "catalog number", 3, 7) != r.catalog_number) throw malformed("catalog number", 3, 7);

  const int yy = parse_int(l1, "epoch year", 19, 20);
  const double doy = parse_double(l1, "epoch day", 21, 32);
  if (doy < 1.0 || doy >= 367.0) throw malformed("epoch day", 21, 32);
  const int year = yy < 57 ? 2000 + yy : 1900 + yy;
  const UtcInstant jan1{std::chrono::sys_days{std::chrono::year{year} / 1 / 1}};
  r.epoch = jan1 + std::chrono::nanoseconds{std::llround((doy - 1.0) * kSecondsPerDay * 1e9)};

  r.mean_motion_dot = parse_double(l1, "mean motion derivative", 34, 43);
  r.mean_motion_ddot = parse_implied_exponent(l1, "mean motion second derivative", 45, 52);
  r.bstar = parse_implied_exponent(l1, "bstar", 54, 61);

  r.inclination_deg = parse_double(l2, "inclination", 9, 16);
  r.raan_deg = parse_double(l2, "right ascension", 18, 25);
  const std::string_view ecc = field(l2, 27, 33);
  for (char c : ecc) {
    if (c < '0' || c > '9') throw malformed("eccentricity", 27, 33);
  }
  r.eccentricity = parse_double("0." + std::string(ecc), "eccentricity", 1, 9);
  r.arg_perigee_deg = parse_double(l2, "argument of perigee", 35, 42);
  r.mean_anomaly_deg = parse_double(l2, "mean anomaly", 44, 51);
  r.mean_motion = parse_double(l2, "mean motion", 53, 63);
  r.revolution_number = parse_int(l2, "revolution number", 64, 68);

  if (r.inclination_deg < 0.0 || r.inclination_deg > 180.0) throw malformed("inclination", 9, 16);
  if (r.mean_motion <= 0.0) throw malformed("mean motion", 53, 63);
  return r;
}

}  // namespace tle_detail

/// Parses a concatenation of 2-line or 3-line (named) element sets. Blank lines
/// are skipped; a name line may carry the "0 " prefix used by some catalogs.
inline std::vector<TleRecord> parse_tle(std::string_view text) {
  std::vector<std::string_view> lines;
  std::vector<int> numbers;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (tle_detail::trim(line).empty()) continue;
    lines.push_back(line);
    numbers.push_back(line_no);
  }

  std::vector<TleRecord> out;
  std::size_t i = 0;
  while (i < lines.size()) {
    std::string name;
    if (!tle_detail::is_element_line(lines[i], '1')) {
      if (tle_detail::is_element_line(lines[i], '2')) {
        throw Error(ErrorCode::TruncatedInput, "line 2 without line 1 at line " + std::to_string(numbers[i]));
      }
      std::string_view n = tle_detail::trim(lines[i]);
      if (n.size() > 2 && n[0] == '0' && n[1] == ' ') n = tle_detail::trim(n.substr(2));
      name = std::string(n);
      ++i;
    }
    if (i >= lines.size()) {
      throw Error(ErrorCode::TruncatedInput, "name without element lines at line " + std::to_string(numbers.back()));
    }
    if (i + 1 >= lines.size()) {
      throw Error(ErrorCode::TruncatedInput, "missing line 2 after line " + std::to_string(numbers[i]));
    }
    out.push_back(tle_detail::decode(std::move(name), lines[i], lines[i + 1], numbers[i]));
    i += 2;
  }
  return out;
}

}  // namespace leodop
