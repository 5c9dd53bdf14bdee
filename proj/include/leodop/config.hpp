#pragma once

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "leodop/error.hpp"
#include "leodop/scenario.hpp"
#include "leodop/tle.hpp"

namespace leodop {

/// Keys accepted in scenario files, with their defaults ("" = required or
/// conditional).
inline const std::vector<std::pair<std::string, std::string>>& scenario_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"orbit.kind", "tle"},
      {"orbit.tle_file", ""},
      {"orbit.satellite", ""},
      {"orbit.synthetic.altitude_m", "715000"},
      {"orbit.synthetic.max_elevation_deg", ""},
      {"orbit.synthetic.ground_track_offset_m", ""},
      {"orbit.synthetic.heading_deg", "0"},
      {"orbit.synthetic.reference_epoch", ""},
      {"user.latitude_deg", ""},
      {"user.longitude_deg", ""},
      {"user.height_m", "0"},
      {"window.start", ""},
      {"window.duration_s", "350"},
      {"window.period_s", "1"},
      {"noise.sigma_dopp_mps", "0.5"},
      {"noise.elevation_scaled", "true"},
      {"noise.seed", "1"},
      {"solver.max_iterations", "25"},
      {"solver.step_tolerance", "1e-4"},
      {"solver.mode", "horizontal4"},
      {"solver.vertical", "local_up"},
      {"carrier_wavelength_m", "2.1882661167883213"},
      {"mask_deg", "5"},
      {"truth.clock_drift_mps", "0"},
      {"truth.time_offset_s", "0"},
      {"montecarlo.trials", "1000"},
  };
  return keys;
}

namespace config_detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Closest known key, comparing against both the full key and its dotted parts.
inline std::string suggest(const std::string& key) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& [k, _] : scenario_keys()) {
    std::size_t d = edit_distance(key, k);
    std::string flat = k;
    std::replace(flat.begin(), flat.end(), '.', '_');
    d = std::min(d, edit_distance(key, flat));
    // Abbreviation-friendly: "users_lat" vs "user.latitude_deg".
    std::string prefix = flat.substr(0, std::min(flat.size(), key.size()));
    d = std::min(d, edit_distance(key, prefix) + 1);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

class Values {
 public:
  explicit Values(std::map<std::string, std::string> v) : v_(std::move(v)) {}

  bool has(const std::string& key) const { return v_.count(key) > 0; }

  std::string text(const std::string& key) const {
    const auto it = v_.find(key);
    if (it == v_.end()) throw Error(ErrorCode::ValidationError, key + ": required key is missing");
    return it->second;
  }

  double number(const std::string& key) const {
    const std::string s = text(key);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::ValidationError, key + ": '" + s + "' is not a number");
    }
    return v;
  }

  long long integer(const std::string& key) const {
    const std::string s = text(key);
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw Error(ErrorCode::ValidationError, key + ": '" + s + "' is not an integer");
    }
    return v;
  }

  bool flag(const std::string& key) const {
    std::string s = text(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw Error(ErrorCode::ValidationError, key + ": '" + s + "' is not a boolean");
  }

 private:
  std::map<std::string, std::string> v_;
};

}  // namespace config_detail

struct LoadedScenario {
  Scenario scenario;
  std::vector<std::string> defaults_applied;  // "key = value" for omitted optional keys
  std::string tle_path;                       // resolved TLE file, if any
};

/// Parses flat "key = value" text ('#' starts a comment). `base_dir` resolves
/// a relative orbit.tle_file.
inline LoadedScenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {}) {
  std::map<std::string, std::string> raw;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::set<std::string> known;
  for (const auto& [k, _] : scenario_keys()) known.insert(k);
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = config_detail::trim(line.substr(0, eq));
    const std::string value = config_detail::trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
    if (!known.count(key)) {
      throw Error(ErrorCode::UnknownKey, "line " + std::to_string(line_no) + ": unknown key '" + key +
                                             "' (did you mean '" + config_detail::suggest(key) + "'?)");
    }
    if (raw.count(key)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": key '" + key + "' given twice");
    }
    if (value.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": key '" + key + "' has no value");
    raw[key] = value;
  }

  LoadedScenario out;
  const bool synthetic = raw.count("orbit.kind") && raw.at("orbit.kind") == "synthetic";
  for (const auto& [k, def] : scenario_keys()) {
    if (!synthetic && k.rfind("orbit.synthetic.", 0) == 0) continue;
    if (!raw.count(k) && !def.empty()) {
      raw[k] = def;
      out.defaults_applied.push_back(k + " = " + def);
    }
  }
  const config_detail::Values v(raw);
  Scenario& s = out.scenario;

  s.user.latitude_deg = v.number("user.latitude_deg");
  s.user.longitude_deg = v.number("user.longitude_deg");
  s.user.height_m = v.number("user.height_m");
  if (s.user.latitude_deg < -90.0 || s.user.latitude_deg > 90.0) {
    throw Error(ErrorCode::ValidationError, "user.latitude_deg: must lie in [-90, 90]");
  }
  if (s.user.longitude_deg < -180.0 || s.user.longitude_deg > 180.0) {
    throw Error(ErrorCode::ValidationError, "user.longitude_deg: must lie in [-180, 180]");
  }
  if (s.user.height_m < -500.0 || s.user.height_m > 10000.0) {
    throw Error(ErrorCode::ValidationError, "user.height_m: must lie in [-500, 10000]");
  }

  try {
    s.window_start = parse_utc(v.text("window.start"));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ValidationError, "window.start: " + std::string(e.what()));
  }
  s.duration_s = v.number("window.duration_s");
  s.period_s = v.number("window.period_s");
  if (!(s.duration_s > 0.0)) throw Error(ErrorCode::ValidationError, "window.duration_s: must be positive");
  if (!(s.period_s > 0.0)) throw Error(ErrorCode::ValidationError, "window.period_s: must be positive");

  s.noise.sigma_dopp = v.number("noise.sigma_dopp_mps");
  if (s.noise.sigma_dopp < 0.0) throw Error(ErrorCode::ValidationError, "noise.sigma_dopp_mps: must be >= 0");
  s.noise.elevation_scaled = v.flag("noise.elevation_scaled");
  const long long seed = v.integer("noise.seed");
  if (seed < 0) throw Error(ErrorCode::ValidationError, "noise.seed: must be >= 0");
  s.noise.seed = static_cast<std::uint64_t>(seed);

  const long long iters = v.integer("solver.max_iterations");
  if (iters < 1) throw Error(ErrorCode::ValidationError, "solver.max_iterations: must be >= 1");
  s.solver.max_iterations = static_cast<int>(iters);
  s.solver.step_tolerance = v.number("solver.step_tolerance");
  if (!(s.solver.step_tolerance > 0.0)) throw Error(ErrorCode::ValidationError, "solver.step_tolerance: must be positive");
  const std::string mode = v.text("solver.mode");
  if (mode == "horizontal4") s.solver.mode = SolverMode::Horizontal4State;
  else if (mode == "full5") s.solver.mode = SolverMode::Full5State;
  else throw Error(ErrorCode::ValidationError, "solver.mode: expected horizontal4 or full5, got '" + mode + "'");
  const std::string vertical = v.text("solver.vertical");
  if (vertical == "local_up") s.solver.vertical = VerticalConstraint::LocalUp;
  else if (vertical == "ecef_z") s.solver.vertical = VerticalConstraint::EcefZ;
  else throw Error(ErrorCode::ValidationError, "solver.vertical: expected local_up or ecef_z, got '" + vertical + "'");

  s.carrier_wavelength = v.number("carrier_wavelength_m");
  if (!(s.carrier_wavelength > 0.0)) throw Error(ErrorCode::ValidationError, "carrier_wavelength_m: must be positive");
  s.mask_deg = v.number("mask_deg");
  if (s.mask_deg < 0.0 || s.mask_deg >= 90.0) throw Error(ErrorCode::ValidationError, "mask_deg: must lie in [0, 90)");
  s.true_clock_drift_mps = v.number("truth.clock_drift_mps");
  s.true_time_offset_s = v.number("truth.time_offset_s");
  if (!(std::abs(s.true_time_offset_s) < kMaxTimeOffset)) {
    throw Error(ErrorCode::ValidationError, "truth.time_offset_s: must lie in (-10, 10)");
  }
  const long long trials = v.integer("montecarlo.trials");
  if (trials < 2) throw Error(ErrorCode::ValidationError, "montecarlo.trials: must be >= 2");
  s.trials = static_cast<int>(trials);

  const std::string kind = v.text("orbit.kind");
  if (kind == "tle") {
    if (!v.has("orbit.tle_file")) throw Error(ErrorCode::ValidationError, "orbit.tle_file: required when orbit.kind = tle");
    std::filesystem::path p = v.text("orbit.tle_file");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    std::ifstream f(p);
    if (!f) throw Error(ErrorCode::ValidationError, "orbit.tle_file: cannot read '" + p.string() + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    const auto records = parse_tle(buf.str());
    if (records.empty()) throw Error(ErrorCode::ValidationError, "orbit.tle_file: no element sets in '" + p.string() + "'");
    const TleRecord* chosen = &records.front();
    if (v.has("orbit.satellite")) {
      const std::string want = v.text("orbit.satellite");
      chosen = nullptr;
      for (const auto& r : records) {
        if (r.name == want || std::to_string(r.catalog_number) == want) {
          chosen = &r;
          break;
        }
      }
      if (!chosen) throw Error(ErrorCode::ValidationError, "orbit.satellite: '" + want + "' not found in " + p.string());
    }
    s.orbit = OrbitSource::from_tle(*chosen);
    out.tle_path = p.string();
  } else if (kind == "synthetic") {
    SyntheticCircular orbit;
    orbit.anchor = s.user;
    orbit.altitude_m = v.number("orbit.synthetic.altitude_m");
    if (orbit.altitude_m < 300e3 || orbit.altitude_m > 2000e3) {
      throw Error(ErrorCode::ValidationError, "orbit.synthetic.altitude_m: must lie in [300e3, 2000e3]");
    }
    orbit.heading_deg = v.number("orbit.synthetic.heading_deg");
    orbit.reference_epoch = v.has("orbit.synthetic.reference_epoch")
                                ? parse_utc(v.text("orbit.synthetic.reference_epoch"))
                                : add_seconds(s.window_start, 0.5 * (s.duration_s - s.period_s));
    const bool by_elevation = v.has("orbit.synthetic.max_elevation_deg");
    const bool by_offset = v.has("orbit.synthetic.ground_track_offset_m");
    if (by_elevation == by_offset) {
      throw Error(ErrorCode::ValidationError,
                  "orbit.synthetic: give exactly one of max_elevation_deg and ground_track_offset_m");
    }
    if (by_offset) {
      orbit.ground_track_offset_m = v.number("orbit.synthetic.ground_track_offset_m");
      s.orbit = OrbitSource::synthetic(orbit);
    } else {
      s.orbit = synthesize_pass(s.user, orbit.altitude_m, v.number("orbit.synthetic.max_elevation_deg"),
                                orbit.reference_epoch, orbit.heading_deg, s.mask_deg);
    }
  } else {
    throw Error(ErrorCode::ValidationError, "orbit.kind: expected tle or synthetic, got '" + kind + "'");
  }
  return out;
}

/// Scenario search: the path as given, then relative to $LEODOP_SCENARIO_DIR.
inline std::filesystem::path resolve_scenario_path(const std::string& path) {
  namespace fs = std::filesystem;
  const char* dir = std::getenv("LEODOP_SCENARIO_DIR");
  if (path.empty()) {
    if (dir && *dir) return fs::path(dir) / "default.cfg";
    throw Error(ErrorCode::InvalidArgument, "no --scenario given and LEODOP_SCENARIO_DIR is unset");
  }
  fs::path p(path);
  if (fs::exists(p) || p.is_absolute() || !dir || !*dir) return p;
  return fs::path(dir) / p;
}

inline LoadedScenario load_scenario(const std::string& path) {
  const auto p = resolve_scenario_path(path);
  std::ifstream f(p);
  if (!f) throw Error(ErrorCode::ValidationError, "cannot read scenario file '" + p.string() + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str(), p.parent_path());
}

}  // namespace leodop
