#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "leodop/ddop.hpp"
#include "leodop/error.hpp"
#include "leodop/pass.hpp"
#include "leodop/scenario.hpp"

namespace leodop {

/// Errors above this are reported clamped and flagged.
inline constexpr double kErrorClamp = 1e9;

enum class SweepStatus { Ok, Clamped, Singular, PassExceeded, NotVisible };

inline const char* status_name(SweepStatus s) {
  switch (s) {
    case SweepStatus::Ok: return "ok";
    case SweepStatus::Clamped: return "clamped";
    case SweepStatus::Singular: return "singular";
    case SweepStatus::PassExceeded: return "pass_exceeded";
    case SweepStatus::NotVisible: return "not_visible";
  }
  return "?";
}

/// One point of a sweep. Errors are theoretical 1-sigma values in metres
/// unless `confidence_scaled` is set (then 95% extents). Unusable geometries
/// keep their row with NaN values and a non-ok status.
struct SweepRecord {
  std::string parameter_name;
  double parameter_value = 0.0;
  std::string unit;
  double secondary_value = NAN;  // sampling interval of the offset sweep
  double along_error_m = NAN;
  double cross_error_m = NAN;
  double hddop = NAN;
  SweepStatus status = SweepStatus::Ok;
  std::vector<UtcInstant> epochs;  // observation epochs behind the row
};

struct GridRecord {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double along_error_m = NAN;
  double cross_error_m = NAN;
  double hddop = NAN;
  double track_distance_m = NAN;  // to the ground track, positive on the cross-axis side
  SweepStatus status = SweepStatus::Ok;
};

struct SweepOptions {
  bool confidence_scaled = false;  // report 95% extents instead of 1 sigma
  double confidence = 0.95;
};

namespace experiments_detail {

inline double clamp_error(double v, SweepStatus& status) {
  if (!std::isfinite(v) || v > kErrorClamp) {
    status = SweepStatus::Clamped;
    return kErrorClamp;
  }
  return v;
}

struct Point {
  double along = NAN;
  double cross = NAN;
  double hddop = NAN;
  SweepStatus status = SweepStatus::Ok;
};

/// Theoretical errors for one epoch set, never throwing on geometry.
inline Point evaluate(const Scenario& sc, const StateVector& truth, const std::vector<UtcInstant>& epochs,
                      const RtnFrame& rtn, const SweepOptions& opt, SweepStatus invisible_status) {
  Point p;
  for (std::size_t i = 1; i < epochs.size(); ++i) {
    if (!(epochs[i] > epochs[i - 1])) {
      p.status = SweepStatus::Singular;
      return p;
    }
  }
  try {
    const TheoryResult t = analyze_geometry(sc.orbit, truth, epochs, sc.solver, sc.noise.sigma_dopp, rtn, sc.mask_deg,
                                            opt.confidence);
    const double k = opt.confidence_scaled ? std::sqrt(chi2_2dof(opt.confidence)) : 1.0;
    p.hddop = t.ddop.hddop;
    p.along = clamp_error(k * t.ellipse.along_sigma, p.status);
    p.cross = clamp_error(k * t.ellipse.cross_sigma, p.status);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::WindowNotVisible: p.status = invisible_status; break;
      case ErrorCode::SingularGeometry:
      case ErrorCode::DegenerateCovariance: p.status = SweepStatus::Singular; break;
      case ErrorCode::EpochOutOfRange: p.status = invisible_status; break;
      default: throw;
    }
  }
  return p;
}

inline std::vector<UtcInstant> centred_epochs(UtcInstant centre, int count, double interval) {
  std::vector<UtcInstant> out;
  for (int j = 0; j < count; ++j) out.push_back(add_seconds(centre, (j - 0.5 * (count - 1)) * interval));
  return out;
}

inline SweepRecord record(std::string name, double value, std::string unit, const Point& p,
                          std::vector<UtcInstant> epochs) {
  SweepRecord r;
  r.epochs = std::move(epochs);
  r.parameter_name = std::move(name);
  r.parameter_value = value;
  r.unit = std::move(unit);
  r.along_error_m = p.along;
  r.cross_error_m = p.cross;
  r.hddop = p.hddop;
  r.status = p.status;
  return r;
}

}  // namespace experiments_detail

inline const std::vector<int> kDefaultCounts{4, 10, 20, 50, 100, 200, 350};

inline std::vector<double> default_intervals() { return {10, 20, 30, 40, 50, 60, 70, 80}; }

inline std::vector<double> default_offsets() {
  std::vector<double> v;
  for (int k = -15; k <= 15; ++k) v.push_back(10.0 * k);
  return v;
}

inline std::vector<double> default_max_elevations() {
  std::vector<double> v;
  for (int e = 10; e <= 90; e += 5) v.push_back(e);
  return v;
}

/// N epochs spread uniformly from the first to the last epoch of the scenario window.
inline std::vector<SweepRecord> sweep_observation_count(const Scenario& sc, const std::vector<int>& counts,
                                                        const SweepOptions& opt = {}) {
  const auto window = sc.epochs();
  const StateVector truth = sc.truth();
  for (const auto& t : window) {
    if (elevation_azimuth(enu_frame(sc.user), orbit_detail::kinematic_state(sc.orbit, t, truth.time_offset).position)
            .elevation_deg < sc.mask_deg) {
      throw Error(ErrorCode::WindowNotVisible, format_utc(t) + " is below the mask");
    }
  }
  const RtnFrame rtn = reference_rtn(sc.orbit, sc.user, window.front(), window.back(), sc.mask_deg);
  const double span = seconds_between(window.front(), window.back());
  std::vector<SweepRecord> out;
  for (int n : counts) {
    if (n < 4 || n > static_cast<int>(window.size())) {
      throw Error(ErrorCode::InvalidArgument,
                  "observation count " + std::to_string(n) + " outside [4, " + std::to_string(window.size()) + "]");
    }
    std::vector<UtcInstant> ep;
    for (int j = 0; j < n; ++j) ep.push_back(add_seconds(window.front(), span * j / (n - 1)));
    out.push_back(experiments_detail::record(
        "observations", n, "count",
        experiments_detail::evaluate(sc, truth, ep, rtn, opt, SweepStatus::NotVisible), ep));
  }
  return out;
}

/// Four observations from the window start, `interval` apart.
inline std::vector<SweepRecord> sweep_sampling_time(const Scenario& sc, const std::vector<double>& intervals_s,
                                                    const SweepOptions& opt = {}, int observations = 4) {
  const StateVector truth = sc.truth();
  const auto window = sc.epochs();
  const RtnFrame rtn = reference_rtn(sc.orbit, sc.user, window.front(), window.back(), sc.mask_deg);
  std::vector<SweepRecord> out;
  bool any_visible = false;
  for (double dt : intervals_s) {
    std::vector<UtcInstant> ep;
    for (int j = 0; j < observations; ++j) ep.push_back(add_seconds(sc.window_start, j * dt));
    auto p = experiments_detail::evaluate(sc, truth, ep, rtn, opt, SweepStatus::PassExceeded);
    any_visible = any_visible || p.status != SweepStatus::PassExceeded;
    out.push_back(experiments_detail::record("sampling_interval", dt, "s", p, ep));
  }
  if (!out.empty() && !any_visible) throw Error(ErrorCode::PassExceeded, "every sampling interval leaves the pass");
  return out;
}

/// Four equally spaced observations centred at closest approach + offset, for
/// every (interval, offset) pair; interval-major order.
inline std::vector<SweepRecord> sweep_window_offset(const Scenario& sc, const std::vector<double>& intervals_s,
                                                    const std::vector<double>& offsets_s, const SweepOptions& opt = {},
                                                    int observations = 4) {
  const StateVector truth = sc.truth();
  const auto window = sc.epochs();
  const UtcInstant ca = reference_epoch(sc.orbit, sc.user, window.front(), window.back(), sc.mask_deg);
  const RtnFrame rtn = rtn_frame(orbit_detail::kinematic_state(sc.orbit, ca, 0.0));
  std::vector<SweepRecord> out;
  bool any_visible = false;
  for (double dt : intervals_s) {
    for (double off : offsets_s) {
      const auto ep = experiments_detail::centred_epochs(add_seconds(ca, off), observations, dt);
      auto p = experiments_detail::evaluate(sc, truth, ep, rtn, opt, SweepStatus::PassExceeded);
      any_visible = any_visible || p.status != SweepStatus::PassExceeded;
      auto r = experiments_detail::record("window_offset", off, "s", p, ep);
      r.secondary_value = dt;
      out.push_back(r);
    }
  }
  if (!out.empty() && !any_visible) throw Error(ErrorCode::PassExceeded, "every window leaves the pass");
  return out;
}

struct InclinationOptions {
  double altitude_m = 715e3;
  UtcInstant reference_epoch{};
  double heading_deg = 0.0;
  double interval_s = 60.0;
  int observations = 4;
};

/// Synthetic passes reaching each requested maximum elevation, observed with
/// equally spaced epochs centred at closest approach.
inline std::vector<SweepRecord> sweep_inclination(const Scenario& sc, const std::vector<double>& max_elevations_deg,
                                                  const InclinationOptions& inc, const SweepOptions& opt = {}) {
  std::vector<SweepRecord> out;
  for (double target : max_elevations_deg) {
    if (!(target > sc.mask_deg)) {
      throw Error(ErrorCode::TargetUnreachable, "max elevation " + std::to_string(target) + " deg is not above the mask");
    }
    Scenario s = sc;
    s.orbit = synthesize_pass(sc.user, inc.altitude_m, target, inc.reference_epoch, inc.heading_deg, sc.mask_deg);
    const UtcInstant t0 = add_seconds(inc.reference_epoch, -600.0);
    const UtcInstant t1 = add_seconds(inc.reference_epoch, 600.0);
    const UtcInstant ca = closest_approach(s.orbit, s.user, t0, t1, s.mask_deg);
    const RtnFrame rtn = rtn_frame(orbit_detail::kinematic_state(s.orbit, ca, 0.0));
    const auto ep = experiments_detail::centred_epochs(ca, inc.observations, inc.interval_s);
    out.push_back(experiments_detail::record(
        "max_elevation", target, "deg",
        experiments_detail::evaluate(s, s.truth(), ep, rtn, opt, SweepStatus::PassExceeded), ep));
  }
  return out;
}

struct GridOptions {
  double lat_min = -5.0;  // relative to the scenario user, degrees
  double lat_max = 5.0;
  double lon_min = -5.0;
  double lon_max = 5.0;
  double step_deg = 0.5;
  int observations = 0;  // 0: the scenario window; otherwise centred on closest approach
  double interval_s = 60.0;
};

/// Ground-track samples (sub-satellite points, 1 s apart) over [t0, t1].
inline std::vector<Vec3> ground_track(const OrbitSource& orbit, UtcInstant t0, UtcInstant t1) {
  std::vector<Vec3> out;
  const double span = seconds_between(t0, t1);
  for (double x = 0.0; x <= span + 1e-9; x += 1.0) {
    const Vec3 p = orbit_detail::kinematic_state(orbit, t0, -x).position;
    GeodeticPosition g = ecef_to_geodetic(p);
    g.height_m = 0.0;
    out.push_back(geodetic_to_ecef(g));
  }
  return out;
}

/// Nearest point to `p` on the polyline through `track`.
inline Vec3 nearest_on_track(const Vec3& p, const std::vector<Vec3>& track) {
  if (track.empty()) throw Error(ErrorCode::InvalidArgument, "empty ground track");
  Vec3 best = track.front();
  for (std::size_t i = 0; i + 1 < track.size(); ++i) {
    const Vec3 ab = track[i + 1] - track[i];
    const double t = std::clamp((p - track[i]).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Vec3 q = track[i] + t * ab;
    if ((q - p).squaredNorm() < (best - p).squaredNorm()) best = q;
  }
  return best;
}

inline double distance_to_track(const Vec3& p, const std::vector<Vec3>& track) {
  return (nearest_on_track(p, track) - p).norm();
}

/// Theoretical errors for users on a latitude/longitude grid around the
/// scenario user. The observation epochs are the same for every node: the
/// scenario window, or `observations` epochs centred on the scenario user's
/// closest approach. Nodes that do not see every epoch are kept with status
/// not_visible.
inline std::vector<GridRecord> sweep_user_grid(const Scenario& sc, const GridOptions& g, const SweepOptions& opt = {}) {
  if (!(g.step_deg > 0.0) || g.lat_max < g.lat_min || g.lon_max < g.lon_min) {
    throw Error(ErrorCode::InvalidArgument, "grid ranges must be ordered and the step positive");
  }
  const auto window = sc.epochs();
  const UtcInstant ca = reference_epoch(sc.orbit, sc.user, window.front(), window.back(), sc.mask_deg);
  if (g.observations != 0 && (g.observations < 4 || !(g.interval_s > 0.0))) {
    throw Error(ErrorCode::InvalidArgument, "grid sampling needs >= 4 observations and a positive interval");
  }
  const auto ep = g.observations == 0 ? window : experiments_detail::centred_epochs(ca, g.observations, g.interval_s);
  const auto track = ground_track(sc.orbit, add_seconds(ca, -600.0), add_seconds(ca, 600.0));
  const RtnFrame ca_rtn = rtn_frame(orbit_detail::kinematic_state(sc.orbit, ca, 0.0));

  const int nlat = static_cast<int>(std::floor((g.lat_max - g.lat_min) / g.step_deg + 1e-9)) + 1;
  const int nlon = static_cast<int>(std::floor((g.lon_max - g.lon_min) / g.step_deg + 1e-9)) + 1;
  std::vector<GridRecord> out;
  out.reserve(static_cast<std::size_t>(nlat * nlon));
  bool any_visible = false;
  for (int i = 0; i < nlat; ++i) {
    for (int j = 0; j < nlon; ++j) {
      GridRecord rec;
      rec.latitude_deg = sc.user.latitude_deg + g.lat_min + i * g.step_deg;
      rec.longitude_deg = sc.user.longitude_deg + g.lon_min + j * g.step_deg;
      Scenario node = sc;
      node.user = {rec.latitude_deg, rec.longitude_deg, sc.user.height_m};
      GeodeticPosition ground = node.user;
      ground.height_m = 0.0;
      const Vec3 foot = geodetic_to_ecef(ground);
      const Vec3 nearest = nearest_on_track(foot, track);
      const EnuFrame enu = enu_frame(node.user);
      RtnFrame rtn = ca_rtn;
      try {
        rtn = rtn_frame(orbit_detail::kinematic_state(
            sc.orbit, reference_epoch(sc.orbit, node.user, ep.front(), ep.back(), -90.0), 0.0));
      } catch (const Error&) {
      }
      rec.track_distance_m = (foot - nearest).norm();
      if (enu.horizontal(foot - nearest).dot(track_axes(rtn, enu).cross) < 0.0) rec.track_distance_m *= -1.0;
      const auto p = experiments_detail::evaluate(node, node.truth(), ep, rtn, opt, SweepStatus::NotVisible);
      rec.along_error_m = p.along;
      rec.cross_error_m = p.cross;
      rec.hddop = p.hddop;
      rec.status = p.status;
      any_visible = any_visible || p.status != SweepStatus::NotVisible;
      out.push_back(rec);
    }
  }
  if (!any_visible) throw Error(ErrorCode::EmptyGrid, "no grid node sees the pass");
  return out;
}

}  // namespace leodop
