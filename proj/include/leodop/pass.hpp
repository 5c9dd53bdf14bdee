#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "leodop/error.hpp"
#include "leodop/geometry.hpp"
#include "leodop/orbit.hpp"

namespace leodop {

/// Default visibility floor.
inline constexpr double kDefaultMaskDeg = 5.0;

struct ElevationPeak {
  UtcInstant epoch{};
  double elevation_deg = 0.0;
};

namespace pass_detail {

/// Minimises f on [a, b] by golden-section search down to `tol`.
inline double golden_minimize(const std::function<double(double)>& f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

struct Samples {
  std::vector<double> offsets;  // seconds after t0
  std::vector<double> range;
  std::vector<double> elevation;
};

inline Samples scan(const OrbitSource& source, const EnuFrame& user, UtcInstant t0, UtcInstant t1) {
  const double span = seconds_between(t0, t1);
  if (!(span > 0.0)) throw Error(ErrorCode::InvalidArgument, "search window must have positive length");
  Samples s;
  const int n = static_cast<int>(std::floor(span));
  for (int k = 0; k <= n + 1; ++k) {
    const double x = k <= n ? static_cast<double>(k) : span;
    if (k == n + 1 && x == static_cast<double>(n)) break;
    const Vec3 p = orbit_detail::kinematic_state(source, t0, -x).position;
    s.offsets.push_back(x);
    s.range.push_back((p - user.origin_ecef).norm());
    s.elevation.push_back(elevation_azimuth(user, p).elevation_deg);
  }
  return s;
}

}  // namespace pass_detail

/// Epoch of minimum satellite-user range inside [t0, t1]: 1 s scan, then
/// golden-section refinement. The window must hold exactly one interior range
/// minimum and the satellite must rise above the mask.
inline UtcInstant closest_approach(const OrbitSource& source, const GeodeticPosition& user, UtcInstant t0,
                                   UtcInstant t1, double mask_deg = kDefaultMaskDeg) {
  const EnuFrame frame = enu_frame(user);
  const auto s = pass_detail::scan(source, frame, t0, t1);
  double best_el = -90.0;
  for (double e : s.elevation) best_el = std::max(best_el, e);
  if (best_el < mask_deg) throw Error(ErrorCode::NoPassInWindow, "satellite never rises above the mask");

  std::vector<std::size_t> minima;
  for (std::size_t k = 1; k + 1 < s.range.size(); ++k) {
    if (s.range[k] < s.range[k - 1] && s.range[k] <= s.range[k + 1]) minima.push_back(k);
  }
  if (minima.size() > 1) throw Error(ErrorCode::MultipleMinima, "window spans more than one range minimum");
  if (minima.empty()) throw Error(ErrorCode::NoPassInWindow, "range minimum lies on the window boundary");

  const std::size_t k = minima.front();
  auto range_at = [&](double x) {
    return (orbit_detail::kinematic_state(source, t0, -x).position - frame.origin_ecef).norm();
  };
  const double x = pass_detail::golden_minimize(range_at, s.offsets[k - 1], s.offsets[k + 1], 1e-4);
  return add_seconds(t0, x);
}

/// Highest elevation reached inside [t0, t1].
inline ElevationPeak max_elevation(const OrbitSource& source, const GeodeticPosition& user, UtcInstant t0,
                                   UtcInstant t1, double mask_deg = kDefaultMaskDeg) {
  const EnuFrame frame = enu_frame(user);
  const auto s = pass_detail::scan(source, frame, t0, t1);
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.elevation.size(); ++k) {
    if (s.elevation[k] > s.elevation[best]) best = k;
  }
  if (s.elevation[best] < mask_deg) throw Error(ErrorCode::NoPassInWindow, "satellite never rises above the mask");

  int peaks = 0;
  for (std::size_t k = 1; k + 1 < s.elevation.size(); ++k) {
    if (s.elevation[k] >= mask_deg && s.elevation[k] > s.elevation[k - 1] && s.elevation[k] >= s.elevation[k + 1]) {
      ++peaks;
    }
  }
  if (peaks > 1) throw Error(ErrorCode::MultipleMinima, "window spans more than one visible pass");

  if (best == 0 || best + 1 == s.elevation.size()) return {add_seconds(t0, s.offsets[best]), s.elevation[best]};
  auto neg_el = [&](double x) {
    return -elevation_azimuth(frame, orbit_detail::kinematic_state(source, t0, -x).position).elevation_deg;
  };
  const double x = pass_detail::golden_minimize(neg_el, s.offsets[best - 1], s.offsets[best + 1], 1e-4);
  return {add_seconds(t0, x), -neg_el(x)};
}

/// Builds a synthetic circular pass over `user` whose maximum elevation is
/// `max_elevation_target_deg` (to within 0.5 deg), by bisecting on the lateral
/// ground-track offset. A 90 deg target gives the overhead pass (zero offset).
inline OrbitSource synthesize_pass(const GeodeticPosition& user, double altitude_m, double max_elevation_target_deg,
                                   UtcInstant reference_epoch, double heading_deg = 0.0,
                                   double mask_deg = kDefaultMaskDeg) {
  if (!(max_elevation_target_deg > 0.0 && max_elevation_target_deg <= 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "max elevation target must lie in (0, 90] deg");
  }
  if (max_elevation_target_deg < mask_deg) {
    throw Error(ErrorCode::TargetUnreachable, "target max elevation is below the mask angle");
  }
  SyntheticCircular orbit{user, altitude_m, 0.0, heading_deg, reference_epoch};
  if (max_elevation_target_deg >= 90.0) return OrbitSource::synthetic(orbit);

  const UtcInstant t0 = add_seconds(reference_epoch, -900.0);
  const UtcInstant t1 = add_seconds(reference_epoch, 900.0);
  auto peak_for = [&](double offset) {
    SyntheticCircular trial = orbit;
    trial.ground_track_offset_m = offset;
    try {
      return max_elevation(OrbitSource::synthetic(trial), user, t0, t1, -90.0).elevation_deg;
    } catch (const Error&) {
      return -90.0;
    }
  };
  if (peak_for(0.0) <= max_elevation_target_deg) return OrbitSource::synthetic(orbit);

  // Offset at which the satellite just grazes the horizon.
  double hi = std::acos(kEarthRadiusMean / orbit.radius()) * kEarthRadiusMean;
  double lo = 0.0;
  for (int i = 0; i < 60 && hi - lo > 1.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (peak_for(mid) > max_elevation_target_deg) lo = mid;
    else hi = mid;
  }
  orbit.ground_track_offset_m = 0.5 * (lo + hi);
  return OrbitSource::synthetic(orbit);
}

}  // namespace leodop
