#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "leodop/error.hpp"
#include "leodop/geometry.hpp"
#include "leodop/sgp4.hpp"
#include "leodop/time.hpp"
#include "leodop/tle.hpp"

namespace leodop {

inline constexpr double kMu = 3.986004418e14;        // m^3/s^2
inline constexpr double kEarthRadiusMean = 6371e3;   // m, spherical Earth
inline constexpr double kSpeedOfLight = 299792458.0; // m/s

/// Propagation further than this from the element epoch is refused.
inline constexpr double kMaxTleAgeSeconds = 7.0 * kSecondsPerDay;
/// Step of the central difference used to obtain acceleration from velocity.
inline constexpr double kAccelerationStep = 0.5;
/// Largest accepted along-track time offset.
inline constexpr double kMaxTimeOffset = 10.0;

struct TlePropagated {
  TleRecord tle;
  Sgp4 model;

  explicit TlePropagated(TleRecord record) : tle(std::move(record)), model(tle) {}
};

/// Two-body circular orbit passing near an anchor user. At `reference_epoch`
/// the satellite is at its closest point to the anchor (in the inertial frame
/// that coincides with the Earth-fixed frame at that instant), moving along
/// `heading_deg` (azimuth, clockwise from north). The ground track is displaced
/// by `ground_track_offset_m` (great-circle distance on the 6371 km sphere) to
/// the right of the direction of motion; a negative value puts it on the left.
struct SyntheticCircular {
  GeodeticPosition anchor;
  double altitude_m = 715e3;
  double ground_track_offset_m = 0.0;
  double heading_deg = 0.0;
  UtcInstant reference_epoch{};

  double radius() const { return kEarthRadiusMean + altitude_m; }
  double mean_motion() const { return std::sqrt(kMu / (radius() * radius() * radius())); }
  double period() const { return 2.0 * std::numbers::pi / mean_motion(); }
  /// Tilt of the orbital plane away from the anchor's local vertical plane.
  double inclination_to_user_deg() const { return ground_track_offset_m / kEarthRadiusMean / kDeg; }
};

struct InertialState {
  Vec3 position;
  Vec3 velocity;
};

/// State of a synthetic orbit at `tau` seconds after its reference epoch, in
/// the non-rotating frame aligned with the Earth-fixed frame at tau = 0.
inline InertialState inertial_state(const SyntheticCircular& orbit, double tau) {
  if (orbit.altitude_m < 300e3 || orbit.altitude_m > 2000e3) {
    throw Error(ErrorCode::InvalidArgument, "synthetic altitude must lie in [300, 2000] km");
  }
  const Vec3 anchor = geodetic_to_ecef(orbit.anchor);
  const Vec3 u = anchor.normalized();
  Vec3 north = Vec3::UnitZ() - u.z() * u;
  if (north.norm() < 1e-12) north = Vec3::UnitX() - u.x() * u;
  north.normalize();
  const Vec3 east = north.cross(u);
  const double az = orbit.heading_deg * kDeg;
  const Vec3 heading = std::cos(az) * north + std::sin(az) * east;
  const Vec3 right = heading.cross(u);
  const double beta = orbit.ground_track_offset_m / kEarthRadiusMean;
  const Vec3 closest = std::cos(beta) * u + std::sin(beta) * right;

  const double a = orbit.radius();
  const double n = orbit.mean_motion();
  const double c = std::cos(n * tau);
  const double s = std::sin(n * tau);
  return {a * (c * closest + s * heading), a * n * (-s * closest + c * heading)};
}

/// Where a satellite comes from: an element set propagated with SGP4, or a
/// synthetic circular pass.
class OrbitSource {
 public:
  using Variant = std::variant<TlePropagated, SyntheticCircular>;

  static OrbitSource from_tle(TleRecord tle) { return OrbitSource(Variant{std::in_place_type<TlePropagated>, std::move(tle)}); }
  static OrbitSource synthetic(SyntheticCircular orbit) { return OrbitSource(Variant{orbit}); }

  const Variant& variant() const { return v_; }
  bool is_tle() const { return std::holds_alternative<TlePropagated>(v_); }
  const SyntheticCircular* synthetic_orbit() const { return std::get_if<SyntheticCircular>(&v_); }
  const TlePropagated* tle() const { return std::get_if<TlePropagated>(&v_); }

  std::string describe() const {
    if (const auto* t = tle()) return "TLE " + (t->tle.name.empty() ? std::to_string(t->tle.catalog_number) : t->tle.name);
    return "synthetic circular orbit";
  }

 private:
  explicit OrbitSource(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

namespace orbit_detail {

/// Frame rotation about z by `angle`.
inline Eigen::Matrix3d rot3(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d m;
  m << c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0;
  return m;
}

/// Earth-fixed position and velocity at t - offset_s (no acceleration).
inline SatelliteState kinematic_state(const OrbitSource& source, UtcInstant t, double offset_s) {
  const Vec3 omega(0.0, 0.0, wgs84::kEarthRate);
  SatelliteState out;
  out.epoch = t;
  if (const auto* tp = source.tle()) {
    const double dt = seconds_between(tp->tle.epoch, t) - offset_s;
    if (std::abs(dt) > kMaxTleAgeSeconds) {
      throw Error(ErrorCode::EpochOutOfRange, format_utc(t) + " is more than 7 days from the element epoch " +
                                                  format_utc(tp->tle.epoch));
    }
    const TemeState teme = tp->model.propagate_minutes(dt / 60.0);
    const Eigen::Matrix3d r = rot3(gmst_rad(t, offset_s));
    out.position = r * teme.position_km * 1e3;
    out.velocity = r * teme.velocity_kmps * 1e3 - omega.cross(out.position);
  } else {
    const auto& orbit = *source.synthetic_orbit();
    const double tau = seconds_between(orbit.reference_epoch, t) - offset_s;
    const InertialState in = inertial_state(orbit, tau);
    const Eigen::Matrix3d r = rot3(wgs84::kEarthRate * tau);
    out.position = r * in.position;
    out.velocity = r * in.velocity - omega.cross(out.position);
  }
  return out;
}

inline SatelliteState full_state(const OrbitSource& source, UtcInstant t, double offset_s) {
  SatelliteState s = kinematic_state(source, t, offset_s);
  const Vec3 ahead = kinematic_state(source, t, offset_s - kAccelerationStep).velocity;
  const Vec3 behind = kinematic_state(source, t, offset_s + kAccelerationStep).velocity;
  s.acceleration = (ahead - behind) / (2.0 * kAccelerationStep);
  s.has_acceleration = true;
  return s;
}

}  // namespace orbit_detail

/// Earth-fixed state at t. SGP4 output is rotated from TEME by GMST only.
/// Acceleration is the central difference of velocity over +-0.5 s.
inline SatelliteState propagate(const OrbitSource& source, UtcInstant t) {
  return orbit_detail::full_state(source, t, 0.0);
}

/// State at t - delta_c; the returned epoch is still t.
inline SatelliteState propagate_with_offset(const OrbitSource& source, UtcInstant t, double delta_c) {
  if (!(std::abs(delta_c) < kMaxTimeOffset)) {
    throw Error(ErrorCode::InvalidArgument, "time offset " + std::to_string(delta_c) + " s outside (-10, 10)");
  }
  return orbit_detail::full_state(source, t, delta_c);
}

}  // namespace leodop
