#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "leodop/error.hpp"
#include "leodop/time.hpp"

namespace leodop {

using Vec3 = Eigen::Vector3d;

inline constexpr double kDeg = std::numbers::pi / 180.0;

namespace wgs84 {
inline constexpr double kSemiMajor = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kSemiMinor = kSemiMajor * (1.0 - kFlattening);
inline constexpr double kEcc2 = kFlattening * (2.0 - kFlattening);
inline constexpr double kEarthRate = 7.2921151467e-5;  // rad/s
}  // namespace wgs84

/// Satellite position/velocity/acceleration in the Earth-fixed frame (m, m/s, m/s^2).
struct SatelliteState {
  UtcInstant epoch{};
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  bool has_acceleration = false;
};

/// Latitude/longitude in degrees, height in metres above the WGS-84 ellipsoid.
struct GeodeticPosition {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double height_m = 0.0;
};

inline Vec3 geodetic_to_ecef(const GeodeticPosition& g) {
  const double lat = g.latitude_deg * kDeg;
  const double lon = g.longitude_deg * kDeg;
  const double sl = std::sin(lat);
  const double cl = std::cos(lat);
  const double n = wgs84::kSemiMajor / std::sqrt(1.0 - wgs84::kEcc2 * sl * sl);
  return {(n + g.height_m) * cl * std::cos(lon), (n + g.height_m) * cl * std::sin(lon),
          (n * (1.0 - wgs84::kEcc2) + g.height_m) * sl};
}

/// Iterative inverse of geodetic_to_ecef; latitude converges to 1e-12 rad.
/// Points closer than 6300 km to the geocentre are rejected.
inline GeodeticPosition ecef_to_geodetic(const Vec3& p) {
  if (p.norm() < 6.3e6) {
    throw Error(ErrorCode::NearSingularOrigin, "point is " + std::to_string(p.norm()) + " m from the geocentre");
  }
  const double rho = std::hypot(p.x(), p.y());
  const double lon = std::atan2(p.y(), p.x());
  double lat = std::atan2(p.z(), rho * (1.0 - wgs84::kEcc2));
  for (int i = 0; i < 30; ++i) {
    const double sl = std::sin(lat);
    const double n = wgs84::kSemiMajor / std::sqrt(1.0 - wgs84::kEcc2 * sl * sl);
    const double next = std::atan2(p.z() + wgs84::kEcc2 * n * sl, rho);
    const double delta = std::abs(next - lat);
    lat = next;
    if (delta < 1e-14) break;
  }
  const double sl = std::sin(lat);
  const double h = rho * std::cos(lat) + p.z() * sl - wgs84::kSemiMajor * std::sqrt(1.0 - wgs84::kEcc2 * sl * sl);
  return {lat / kDeg, lon / kDeg, h};
}

/// Local east-north-up frame anchored at a point; `up` is the ellipsoid normal.
struct EnuFrame {
  Vec3 origin_ecef = Vec3::Zero();
  Vec3 east = Vec3::UnitY();
  Vec3 north = Vec3::UnitZ();
  Vec3 up = Vec3::UnitX();

  /// Rows east, north, up.
  Eigen::Matrix3d rotation() const {
    Eigen::Matrix3d r;
    r.row(0) = east.transpose();
    r.row(1) = north.transpose();
    r.row(2) = up.transpose();
    return r;
  }

  Vec3 to_enu(const Vec3& ecef_vector) const { return rotation() * ecef_vector; }
  Vec3 horizontal(const Vec3& v) const { return v - v.dot(up) * up; }
};

inline EnuFrame enu_frame(const GeodeticPosition& g) {
  const double lat = g.latitude_deg * kDeg;
  const double lon = g.longitude_deg * kDeg;
  EnuFrame f;
  f.origin_ecef = geodetic_to_ecef(g);
  f.east = Vec3(-std::sin(lon), std::cos(lon), 0.0);
  f.north = Vec3(-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat));
  f.up = Vec3(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
  return f;
}

inline EnuFrame enu_frame(const Vec3& origin_ecef) { return enu_frame(ecef_to_geodetic(origin_ecef)); }

struct LookAngles {
  double elevation_deg = 0.0;
  double azimuth_deg = 0.0;  // clockwise from north, [0, 360); 0 at zenith
};

inline LookAngles elevation_azimuth(const EnuFrame& frame, const Vec3& sat_ecef) {
  const Vec3 los = frame.to_enu(sat_ecef - frame.origin_ecef);
  const double range = los.norm();
  if (range == 0.0) throw Error(ErrorCode::CoincidentPoints, "satellite coincides with user");
  LookAngles out;
  out.elevation_deg = std::asin(std::clamp(los.z() / range, -1.0, 1.0)) / kDeg;
  const double horiz = std::hypot(los.x(), los.y());
  if (horiz > 1e-12 * range) {
    double az = std::atan2(los.x(), los.y()) / kDeg;
    if (az < 0.0) az += 360.0;
    if (az >= 360.0) az = 0.0;
    out.azimuth_deg = az;
  }
  return out;
}

inline LookAngles elevation_azimuth(const Vec3& user_ecef, const Vec3& sat_ecef) {
  return elevation_azimuth(enu_frame(user_ecef), sat_ecef);
}

/// Radial / transverse (along-track) / normal (cross-track) triad.
struct RtnFrame {
  Vec3 r_axis = Vec3::UnitX();
  Vec3 t_axis = Vec3::UnitY();
  Vec3 n_axis = Vec3::UnitZ();
};

inline RtnFrame rtn_frame(const Vec3& position, const Vec3& velocity) {
  const Vec3 h = position.cross(velocity);
  const double scale = position.norm() * velocity.norm();
  if (scale == 0.0 || h.norm() < 1e-3 * scale) {
    throw Error(ErrorCode::DegenerateState, "position and velocity are (nearly) parallel or zero");
  }
  RtnFrame f;
  f.r_axis = position.normalized();
  f.n_axis = h.normalized();
  f.t_axis = f.n_axis.cross(f.r_axis);
  return f;
}

inline RtnFrame rtn_frame(const SatelliteState& s) { return rtn_frame(s.position, s.velocity); }

/// Orthonormal horizontal (along, cross) axes at a user: `along` is the
/// renormalised horizontal projection of T, `cross` = up x along, which is the
/// horizontal direction closest to N.
struct TrackAxes {
  Vec3 along = Vec3::UnitX();
  Vec3 cross = Vec3::UnitY();
};

enum class AxisConvention { HorizontalProjected, Rtn3D };

inline TrackAxes track_axes(const RtnFrame& rtn, const EnuFrame& enu,
                            AxisConvention convention = AxisConvention::HorizontalProjected) {
  if (convention == AxisConvention::Rtn3D) return {rtn.t_axis, rtn.n_axis};
  const Vec3 t_h = enu.horizontal(rtn.t_axis);
  if (t_h.norm() < 1e-9) throw Error(ErrorCode::DegenerateState, "along-track axis is vertical at the user");
  TrackAxes axes;
  axes.along = t_h.normalized();
  axes.cross = enu.up.cross(axes.along);
  if (axes.cross.dot(rtn.n_axis) < 0.0) axes.cross = -axes.cross;
  return axes;
}

}  // namespace leodop
