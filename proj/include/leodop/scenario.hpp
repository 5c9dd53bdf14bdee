#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "leodop/ddop.hpp"
#include "leodop/doppler.hpp"
#include "leodop/estimator.hpp"
#include "leodop/orbit.hpp"
#include "leodop/pass.hpp"

namespace leodop {

/// Everything needed to simulate one single-satellite positioning case.
struct Scenario {
  OrbitSource orbit = OrbitSource::synthetic({});
  GeodeticPosition user;
  UtcInstant window_start{};
  double duration_s = 350.0;
  double period_s = 1.0;
  NoiseModel noise;
  SolverConfig solver;
  double carrier_wavelength = kDefaultWavelength;
  double mask_deg = kDefaultMaskDeg;
  double true_clock_drift_mps = 0.0;
  double true_time_offset_s = 0.0;
  int trials = 1000;

  /// window_start + k * period for every k with k * period < duration.
  std::vector<UtcInstant> epochs() const {
    if (!(duration_s > 0.0) || !(period_s > 0.0)) {
      throw Error(ErrorCode::ValidationError, "window duration and period must be positive");
    }
    std::vector<UtcInstant> out;
    const auto n = static_cast<long>(std::ceil(duration_s / period_s - 1e-9));
    for (long k = 0; k < n; ++k) out.push_back(add_seconds(window_start, static_cast<double>(k) * period_s));
    return out;
  }

  UtcInstant window_end() const { return epochs().back(); }

  StateVector truth() const {
    return {geodetic_to_ecef(user), true_clock_drift_mps, true_time_offset_s};
  }
};

/// Closest approach to `user` searched within 600 s either side of [t0, t1];
/// if that search is ambiguous, the sampled epoch of minimum range is used.
inline UtcInstant reference_epoch(const OrbitSource& orbit, const GeodeticPosition& user, UtcInstant t0, UtcInstant t1,
                                  double mask_deg = kDefaultMaskDeg) {
  try {
    return closest_approach(orbit, user, add_seconds(t0, -600.0), add_seconds(t1, 600.0), mask_deg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MultipleMinima && e.code() != ErrorCode::NoPassInWindow) throw;
  }
  const Vec3 u = geodetic_to_ecef(user);
  UtcInstant best = t0;
  double best_range = INFINITY;
  const double span = seconds_between(t0, t1);
  for (double x = 0.0; x <= span; x += 1.0) {
    const UtcInstant t = add_seconds(t0, x);
    const double r = (orbit_detail::kinematic_state(orbit, t, 0.0).position - u).norm();
    if (r < best_range) {
      best_range = r;
      best = t;
    }
  }
  return best;
}

/// RTN frame of the satellite at its closest approach to the user.
inline RtnFrame reference_rtn(const OrbitSource& orbit, const GeodeticPosition& user, UtcInstant t0, UtcInstant t1,
                              double mask_deg = kDefaultMaskDeg) {
  return rtn_frame(orbit_detail::kinematic_state(orbit, reference_epoch(orbit, user, t0, t1, mask_deg), 0.0));
}

/// Horizontal error split into (along, cross) components.
struct AlongCross {
  double along = 0.0;
  double cross = 0.0;
};

inline AlongCross decompose_error(const StateVector& est, const StateVector& truth, const RtnFrame& rtn,
                                  const EnuFrame& enu, AxisConvention convention = AxisConvention::HorizontalProjected) {
  const TrackAxes axes = track_axes(rtn, enu, convention);
  const Vec3 err = enu.horizontal(est.position_ecef - truth.position_ecef);
  return {err.dot(axes.along), err.dot(axes.cross)};
}

/// Theoretical DDOP analysis of a set of epochs at the true state.
struct TheoryResult {
  DdopResult ddop;
  TheoreticalEllipse ellipse;
  ScalingFactors scaling;
};

inline TheoryResult analyze_geometry(const OrbitSource& orbit, const StateVector& truth,
                                     const std::vector<UtcInstant>& epochs, const SolverConfig& solver,
                                     double sigma_meas, const RtnFrame& rtn, double mask_deg = kDefaultMaskDeg,
                                     double confidence = 0.95) {
  const MeasurementSet set = noiseless_measurements(orbit, truth, epochs, kDefaultWavelength, mask_deg);
  const EnuFrame enu = enu_frame(truth.position_ecef);
  TheoryResult out;
  out.scaling = scaling_factors(mean_orbit_radius(set.satellite_states));
  const Eigen::MatrixXd j = reduce_jacobian(jacobian_from_states(truth.position_ecef, set.satellite_states), enu, solver);
  const Eigen::MatrixXd c = ddop_covariance(scale_jacobian(j, out.scaling), weight_matrix(set));
  out.ddop = ddop_metrics(c, out.scaling, sigma_meas);
  out.ellipse = theoretical_ellipse(c, position_basis(enu, solver), rtn, enu, sigma_meas, out.scaling, confidence);
  return out;
}

}  // namespace leodop
