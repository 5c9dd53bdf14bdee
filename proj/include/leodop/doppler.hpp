#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "leodop/error.hpp"
#include "leodop/geometry.hpp"
#include "leodop/orbit.hpp"
#include "leodop/state_vector.hpp"

namespace leodop {

/// Carrier wavelength for a 137 MHz downlink.
inline constexpr double kDefaultWavelength = kSpeedOfLight / 137e6;

struct NoiseModel {
  double sigma_dopp = 0.5;  // m/s
  bool elevation_scaled = true;
  std::uint64_t seed = 1;
};

struct DopplerMeasurement {
  UtcInstant epoch{};
  double range_rate = 0.0;     // m/s
  double elevation_deg = 0.0;
  double sigma = 0.0;          // m/s
};

struct MeasurementSet {
  std::vector<DopplerMeasurement> measurements;
  std::vector<SatelliteState> satellite_states;
  double carrier_wavelength = kDefaultWavelength;

  std::size_t size() const { return measurements.size(); }

  std::vector<UtcInstant> epochs() const {
    std::vector<UtcInstant> out;
    out.reserve(measurements.size());
    for (const auto& m : measurements) out.push_back(m.epoch);
    return out;
  }

  Eigen::VectorXd range_rates() const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(measurements.size()));
    for (std::size_t i = 0; i < measurements.size(); ++i) z(static_cast<Eigen::Index>(i)) = measurements[i].range_rate;
    return z;
  }
};

/// Doppler shift in Hz to range rate in m/s (positive shift means closing range).
inline double hz_to_range_rate(double doppler_hz, double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "wavelength must be positive");
  return -wavelength_m * doppler_hz;
}

inline double range_rate_to_hz(double range_rate_mps, double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "wavelength must be positive");
  return -range_rate_mps / wavelength_m;
}

/// Range rate seen by a static user: -v_s . u + c*drift, u the unit vector from
/// satellite to user. `sat` must already be evaluated at t - delta_c.
inline double predict_range_rate(const SatelliteState& sat, const Vec3& user_ecef, double clock_drift_scaled) {
  const Vec3 los = user_ecef - sat.position;
  const double rho = los.norm();
  if (rho < 1.0) throw Error(ErrorCode::CoincidentPoints, "user and satellite positions coincide");
  return -sat.velocity.dot(los) / rho + clock_drift_scaled;
}

inline void check_epochs(const std::vector<UtcInstant>& epochs) {
  for (std::size_t i = 1; i < epochs.size(); ++i) {
    if (!(epochs[i] > epochs[i - 1])) throw Error(ErrorCode::InvalidArgument, "epochs must be strictly increasing");
  }
}

/// Satellite states at each t_i - delta_c.
inline std::vector<SatelliteState> propagate_series(const OrbitSource& source, const std::vector<UtcInstant>& epochs,
                                                    double delta_c) {
  std::vector<SatelliteState> out;
  out.reserve(epochs.size());
  for (const auto& t : epochs) out.push_back(propagate_with_offset(source, t, delta_c));
  return out;
}

inline Eigen::VectorXd predict_from_states(const std::vector<SatelliteState>& states, const StateVector& theta) {
  Eigen::VectorXd h(static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    h(static_cast<Eigen::Index>(i)) = predict_range_rate(states[i], theta.position_ecef, theta.clock_drift_scaled);
  }
  return h;
}

/// Stacked model h(theta) over `epochs`. Visibility is not checked here.
inline std::vector<double> predict_series(const OrbitSource& source, const Vec3& user_ecef, const StateVector& theta,
                                          const std::vector<UtcInstant>& epochs) {
  StateVector th = theta;
  th.position_ecef = user_ecef;
  const Eigen::VectorXd h = predict_from_states(propagate_series(source, epochs, theta.time_offset), th);
  return {h.data(), h.data() + h.size()};
}

/// Per-epoch standard deviation in m/s.
inline double measurement_sigma(const NoiseModel& noise, double elevation_deg) {
  if (!noise.elevation_scaled) return noise.sigma_dopp;
  const double s = std::sin(elevation_deg * kDeg);
  if (!(s > 0.0)) throw Error(ErrorCode::ZeroElevation, "elevation-scaled noise needs positive elevation");
  return noise.sigma_dopp / s;
}

/// Replaces the range rates of `set` by truth + N(0, sigma_i^2) draws from a
/// generator seeded with `seed`.
inline void apply_noise(MeasurementSet& set, const Eigen::VectorXd& truth, const NoiseModel& noise,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < set.measurements.size(); ++i) {
    auto& m = set.measurements[i];
    m.sigma = measurement_sigma(noise, m.elevation_deg);
    const double eps = noise.sigma_dopp > 0.0 ? m.sigma * normal(rng) : 0.0;
    m.range_rate = truth(static_cast<Eigen::Index>(i)) + eps;
  }
}

/// Noise-free measurement set for the true state; range rates equal h(theta).
/// Throws WindowNotVisible if any epoch is below the mask.
inline MeasurementSet noiseless_measurements(const OrbitSource& source, const StateVector& truth,
                                             const std::vector<UtcInstant>& epochs,
                                             double wavelength = kDefaultWavelength, double mask_deg = 5.0) {
  check_epochs(epochs);
  const EnuFrame frame = enu_frame(truth.position_ecef);
  MeasurementSet set;
  set.carrier_wavelength = wavelength;
  set.satellite_states = propagate_series(source, epochs, truth.time_offset);
  const Eigen::VectorXd h = predict_from_states(set.satellite_states, truth);
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const double el = elevation_azimuth(frame, set.satellite_states[i].position).elevation_deg;
    if (el < mask_deg) {
      throw Error(ErrorCode::WindowNotVisible,
                  format_utc(epochs[i]) + " elevation " + std::to_string(el) + " deg below the mask");
    }
    set.measurements.push_back({epochs[i], h(static_cast<Eigen::Index>(i)), el, 0.0});
  }
  return set;
}

/// z_i = h(t_i; theta_true) + eps_i, eps_i ~ N(0, sigma_i^2) with
/// sigma_i = sigma_dopp / sin(E_i) when elevation scaled. Deterministic in the seed.
inline MeasurementSet generate_measurements(const OrbitSource& source, const StateVector& truth,
                                            const std::vector<UtcInstant>& epochs, const NoiseModel& noise,
                                            double wavelength = kDefaultWavelength, double mask_deg = 5.0) {
  if (noise.sigma_dopp < 0.0) throw Error(ErrorCode::InvalidArgument, "sigma_dopp must be non-negative");
  MeasurementSet set = noiseless_measurements(source, truth, epochs, wavelength, mask_deg);
  apply_noise(set, set.range_rates(), noise, noise.seed);
  return set;
}

/// Elevation weights sin^2(E_i) on the diagonal.
inline Eigen::DiagonalMatrix<double, Eigen::Dynamic> weight_matrix(const MeasurementSet& set) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double e = set.measurements[i].elevation_deg;
    if (!(e > 0.0)) throw Error(ErrorCode::ZeroElevation, "measurement " + std::to_string(i) + " has elevation <= 0");
    const double s = std::sin(e * kDeg);
    w(static_cast<Eigen::Index>(i)) = s * s;
  }
  return Eigen::DiagonalMatrix<double, Eigen::Dynamic>(w);
}

}  // namespace leodop
