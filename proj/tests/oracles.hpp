#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "leodop/doppler.hpp"
#include "leodop/orbit.hpp"

namespace oracle {

using leodop::UtcInstant;

struct Geometry {
  leodop::OrbitSource orbit = leodop::OrbitSource::synthetic({});
  leodop::StateVector theta;
  std::vector<UtcInstant> epochs;
};

/// Random LEO pass: circular orbit 400-1500 km, any heading, ground track up
/// to 800 km from a random user, five epochs within 200 s of closest approach.
inline Geometry random_geometry(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const UtcInstant ref = leodop::parse_utc("2025-04-14T17:33:00Z");
  leodop::SyntheticCircular o;
  o.anchor = {-70.0 + 140.0 * u01(rng), -180.0 + 360.0 * u01(rng), 2000.0 * u01(rng)};
  o.altitude_m = 400e3 + 1100e3 * u01(rng);
  o.ground_track_offset_m = -800e3 + 1600e3 * u01(rng);
  o.heading_deg = 360.0 * u01(rng);
  o.reference_epoch = ref;
  Geometry g;
  g.orbit = leodop::OrbitSource::synthetic(o);
  g.theta = {leodop::geodetic_to_ecef(o.anchor), -50.0 + 100.0 * u01(rng), -5.0 + 10.0 * u01(rng)};
  for (int i = 0; i < 5; ++i) g.epochs.push_back(leodop::add_seconds(ref, -200.0 + 400.0 * u01(rng)));
  std::sort(g.epochs.begin(), g.epochs.end());
  return g;
}

inline Eigen::VectorXd model(const Geometry& g, const leodop::StateVector& th) {
  const auto v = leodop::predict_series(g.orbit, th.position_ecef, th, g.epochs);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Central differences of the forward model with respect to
/// [x, y, z, c*drift, delta_c].
inline Eigen::MatrixXd fd_jacobian(const Geometry& g, double h_pos = 50.0, double h_time = 1e-2) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(g.epochs.size()), 5);
  for (int k = 0; k < 5; ++k) {
    leodop::StateVector p = g.theta, m = g.theta;
    double h = 1.0;
    if (k < 3) {
      h = h_pos;
      p.position_ecef(k) += h;
      m.position_ecef(k) -= h;
    } else if (k == 3) {
      p.clock_drift_scaled += h;
      m.clock_drift_scaled -= h;
    } else {
      h = h_time;
      p.time_offset += h;
      m.time_offset -= h;
    }
    j.col(k) = (model(g, p) - model(g, m)) / (2.0 * h);
  }
  return j;
}

/// Largest column-wise relative difference ||a_k - b_k|| / ||b_k||.
inline double max_column_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    worst = std::max(worst, (a.col(k) - b.col(k)).norm() / b.col(k).norm());
  }
  return worst;
}

/// Weighted least-squares step through the normal equations (LDLT), the
/// textbook route the SVD solver must agree with.
inline Eigen::VectorXd normal_equation_step(const Eigen::MatrixXd& j, const Eigen::VectorXd& w,
                                            const Eigen::VectorXd& r) {
  const Eigen::MatrixXd n = j.transpose() * w.asDiagonal() * j;
  return n.ldlt().solve(j.transpose() * w.asDiagonal() * r);
}

}  // namespace oracle
