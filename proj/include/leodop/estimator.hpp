#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "leodop/ddop.hpp"
#include "leodop/doppler.hpp"
#include "leodop/error.hpp"
#include "leodop/geometry.hpp"
#include "leodop/orbit.hpp"
#include "leodop/state_vector.hpp"

namespace leodop {

enum class SolverMode { Full5State, Horizontal4State };
enum class VerticalConstraint { LocalUp, EcefZ };

struct SolverConfig {
  int max_iterations = 25;
  double step_tolerance = 1e-4;  // norm of the scaled step
  SolverMode mode = SolverMode::Horizontal4State;
  VerticalConstraint vertical = VerticalConstraint::LocalUp;

  int unknowns() const { return mode == SolverMode::Full5State ? 5 : 4; }
};

struct SolveResult {
  StateVector estimate;
  int iterations = 0;
  bool converged = false;
  double weighted_residual_norm = 0.0;  // m/s
  Eigen::MatrixXd jacobian_at_solution;  // M x k, solver parameterisation
  double normal_matrix_condition = 0.0;
  double last_step_norm = 0.0;
  std::vector<double> cost_history;      // WLS cost at each iterate, starting with the initial guess
};

/// Normal matrices with a condition number at or above this are refused.
inline constexpr double kMaxNormalCondition = 1e14;

/// d(range rate)/d[r_x, r_y, r_z, c*drift, delta_c] for satellite states already
/// evaluated at t_i - delta_c (acceleration required).
inline Eigen::MatrixXd jacobian_from_states(const Vec3& user_ecef, const std::vector<SatelliteState>& states) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(states.size()), 5);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    if (!s.has_acceleration) {
      throw Error(ErrorCode::MissingAcceleration, "state " + std::to_string(i) + " lacks acceleration");
    }
    const Vec3 d = user_ecef - s.position;
    const double rho = d.norm();
    if (rho < 1.0) throw Error(ErrorCode::CoincidentPoints, "user and satellite positions coincide");
    const Vec3 u = d / rho;
    const double vu = s.velocity.dot(d);
    const Vec3 dpos = -s.velocity / rho + vu * d / (rho * rho * rho);
    // Moving t back by delta_c moves the satellite by -v_s dt, the velocity by -a_s dt.
    const double ddc = s.acceleration.dot(u) - s.velocity.squaredNorm() / rho + vu * vu / (rho * rho * rho);
    const auto r = static_cast<Eigen::Index>(i);
    j(r, 0) = dpos.x();
    j(r, 1) = dpos.y();
    j(r, 2) = dpos.z();
    j(r, 3) = 1.0;
    j(r, 4) = ddc;
  }
  return j;
}

/// Full M x 5 Jacobian at theta; the satellite is re-propagated at t_i - theta.time_offset.
inline Eigen::MatrixXd jacobian(const StateVector& theta, const MeasurementSet& set, const OrbitSource& source) {
  return jacobian_from_states(theta.position_ecef, propagate_series(source, set.epochs(), theta.time_offset));
}

/// Maps the position coordinates of the solver parameterisation to ECEF
/// displacements (3 x 3 identity, or 3 x 2 for the horizontal modes).
inline Eigen::MatrixXd position_basis(const EnuFrame& frame, const SolverConfig& config) {
  if (config.mode == SolverMode::Full5State) return Eigen::Matrix3d::Identity();
  Eigen::MatrixXd b(3, 2);
  if (config.vertical == VerticalConstraint::LocalUp) {
    b.col(0) = frame.east;
    b.col(1) = frame.north;
  } else {
    b.col(0) = Vec3::UnitX();
    b.col(1) = Vec3::UnitY();
  }
  return b;
}

/// Re-expresses the position columns in the solver parameterisation. For the
/// horizontal mode with LocalUp this is the chain rule onto east/north; with
/// EcefZ the z column is dropped. Full5State returns J unchanged.
inline Eigen::MatrixXd reduce_jacobian(const Eigen::MatrixXd& j, const EnuFrame& frame, const SolverConfig& config) {
  if (config.mode == SolverMode::Full5State) return j;
  const Eigen::MatrixXd b = position_basis(frame, config);
  Eigen::MatrixXd out(j.rows(), 4);
  out.leftCols(2) = j.leftCols(3) * b;
  out.col(2) = j.col(3);
  out.col(3) = j.col(4);
  return out;
}

/// Gauss-Newton update (J^T W J)^-1 J^T W r, solved through an SVD of sqrt(W) J.
/// `condition`, if given, receives cond(J^T W J).
inline Eigen::VectorXd wls_step(const Eigen::MatrixXd& j, const Eigen::DiagonalMatrix<double, Eigen::Dynamic>& w,
                                const Eigen::VectorXd& residuals, double* condition = nullptr) {
  if (j.rows() != residuals.size() || w.rows() != j.rows()) {
    throw Error(ErrorCode::InvalidArgument, "Jacobian, weights and residuals disagree in size");
  }
  if (j.rows() < j.cols()) {
    throw Error(ErrorCode::SingularNormalMatrix, "fewer measurements than unknowns");
  }
  const Eigen::VectorXd sw = w.diagonal().cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * j;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? (smax / smin) * (smax / smin) : INFINITY;
  if (condition) *condition = cond;
  if (!(cond < kMaxNormalCondition)) {
    throw Error(ErrorCode::SingularNormalMatrix, "normal matrix condition " + std::to_string(cond));
  }
  const Eigen::VectorXd b = sw.cwiseProduct(residuals);
  return svd.matrixV() * ((svd.matrixU().transpose() * b).cwiseQuotient(sv));
}

namespace estimator_detail {

inline double weighted_norm(const Eigen::VectorXd& r, const Eigen::DiagonalMatrix<double, Eigen::Dynamic>& w) {
  return std::sqrt(r.dot(w.diagonal().cwiseProduct(r)));
}

}  // namespace estimator_detail

/// Iterative WLS. In the horizontal modes the position moves only along the
/// plane given by the vertical constraint; with LocalUp the east/north axes are
/// re-linearised at each iterate and the geodetic height is held at the
/// initial guess's value.
inline SolveResult solve(const MeasurementSet& set, const OrbitSource& source, const StateVector& initial,
                         const SolverConfig& config = {}) {
  if (config.max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(config.step_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "step_tolerance must be positive");
  const int k = config.unknowns();
  if (static_cast<int>(set.size()) < k) {
    throw Error(ErrorCode::InvalidArgument,
                std::to_string(set.size()) + " measurements for " + std::to_string(k) + " unknowns");
  }
  const auto w = weight_matrix(set);
  const Eigen::VectorXd z = set.range_rates();
  const auto epochs = set.epochs();
  const double held_height = ecef_to_geodetic(initial.position_ecef).height_m;

  // Convergence is judged on the step in scaled (m/s) units.
  const ScalingFactors sf = scaling_factors(mean_orbit_radius(set.satellite_states.empty()
                                                                  ? propagate_series(source, epochs, initial.time_offset)
                                                                  : set.satellite_states));
  const Eigen::VectorXd s_diag = scaling_diagonal(k, sf);
  const Eigen::VectorXd scale = s_diag.cwiseInverse();

  SolveResult out;
  StateVector theta = initial;
  for (int it = 0; it < config.max_iterations; ++it) {
    const auto states = propagate_series(source, epochs, theta.time_offset);
    const Eigen::VectorXd r = z - predict_from_states(states, theta);
    out.cost_history.push_back(r.dot(w.diagonal().cwiseProduct(r)));
    const EnuFrame frame = enu_frame(theta.position_ecef);
    const Eigen::MatrixXd jr = reduce_jacobian(jacobian_from_states(theta.position_ecef, states), frame, config);
    // Solved in the scaled (dimensionless) parameterisation so the conditioning
    // reflects geometry rather than units.
    const Eigen::VectorXd delta = s_diag.cwiseProduct(wls_step(jr * s_diag.asDiagonal(), w, r, &out.normal_matrix_condition));

    const Eigen::MatrixXd basis = position_basis(frame, config);
    theta.position_ecef += basis * delta.head(k - 2);
    if (config.mode == SolverMode::Horizontal4State && config.vertical == VerticalConstraint::LocalUp) {
      GeodeticPosition g = ecef_to_geodetic(theta.position_ecef);
      g.height_m = held_height;
      theta.position_ecef = geodetic_to_ecef(g);
    }
    theta.clock_drift_scaled += delta(k - 2);
    theta.time_offset += delta(k - 1);
    out.iterations = it + 1;
    out.last_step_norm = delta.cwiseProduct(scale).norm();
    if (!std::isfinite(out.last_step_norm) || std::abs(theta.time_offset) >= kMaxTimeOffset) break;
    if (out.last_step_norm < config.step_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.estimate = theta;
  if (std::abs(theta.time_offset) >= kMaxTimeOffset || !std::isfinite(theta.time_offset)) {
    out.converged = false;
    out.weighted_residual_norm = INFINITY;
    return out;
  }

  const auto states = propagate_series(source, epochs, theta.time_offset);
  const Eigen::VectorXd r = z - predict_from_states(states, theta);
  out.weighted_residual_norm = estimator_detail::weighted_norm(r, w);
  out.jacobian_at_solution =
      reduce_jacobian(jacobian_from_states(theta.position_ecef, states), enu_frame(theta.position_ecef), config);
  return out;
}

}  // namespace leodop
