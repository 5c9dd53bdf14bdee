#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "leodop/error.hpp"
#include "leodop/geometry.hpp"

namespace leodop {

struct ScalingFactors {
  double gamma = 0.0;  // 1/s
  double eta = 0.0;    // m/s^2
  double a_orb = 0.0;  // m
  double r_e = 6371e3;
  double mu = 3.986004418e14;
};

inline ScalingFactors scaling_factors(double a_orb) {
  ScalingFactors s;
  if (!(a_orb > s.r_e)) throw Error(ErrorCode::OrbitBelowSurface, "a_orb " + std::to_string(a_orb) + " m");
  const double ratio = s.r_e / a_orb;
  s.a_orb = a_orb;
  s.gamma = (1.0 / (1.0 - ratio)) * std::sqrt(s.mu / (a_orb * a_orb * a_orb));
  s.eta = (ratio / (1.0 - ratio)) * s.mu / (a_orb * a_orb);
  return s;
}

/// Mean geocentric radius over the given satellite states.
inline double mean_orbit_radius(const std::vector<SatelliteState>& states) {
  if (states.empty()) throw Error(ErrorCode::InvalidArgument, "no satellite states");
  double sum = 0.0;
  for (const auto& s : states) sum += s.position.norm();
  return sum / static_cast<double>(states.size());
}

/// Diagonal of S for a k-column layout [position..., clock, offset].
inline Eigen::VectorXd scaling_diagonal(Eigen::Index k, const ScalingFactors& s) {
  if (k < 3) throw Error(ErrorCode::InvalidArgument, "Jacobian needs position, clock and offset columns");
  Eigen::VectorXd d = Eigen::VectorXd::Constant(k, 1.0 / s.gamma);
  d(k - 2) = 1.0;
  d(k - 1) = 1.0 / s.eta;
  return d;
}

/// H S: position columns divided by gamma, offset column by eta.
inline Eigen::MatrixXd scale_jacobian(const Eigen::MatrixXd& j, const ScalingFactors& s) {
  return j * scaling_diagonal(j.cols(), s).asDiagonal();
}

/// (H~^T W H~)^-1 through an SVD of sqrt(W) H~.
inline Eigen::MatrixXd ddop_covariance(const Eigen::MatrixXd& j_scaled,
                                       const Eigen::DiagonalMatrix<double, Eigen::Dynamic>& w) {
  if (w.rows() != j_scaled.rows()) throw Error(ErrorCode::InvalidArgument, "weight and Jacobian sizes differ");
  const Eigen::MatrixXd a = w.diagonal().cwiseSqrt().asDiagonal() * j_scaled;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const Eigen::Index k = j_scaled.cols();
  if (sv.size() < k || !(sv(k - 1) > 1e-10 * sv(0))) {
    std::string dir;
    if (sv.size() == k) {
      const Eigen::VectorXd v = svd.matrixV().col(k - 1);
      for (Eigen::Index i = 0; i < k; ++i) dir += (i ? ", " : "") + std::to_string(v(i));
    }
    throw Error(ErrorCode::SingularGeometry, "unobservable scaled direction [" + dir + "]");
  }
  const Eigen::MatrixXd v = svd.matrixV();
  const Eigen::VectorXd inv = sv.cwiseAbs2().cwiseInverse();
  Eigen::MatrixXd c = v * inv.asDiagonal() * v.transpose();
  return 0.5 * (c + c.transpose());
}

struct DdopResult {
  Eigen::MatrixXd covariance_scaled;
  double pddop = 0.0;
  double hddop = 0.0;
  double cddop = 0.0;
  double tddop = 0.0;
  double position_sigma = 0.0;     // m
  double time_offset_sigma = 0.0;  // s
  double drift_sigma = 0.0;        // s/s
};

/// DDOP values from a scaled covariance with layout [position..., clock, offset].
/// With two position columns (horizontal mode) PDDOP equals HDDOP. Sigmas use
/// sigma_meas in m/s.
inline DdopResult ddop_metrics(const Eigen::MatrixXd& c, const ScalingFactors& s, double sigma_meas) {
  const Eigen::Index k = c.rows();
  if (c.cols() != k || (k != 4 && k != 5)) throw Error(ErrorCode::InvalidArgument, "covariance must be 4x4 or 5x5");
  DdopResult r;
  r.covariance_scaled = c;
  const Eigen::Index npos = k - 2;
  r.pddop = std::sqrt(c.topLeftCorner(npos, npos).trace());
  r.hddop = std::sqrt(c.topLeftCorner(2, 2).trace());
  r.cddop = std::sqrt(c(k - 2, k - 2));
  r.tddop = std::sqrt(c(k - 1, k - 1));
  r.position_sigma = r.pddop * sigma_meas / s.gamma;
  r.time_offset_sigma = r.tddop * sigma_meas / s.eta;
  r.drift_sigma = r.cddop * sigma_meas / 299792458.0;
  return r;
}

enum class DopRating { Ideal, Excellent, Good, Fair, Poor };

inline DopRating classify_dop(double value) {
  if (!(value >= 0.0)) throw Error(ErrorCode::InvalidArgument, "DOP value must be non-negative");
  if (value <= 1.0) return DopRating::Ideal;
  if (value <= 2.0) return DopRating::Excellent;
  if (value <= 5.0) return DopRating::Good;
  if (value <= 10.0) return DopRating::Fair;
  return DopRating::Poor;
}

inline const char* rating_name(DopRating r) {
  switch (r) {
    case DopRating::Ideal: return "Ideal";
    case DopRating::Excellent: return "Excellent";
    case DopRating::Good: return "Good";
    case DopRating::Fair: return "Fair";
    case DopRating::Poor: return "Poor";
  }
  return "?";
}

struct ConfidenceEllipse {
  double semi_major = 0.0;   // m
  double semi_minor = 0.0;   // m
  double orientation = 0.0;  // rad, major axis from the along-track axis toward cross-track
  double confidence = 0.95;
};

/// Chi-square quantile with two degrees of freedom.
inline double chi2_2dof(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error(ErrorCode::InvalidArgument, "confidence must lie in (0, 1)");
  return -2.0 * std::log(1.0 - confidence);
}

/// Ellipse of a 2x2 covariance given in (along, cross) coordinates. Returns
/// false if the matrix is not positive definite.
inline bool ellipse_from_covariance(const Eigen::Matrix2d& p, double confidence, ConfidenceEllipse& out) {
  const Eigen::Matrix2d sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
  const Eigen::Vector2d ev = es.eigenvalues();  // ascending
  if (!(ev(0) > 1e-12 * std::abs(ev(1))) || !(ev(0) > 0.0)) return false;
  const double k2 = chi2_2dof(confidence);
  out.semi_major = std::sqrt(k2 * ev(1));
  out.semi_minor = std::sqrt(k2 * ev(0));
  out.confidence = confidence;
  if (ev(1) - ev(0) <= 1e-12 * ev(1)) {
    out.orientation = 0.0;
  } else {
    const Eigen::Vector2d major = es.eigenvectors().col(1);
    double ang = std::atan2(major(1), major(0));
    if (ang > std::numbers::pi / 2) ang -= std::numbers::pi;
    if (ang <= -std::numbers::pi / 2) ang += std::numbers::pi;
    out.orientation = ang;
  }
  return true;
}

struct TheoreticalEllipse {
  ConfidenceEllipse ellipse;
  Eigen::Matrix2d covariance_along_cross = Eigen::Matrix2d::Zero();  // m^2
  double along_sigma = 0.0;  // m
  double cross_sigma = 0.0;  // m
  TrackAxes axes;
};

/// Horizontal covariance in m^2 mapped into (along, cross) axes. `position_basis`
/// maps the position block of C to ECEF displacements (3 x npos).
inline TheoreticalEllipse theoretical_ellipse(const Eigen::MatrixXd& c, const Eigen::MatrixXd& position_basis,
                                              const RtnFrame& rtn, const EnuFrame& enu, double sigma_meas,
                                              const ScalingFactors& s, double confidence = 0.95,
                                              AxisConvention convention = AxisConvention::HorizontalProjected) {
  const Eigen::Index npos = c.rows() - 2;
  if (position_basis.rows() != 3 || position_basis.cols() != npos) {
    throw Error(ErrorCode::InvalidArgument, "position basis does not match the covariance layout");
  }
  TheoreticalEllipse out;
  out.axes = track_axes(rtn, enu, convention);
  Eigen::Matrix<double, 2, 3> a;
  a.row(0) = out.axes.along.transpose();
  a.row(1) = out.axes.cross.transpose();
  const double scale = sigma_meas * sigma_meas / (s.gamma * s.gamma);
  const Eigen::Matrix3d p_ecef = position_basis * c.topLeftCorner(npos, npos) * position_basis.transpose() * scale;
  out.covariance_along_cross = a * p_ecef * a.transpose();
  out.along_sigma = std::sqrt(std::max(0.0, out.covariance_along_cross(0, 0)));
  out.cross_sigma = std::sqrt(std::max(0.0, out.covariance_along_cross(1, 1)));
  if (!ellipse_from_covariance(out.covariance_along_cross, confidence, out.ellipse)) {
    throw Error(ErrorCode::DegenerateCovariance, "horizontal covariance is not positive definite");
  }
  return out;
}

}  // namespace leodop
