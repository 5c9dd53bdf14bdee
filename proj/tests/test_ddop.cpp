#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "leodop/ddop.hpp"
#include "leodop/scenario.hpp"
#include "oracles.hpp"

using namespace leodop;

// 40-digit evaluations of the closed forms at a = 7086 km.
TEST(Scaling, MatchesHighPrecisionReference) {
  const ScalingFactors s = scaling_factors(7086e3);
  EXPECT_NEAR(s.gamma, 0.010489680780908141828, 1e-12 * 0.0105);
  EXPECT_NEAR(s.eta, 70.73543734046718429, 1e-12 * 70.7);
  EXPECT_EQ(s.a_orb, 7086e3);
}

TEST(Scaling, OrbitBelowSurface) {
  for (double a : {6000e3, 6371e3, -1.0}) {
    try {
      scaling_factors(a);
      FAIL() << a;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OrbitBelowSurface);
    }
  }
}

TEST(Scaling, DiagonalLayout) {
  const ScalingFactors s = scaling_factors(7000e3);
  const Eigen::VectorXd d4 = scaling_diagonal(4, s);
  EXPECT_DOUBLE_EQ(d4(0), 1.0 / s.gamma);
  EXPECT_DOUBLE_EQ(d4(1), 1.0 / s.gamma);
  EXPECT_DOUBLE_EQ(d4(2), 1.0);
  EXPECT_DOUBLE_EQ(d4(3), 1.0 / s.eta);
  EXPECT_EQ(scaling_diagonal(5, s).head(3), Eigen::Vector3d::Constant(1.0 / s.gamma));
  EXPECT_THROW(scaling_diagonal(2, s), Error);
}

TEST(Rating, Thresholds) {
  EXPECT_EQ(classify_dop(0.0), DopRating::Ideal);
  EXPECT_EQ(classify_dop(1.0), DopRating::Ideal);
  EXPECT_EQ(classify_dop(1.0001), DopRating::Excellent);
  EXPECT_EQ(classify_dop(2.0), DopRating::Excellent);
  EXPECT_EQ(classify_dop(4.99), DopRating::Good);
  EXPECT_EQ(classify_dop(5.0), DopRating::Good);
  EXPECT_EQ(classify_dop(10.0), DopRating::Fair);
  EXPECT_EQ(classify_dop(10.5), DopRating::Poor);
  EXPECT_STREQ(rating_name(DopRating::Fair), "Fair");
  for (double bad : {-0.1, double(NAN)}) {
    try {
      classify_dop(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  }
}

TEST(Ellipse, ChiSquareQuantiles) {
  EXPECT_NEAR(chi2_2dof(0.95), 5.991464547107979, 1e-12);
  EXPECT_NEAR(chi2_2dof(0.99), 9.210340371976184, 1e-12);
  EXPECT_NEAR(chi2_2dof(0.5), 1.386294361119891, 1e-12);
  EXPECT_THROW(chi2_2dof(1.0), Error);
  EXPECT_THROW(chi2_2dof(0.0), Error);
}

TEST(Ellipse, AxisAligned) {
  ConfidenceEllipse e;
  ASSERT_TRUE(ellipse_from_covariance(Eigen::Vector2d(4.0, 1.0).asDiagonal().toDenseMatrix(), 0.95, e));
  EXPECT_NEAR(e.semi_major, std::sqrt(5.991464547107979 * 4.0), 1e-12);
  EXPECT_NEAR(e.semi_minor, std::sqrt(5.991464547107979), 1e-12);
  EXPECT_NEAR(e.orientation, 0.0, 1e-15);
  ASSERT_TRUE(ellipse_from_covariance(Eigen::Vector2d(1.0, 4.0).asDiagonal().toDenseMatrix(), 0.95, e));
  EXPECT_NEAR(std::abs(e.orientation), std::numbers::pi / 2, 1e-12);
}

TEST(Ellipse, RotatedRecoversAngle) {
  for (double deg : {-75.0, -30.0, 10.0, 45.0, 89.0}) {
    const double a = deg * std::numbers::pi / 180.0;
    Eigen::Matrix2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    const Eigen::Matrix2d p = r * Eigen::Vector2d(9.0, 1.0).asDiagonal() * r.transpose();
    ConfidenceEllipse e;
    ASSERT_TRUE(ellipse_from_covariance(p, 0.5, e));
    EXPECT_NEAR(e.orientation, a, 1e-12) << deg;
    EXPECT_NEAR(e.semi_major / e.semi_minor, 3.0, 1e-12);
  }
}

TEST(Ellipse, IsotropicAndDegenerate) {
  ConfidenceEllipse e;
  ASSERT_TRUE(ellipse_from_covariance(Eigen::Matrix2d::Identity() * 2.0, 0.95, e));
  EXPECT_EQ(e.orientation, 0.0);
  EXPECT_DOUBLE_EQ(e.semi_major, e.semi_minor);
  Eigen::Matrix2d rank1;
  rank1 << 1, 1, 1, 1;
  EXPECT_FALSE(ellipse_from_covariance(rank1, 0.95, e));
  EXPECT_FALSE(ellipse_from_covariance(-Eigen::Matrix2d::Identity(), 0.95, e));
}

TEST(Covariance, MatchesDirectInverse) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 30; ++t) {
    const int m = 8 + t, k = 4 + t % 2;
    Eigen::MatrixXd j(m, k);
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < k; ++c) j(i, c) = n01(rng);
      w(i) = 0.05 + std::abs(n01(rng));
    }
    const Eigen::MatrixXd c = ddop_covariance(j, Eigen::DiagonalMatrix<double, Eigen::Dynamic>(w));
    const Eigen::MatrixXd n = j.transpose() * w.asDiagonal() * j;
    const Eigen::MatrixXd ref = n.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    EXPECT_LT((c - ref).norm(), 1e-10 * ref.norm());
    EXPECT_EQ(c, c.transpose());
  }
}

TEST(Covariance, SingularGeometryNamesDirection) {
  Eigen::MatrixXd j(6, 4);
  j.setRandom();
  j.col(3) = 2.0 * j.col(1);
  try {
    ddop_covariance(j, Eigen::DiagonalMatrix<double, Eigen::Dynamic>(Eigen::VectorXd::Ones(6)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularGeometry);
    EXPECT_NE(std::string(e.what()).find('['), std::string::npos);
  }
  try {
    ddop_covariance(Eigen::MatrixXd::Ones(3, 4), Eigen::DiagonalMatrix<double, Eigen::Dynamic>(Eigen::VectorXd::Ones(3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularGeometry);
  }
}

TEST(Metrics, DefinitionsAndUnits) {
  Eigen::MatrixXd c = Eigen::Vector4d(4.0, 9.0, 0.25, 16.0).asDiagonal();
  const ScalingFactors s = scaling_factors(7086e3);
  const DdopResult r = ddop_metrics(c, s, 0.5);
  EXPECT_DOUBLE_EQ(r.pddop, std::sqrt(13.0));
  EXPECT_DOUBLE_EQ(r.hddop, r.pddop);
  EXPECT_DOUBLE_EQ(r.cddop, 0.5);
  EXPECT_DOUBLE_EQ(r.tddop, 4.0);
  EXPECT_DOUBLE_EQ(r.position_sigma, std::sqrt(13.0) * 0.5 / s.gamma);
  EXPECT_DOUBLE_EQ(r.time_offset_sigma, 4.0 * 0.5 / s.eta);
  EXPECT_DOUBLE_EQ(r.drift_sigma, 0.5 * 0.5 / kSpeedOfLight);

  Eigen::MatrixXd c5 = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0).asDiagonal();
  const DdopResult r5 = ddop_metrics(c5, s, 1.0);
  EXPECT_DOUBLE_EQ(r5.pddop, std::sqrt(6.0));
  EXPECT_DOUBLE_EQ(r5.hddop, std::sqrt(3.0));
  EXPECT_THROW(ddop_metrics(Eigen::Matrix3d::Identity(), s, 1.0), Error);
}

TEST(TheoreticalEllipse, RankDeficientHorizontalBlock) {
  const Eigen::MatrixXd c = Eigen::Vector4d(1.0, 0.0, 1.0, 1.0).asDiagonal();
  const EnuFrame enu = enu_frame(GeodeticPosition{10.0, 20.0, 0.0});
  const RtnFrame rtn = rtn_frame(geodetic_to_ecef({10.0, 20.0, 700e3}), 7.5e3 * enu.north);
  SolverConfig cfg;
  try {
    theoretical_ellipse(c, position_basis(enu, cfg), rtn, enu, 1.0, scaling_factors(7086e3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateCovariance);
  }
}

class GeometryTest : public ::testing::TestWithParam<int> {};

TEST_P(GeometryTest, HorizontalSigmasBoundedByHddop) {
  std::mt19937_64 rng(500 + GetParam());
  // Kept off the equator, where holding ECEF z fixed pins the north coordinate.
  const GeodeticPosition user{20.0 + 8.0 * GetParam(), 15.0 * GetParam(), 100.0};
  const UtcInstant ref = parse_utc("2025-04-14T17:33:00Z");
  const OrbitSource orbit = synthesize_pass(user, 550e3 + 50e3 * GetParam(), 35.0 + 7.0 * GetParam(), ref,
                                            40.0 * GetParam());
  std::vector<UtcInstant> ep;
  for (int i = 0; i < 12; ++i) ep.push_back(add_seconds(ref, -165.0 + 30.0 * i));
  const StateVector truth{geodetic_to_ecef(user), 0.0, 0.0};
  const RtnFrame rtn = reference_rtn(orbit, user, ep.front(), ep.back());
  for (auto v : {VerticalConstraint::LocalUp, VerticalConstraint::EcefZ}) {
    const SolverConfig cfg{25, 1e-4, SolverMode::Horizontal4State, v};
    const TheoryResult t = analyze_geometry(orbit, truth, ep, cfg, 0.5, rtn);
    const double hpos = t.ddop.hddop * 0.5 / t.scaling.gamma;
    const double ac = std::hypot(t.ellipse.along_sigma, t.ellipse.cross_sigma);
    EXPECT_EQ(t.ddop.pddop, t.ddop.hddop);
    EXPECT_LE(ac, hpos * (1.0 + 1e-9));
    // East/north is an orthonormal horizontal basis, so nothing is lost.
    if (v == VerticalConstraint::LocalUp) {
      EXPECT_NEAR(ac, hpos, 1e-9 * hpos);
    }
    const double k = std::sqrt(chi2_2dof(0.95));
    EXPECT_NEAR(std::hypot(t.ellipse.ellipse.semi_major, t.ellipse.ellipse.semi_minor), k * ac, 1e-9 * k * ac);
  }
}

INSTANTIATE_TEST_SUITE_P(Passes, GeometryTest, ::testing::Range(0, 6));

TEST(Analyze, CovarianceMatchesFiniteDifferenceJacobian) {
  const GeodeticPosition user{41.3976, 2.1497, 60.0};
  const UtcInstant ref = parse_utc("2025-04-14T17:33:00Z");
  oracle::Geometry g;
  g.orbit = synthesize_pass(user, 715e3, 50.0, ref, 10.0);
  g.theta = {geodetic_to_ecef(user), 0.0, 0.0};
  for (int i = 0; i < 20; ++i) g.epochs.push_back(add_seconds(ref, -190.0 + 20.0 * i));
  const SolverConfig cfg{25, 1e-4, SolverMode::Horizontal4State, VerticalConstraint::EcefZ};
  const TheoryResult t = analyze_geometry(g.orbit, g.theta, g.epochs, cfg, 1.0,
                                          reference_rtn(g.orbit, user, g.epochs.front(), g.epochs.back()));

  const MeasurementSet set = noiseless_measurements(g.orbit, g.theta, g.epochs);
  const Eigen::MatrixXd fd = oracle::fd_jacobian(g);
  Eigen::MatrixXd h(fd.rows(), 4);
  h << fd.col(0), fd.col(1), fd.col(3), fd.col(4);
  const Eigen::MatrixXd hs = h * scaling_diagonal(4, t.scaling).asDiagonal();
  const Eigen::MatrixXd ref_c = (hs.transpose() * weight_matrix(set) * hs).inverse();
  EXPECT_NEAR(t.ddop.hddop, std::sqrt(ref_c.topLeftCorner(2, 2).trace()), 1e-5 * t.ddop.hddop);
  EXPECT_NEAR(t.ddop.cddop, std::sqrt(ref_c(2, 2)), 1e-5 * t.ddop.cddop);
  EXPECT_NEAR(t.ddop.tddop, std::sqrt(ref_c(3, 3)), 1e-5 * t.ddop.tddop);
}

TEST(Covariance, SymmetricPositiveDefiniteAndRowOrderFree) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 50; ++t) {
    const int m = 6 + t % 20, k = 4 + t % 2;
    Eigen::MatrixXd j(m, k);
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < k; ++c) j(i, c) = n01(rng);
      w(i) = 0.1 + std::abs(n01(rng));
    }
    const Eigen::MatrixXd c = ddop_covariance(j, Eigen::DiagonalMatrix<double, Eigen::Dynamic>(w));
    EXPECT_EQ(c, c.transpose());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff(), 0.0);

    Eigen::PermutationMatrix<Eigen::Dynamic> p(m);
    p.setIdentity();
    std::shuffle(p.indices().data(), p.indices().data() + m, rng);
    const Eigen::MatrixXd jp = p * j;
    const Eigen::VectorXd wp = p * w;
    const Eigen::MatrixXd cp = ddop_covariance(jp, Eigen::DiagonalMatrix<double, Eigen::Dynamic>(wp));
    EXPECT_LT((cp - c).norm(), 1e-10 * c.norm());
  }
}

TEST(Analyze, DoublingSigmaDoublesErrorsOnly) {
  const GeodeticPosition user{41.3976, 2.1497, 60.0};
  const UtcInstant ref = parse_utc("2025-04-14T17:33:00Z");
  const OrbitSource orbit = synthesize_pass(user, 715e3, 50.0, ref, 10.0);
  std::vector<UtcInstant> ep;
  for (int i = 0; i < 15; ++i) ep.push_back(add_seconds(ref, -175.0 + 25.0 * i));
  const StateVector truth{geodetic_to_ecef(user), 0.0, 0.0};
  const RtnFrame rtn = reference_rtn(orbit, user, ep.front(), ep.back());
  const SolverConfig cfg{25, 1e-4, SolverMode::Horizontal4State, VerticalConstraint::EcefZ};
  const TheoryResult a = analyze_geometry(orbit, truth, ep, cfg, 0.5, rtn);
  const TheoryResult b = analyze_geometry(orbit, truth, ep, cfg, 1.0, rtn);
  EXPECT_EQ(a.ddop.hddop, b.ddop.hddop);
  EXPECT_EQ(a.ddop.cddop, b.ddop.cddop);
  EXPECT_EQ(a.ddop.tddop, b.ddop.tddop);
  EXPECT_NEAR(b.ellipse.along_sigma, 2.0 * a.ellipse.along_sigma, 1e-12 * b.ellipse.along_sigma);
  EXPECT_NEAR(b.ellipse.cross_sigma, 2.0 * a.ellipse.cross_sigma, 1e-12 * b.ellipse.cross_sigma);
  EXPECT_NEAR(b.ellipse.ellipse.semi_major, 2.0 * a.ellipse.ellipse.semi_major, 1e-12 * b.ellipse.ellipse.semi_major);
  EXPECT_NEAR(b.ddop.position_sigma, 2.0 * a.ddop.position_sigma, 1e-12 * b.ddop.position_sigma);
  EXPECT_NEAR(b.ddop.time_offset_sigma, 2.0 * a.ddop.time_offset_sigma, 1e-12 * b.ddop.time_offset_sigma);
}
