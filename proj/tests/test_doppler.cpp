#include <gtest/gtest.h>

#include <cmath>

#include "leodop/doppler.hpp"
#include "leodop/pass.hpp"

using namespace leodop;

namespace {

const GeodeticPosition kUser{41.3976, 2.1497, 60.0};

class DopplerTest : public ::testing::Test {
 protected:
  UtcInstant ref = parse_utc("2025-04-14T17:33:00Z");
  OrbitSource src = OrbitSource::synthetic({kUser, 715e3, 250e3, 20.0, ref});
  StateVector truth{geodetic_to_ecef(kUser), 0.0, 0.0};

  std::vector<UtcInstant> epochs(int n, double step, double start = -150.0) const {
    std::vector<UtcInstant> out;
    for (int i = 0; i < n; ++i) out.push_back(add_seconds(ref, start + i * step));
    return out;
  }
};

}  // namespace

TEST(Units, HzAndRangeRate) {
  const double lambda = kDefaultWavelength;
  EXPECT_NEAR(lambda, 2.1882661167883, 1e-12);
  EXPECT_DOUBLE_EQ(hz_to_range_rate(1000.0, lambda), -1000.0 * lambda);
  EXPECT_DOUBLE_EQ(range_rate_to_hz(hz_to_range_rate(-2345.5, lambda), lambda), -2345.5);
  for (double bad : {0.0, -1.0}) {
    try {
      hz_to_range_rate(1.0, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  }
}

TEST_F(DopplerTest, RangeRateIsDerivativeOfRange) {
  const Vec3 u = truth.position_ecef;
  for (double dt : {-200.0, -10.0, 0.0, 37.0, 180.0}) {
    const UtcInstant t = add_seconds(ref, dt);
    const double h = 1e-3;
    const double rp = (propagate(src, add_seconds(t, h)).position - u).norm();
    const double rm = (propagate(src, add_seconds(t, -h)).position - u).norm();
    EXPECT_NEAR(predict_range_rate(propagate(src, t), u, 0.0), (rp - rm) / (2 * h), 1e-4) << dt;
  }
}

TEST_F(DopplerTest, ClockDriftAddsAndOffsetShifts) {
  const auto ep = epochs(5, 30.0);
  StateVector th = truth;
  const auto base = predict_series(src, truth.position_ecef, th, ep);
  th.clock_drift_scaled = 3.25;
  const auto drifted = predict_series(src, truth.position_ecef, th, ep);
  for (std::size_t i = 0; i < ep.size(); ++i) EXPECT_NEAR(drifted[i] - base[i], 3.25, 1e-12);
  th.clock_drift_scaled = 0.0;
  th.time_offset = 2.0;
  const auto shifted = predict_series(src, truth.position_ecef, th, ep);
  std::vector<UtcInstant> earlier;
  for (const auto& t : ep) earlier.push_back(add_seconds(t, -2.0));
  const auto direct = predict_series(src, truth.position_ecef, truth, earlier);
  for (std::size_t i = 0; i < ep.size(); ++i) EXPECT_NEAR(shifted[i], direct[i], 1e-9);
}

TEST_F(DopplerTest, RangeRateChangesSignAtClosestApproach) {
  const UtcInstant ca = closest_approach(src, kUser, add_seconds(ref, -300), add_seconds(ref, 300));
  EXPECT_LT(predict_range_rate(propagate(src, add_seconds(ca, -5.0)), truth.position_ecef, 0.0), 0.0);
  EXPECT_GT(predict_range_rate(propagate(src, add_seconds(ca, 5.0)), truth.position_ecef, 0.0), 0.0);
  EXPECT_NEAR(predict_range_rate(propagate(src, ca), truth.position_ecef, 0.0), 0.0, 1e-2);
}

TEST_F(DopplerTest, CoincidentPoints) {
  SatelliteState s = propagate(src, ref);
  try {
    predict_range_rate(s, s.position, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoincidentPoints);
  }
}

TEST_F(DopplerTest, NoiselessEqualsModel) {
  const auto ep = epochs(50, 5.0, -120.0);
  const MeasurementSet set = noiseless_measurements(src, truth, ep);
  const auto model = predict_series(src, truth.position_ecef, truth, ep);
  ASSERT_EQ(set.size(), ep.size());
  for (std::size_t i = 0; i < ep.size(); ++i) {
    EXPECT_EQ(set.measurements[i].range_rate, model[i]);
    EXPECT_GE(set.measurements[i].elevation_deg, 5.0);
  }
}

TEST_F(DopplerTest, WindowNotVisibleAndBadEpochs) {
  try {
    noiseless_measurements(src, truth, epochs(3, 600.0, -1200.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowNotVisible);
  }
  auto ep = epochs(3, 10.0);
  std::swap(ep[0], ep[2]);
  try {
    noiseless_measurements(src, truth, ep);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST_F(DopplerTest, NoiseIsSeededAndElevationScaled) {
  const auto ep = epochs(241, 1.0, -120.0);
  NoiseModel n{0.5, true, 42};
  const MeasurementSet a = generate_measurements(src, truth, ep, n);
  const MeasurementSet b = generate_measurements(src, truth, ep, n);
  n.seed = 43;
  const MeasurementSet c = generate_measurements(src, truth, ep, n);
  EXPECT_EQ(a.range_rates(), b.range_rates());
  EXPECT_NE(a.range_rates(), c.range_rates());

  // Normalised residuals over many seeds: mean ~ 0, variance ~ 1.
  const MeasurementSet clean = noiseless_measurements(src, truth, ep);
  double sum = 0.0, sum2 = 0.0;
  int count = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    n.seed = seed;
    const MeasurementSet m = generate_measurements(src, truth, ep, n);
    for (std::size_t i = 0; i < ep.size(); ++i) {
      const double sigma = 0.5 / std::sin(clean.measurements[i].elevation_deg * kDeg);
      EXPECT_DOUBLE_EQ(m.measurements[i].sigma, sigma);
      const double z = (m.measurements[i].range_rate - clean.measurements[i].range_rate) / sigma;
      sum += z;
      sum2 += z * z;
      ++count;
    }
  }
  const double mean = sum / count;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(count));
  EXPECT_NEAR(sum2 / count - mean * mean, 1.0, 0.05);
}

TEST_F(DopplerTest, ZeroSigmaIsNoiseless) {
  const auto ep = epochs(20, 3.0);
  const MeasurementSet m = generate_measurements(src, truth, ep, NoiseModel{0.0, true, 5});
  EXPECT_EQ(m.range_rates(), noiseless_measurements(src, truth, ep).range_rates());
  try {
    generate_measurements(src, truth, ep, NoiseModel{-1.0, true, 5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST_F(DopplerTest, UnscaledNoiseHasConstantSigma) {
  const MeasurementSet m = generate_measurements(src, truth, epochs(10, 10.0), NoiseModel{0.7, false, 3});
  for (const auto& x : m.measurements) EXPECT_DOUBLE_EQ(x.sigma, 0.7);
}

TEST_F(DopplerTest, WeightsAreSineSquaredElevation) {
  MeasurementSet set = noiseless_measurements(src, truth, epochs(10, 20.0));
  const auto w = weight_matrix(set);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double s = std::sin(set.measurements[i].elevation_deg * kDeg);
    EXPECT_DOUBLE_EQ(w.diagonal()(static_cast<Eigen::Index>(i)), s * s);
  }
  set.measurements[3].elevation_deg = 0.0;
  try {
    weight_matrix(set);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroElevation);
  }
  try {
    measurement_sigma(NoiseModel{}, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroElevation);
  }
}

TEST_F(DopplerTest, NoiseHasZeroMeanAndNominalSpread) {
  const auto ep = epochs(241, 1.0, -120.0);
  const MeasurementSet clean = noiseless_measurements(src, truth, ep);
  const Eigen::VectorXd h = clean.range_rates();
  const double sigma = 0.5;
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 1; n < 100000; ++seed) {
    MeasurementSet set = clean;
    apply_noise(set, h, NoiseModel{sigma, false, seed}, seed);
    for (std::size_t i = 0; i < ep.size(); ++i) {
      const double e = set.measurements[i].range_rate - h(static_cast<Eigen::Index>(i));
      sum += e;
      sum2 += e * e;
      ++n;
    }
  }
  EXPECT_LT(std::abs(sum / n), 3.0 * sigma / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(std::sqrt(sum2 / n), sigma, 0.01 * sigma);
}
