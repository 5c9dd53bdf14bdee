#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "leodop/ddop.hpp"
#include "leodop/doppler.hpp"
#include "leodop/estimator.hpp"
#include "leodop/scenario.hpp"

namespace leodop {

struct McConfig {
  int n_trials = 1000;
  std::uint64_t base_seed = 1;
  NoiseModel noise;
  SolverConfig solver;
  double confidence = 0.95;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct TrialOutcome {
  bool converged = false;
  double along = NAN;
  double cross = NAN;
  double east = NAN;
  double north = NAN;
  int iterations = 0;
};

struct McResult {
  std::vector<TrialOutcome> trials;  // indexed by trial number
  std::vector<double> along_errors;  // converged trials only, in trial order
  std::vector<double> cross_errors;
  Eigen::Matrix2d empirical_cov = Eigen::Matrix2d::Zero();
  Eigen::Vector2d empirical_mean = Eigen::Vector2d::Zero();
  ConfidenceEllipse empirical_ellipse;
  TheoreticalEllipse theoretical;
  DdopResult ddop;
  int converged_count = 0;
  double containment_fraction = 0.0;
};

/// Seed of trial `index`: splitmix64 finaliser over a counter derived from the
/// base seed, so every trial has its own stream regardless of scheduling.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t index) {
  std::uint64_t z = base_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Sample covariance (divisor N-1) of (along, cross) pairs and its ellipse.
inline ConfidenceEllipse empirical_ellipse(const std::vector<double>& along, const std::vector<double>& cross,
                                           double confidence = 0.95, Eigen::Matrix2d* covariance = nullptr) {
  if (along.size() != cross.size()) throw Error(ErrorCode::InvalidArgument, "sample lists differ in length");
  if (along.size() < 2) throw Error(ErrorCode::DegenerateSamples, "need at least two samples");
  const auto n = static_cast<double>(along.size());
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < along.size(); ++i) mean += Eigen::Vector2d(along[i], cross[i]);
  mean /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < along.size(); ++i) {
    const Eigen::Vector2d d = Eigen::Vector2d(along[i], cross[i]) - mean;
    cov += d * d.transpose();
  }
  cov /= (n - 1.0);
  if (covariance) *covariance = cov;
  ConfidenceEllipse e;
  if (!ellipse_from_covariance(cov, confidence, e)) {
    throw Error(ErrorCode::DegenerateSamples, "sample covariance is rank deficient");
  }
  return e;
}

/// Repeated noisy solves over one fixed geometry. Every trial starts from the
/// true state; trials that fail to converge are excluded from the statistics.
/// `epochs` replaces the scenario window; `rtn`, if given, fixes the
/// along/cross axes (default: closest approach within the epochs).
inline McResult run_trials(const Scenario& scenario, const std::vector<UtcInstant>& epochs, const McConfig& mc,
                           const RtnFrame* reference = nullptr) {
  if (mc.n_trials < 2) throw Error(ErrorCode::InvalidArgument, "n_trials must be >= 2");
  if (epochs.empty()) throw Error(ErrorCode::InvalidArgument, "no epochs");
  const StateVector truth = scenario.truth();
  const EnuFrame enu = enu_frame(truth.position_ecef);
  const RtnFrame rtn = reference ? *reference
                                 : reference_rtn(scenario.orbit, scenario.user, epochs.front(), epochs.back(),
                                                 scenario.mask_deg);
  const TrackAxes axes = track_axes(rtn, enu);

  const MeasurementSet clean =
      noiseless_measurements(scenario.orbit, truth, epochs, scenario.carrier_wavelength, scenario.mask_deg);
  const Eigen::VectorXd h = clean.range_rates();

  McResult out;
  {
    const TheoryResult theory =
        analyze_geometry(scenario.orbit, truth, epochs, mc.solver, mc.noise.sigma_dopp > 0.0 ? mc.noise.sigma_dopp : 1.0,
                         rtn, scenario.mask_deg, mc.confidence);
    out.theoretical = theory.ellipse;
    out.ddop = theory.ddop;
    if (!(mc.noise.sigma_dopp > 0.0)) {
      out.theoretical.covariance_along_cross.setZero();
      out.theoretical.along_sigma = out.theoretical.cross_sigma = 0.0;
      out.theoretical.ellipse.semi_major = out.theoretical.ellipse.semi_minor = 0.0;
    }
  }

  out.trials.assign(static_cast<std::size_t>(mc.n_trials), TrialOutcome{});
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= mc.n_trials) return;
      try {
        MeasurementSet set = clean;
        apply_noise(set, h, mc.noise, trial_seed(mc.base_seed, static_cast<std::uint64_t>(i)));
        TrialOutcome t;
        try {
          const SolveResult r = solve(set, scenario.orbit, truth, mc.solver);
          t.converged = r.converged;
          t.iterations = r.iterations;
          if (r.converged) {
            const Vec3 err = enu.horizontal(r.estimate.position_ecef - truth.position_ecef);
            t.along = err.dot(axes.along);
            t.cross = err.dot(axes.cross);
            t.east = err.dot(enu.east);
            t.north = err.dot(enu.north);
          }
        } catch (const Error& e) {
          if (!is_numerical(e.code()) && e.code() != ErrorCode::InvalidArgument &&
              e.code() != ErrorCode::EpochOutOfRange) {
            throw;
          }
        }
        out.trials[static_cast<std::size_t>(i)] = t;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(mc.n_trials);
      }
    }
  };
  unsigned n_threads = mc.threads ? mc.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(mc.n_trials));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& t : out.trials) {
    if (!t.converged) continue;
    out.along_errors.push_back(t.along);
    out.cross_errors.push_back(t.cross);
  }
  out.converged_count = static_cast<int>(out.along_errors.size());
  if (out.converged_count < static_cast<int>(std::ceil(0.9 * mc.n_trials))) {
    throw Error(ErrorCode::TooFewConverged, std::to_string(out.converged_count) + " of " +
                                                std::to_string(mc.n_trials) + " trials converged");
  }

  for (std::size_t i = 0; i < out.along_errors.size(); ++i) out.empirical_mean += Eigen::Vector2d(out.along_errors[i], out.cross_errors[i]);
  out.empirical_mean /= static_cast<double>(out.converged_count);
  if (mc.noise.sigma_dopp > 0.0) {
    out.empirical_ellipse = empirical_ellipse(out.along_errors, out.cross_errors, mc.confidence, &out.empirical_cov);
    const Eigen::Matrix2d pinv = out.theoretical.covariance_along_cross.inverse();
    const double k2 = chi2_2dof(mc.confidence);
    int inside = 0;
    for (std::size_t i = 0; i < out.along_errors.size(); ++i) {
      const Eigen::Vector2d x(out.along_errors[i], out.cross_errors[i]);
      if (x.dot(pinv * x) <= k2) ++inside;
    }
    out.containment_fraction = static_cast<double>(inside) / static_cast<double>(out.converged_count);
  } else {
    // Noise-free: the cloud collapses to the truth; report its raw spread.
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < out.along_errors.size(); ++i) {
      const Eigen::Vector2d d = Eigen::Vector2d(out.along_errors[i], out.cross_errors[i]) - out.empirical_mean;
      cov += d * d.transpose();
    }
    out.empirical_cov = cov / static_cast<double>(out.converged_count - 1);
    out.containment_fraction = 1.0;
  }
  return out;
}

inline McResult run_trials(const Scenario& scenario, const McConfig& mc) {
  return run_trials(scenario, scenario.epochs(), mc);
}

}  // namespace leodop
