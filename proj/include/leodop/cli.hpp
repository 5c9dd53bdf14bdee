#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "leodop/config.hpp"
#include "leodop/csv.hpp"
#include "leodop/experiments.hpp"
#include "leodop/montecarlo.hpp"
#include "leodop/scenario.hpp"

namespace leodop {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

namespace cli_detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// "error[Code]: message" without the code prefix carried in what().
inline void report(std::ostream& err, const Error& e) {
  std::string msg = e.what();
  const std::string prefix = std::string(code_name(e.code())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  err << "error[" << code_name(e.code()) << "]: " << msg << '\n';
}

struct Common {
  std::string scenario_path;
  std::string out_path;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  bool seed_set = false;
  bool sigma_set = false;
};

inline void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("-s,--scenario", c.scenario_path, "scenario file (default: $LEODOP_SCENARIO_DIR/default.cfg)");
  app->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& v) { c.seed = v; c.seed_set = true; }, "override the scenario noise seed");
  app->add_option_function<double>(
         "--sigma", [&c](const double& v) { c.sigma = v; c.sigma_set = true; }, "override noise.sigma_dopp_mps")
      ->check(CLI::NonNegativeNumber);
  if (with_out) app->add_option("-o,--out", c.out_path, "output CSV file (default: standard output)");
}

inline Scenario load(const Common& c, std::ostream& err) {
  LoadedScenario ls = load_scenario(c.scenario_path);
  for (const auto& d : ls.defaults_applied) err << "default: " << d << '\n';
  if (c.seed_set) ls.scenario.noise.seed = c.seed;
  if (c.sigma_set) ls.scenario.noise.sigma_dopp = c.sigma;
  return ls.scenario;
}

/// Calls `body` with the --out file, or with `fallback` when no path was given.
inline void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ValidationError, "cannot write '" + path + "'");
  body(f);
  f.flush();
  if (!f) throw Error(ErrorCode::ValidationError, "write to '" + path + "' failed");
}

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline double mean_altitude(const Scenario& sc) {
  const auto ep = sc.epochs();
  std::vector<SatelliteState> states;
  for (const auto& t : {ep.front(), ep[ep.size() / 2], ep.back()}) {
    states.push_back(orbit_detail::kinematic_state(sc.orbit, t, 0.0));
  }
  return mean_orbit_radius(states) - kEarthRadiusMean;
}

// Subcommands ---------------------------------------------------------------

inline void run_propagate(const Common& c, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(c, err);
  const EnuFrame enu = enu_frame(sc.user);
  with_output(c.out_path, out, [&](std::ostream& o) {
    write_row(o, {"epoch_utc", "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps", "ax_mps2", "ay_mps2", "az_mps2",
                  "elevation_deg", "azimuth_deg", "range_m"});
    for (const auto& t : sc.epochs()) {
      const SatelliteState s = propagate(sc.orbit, t);
      const LookAngles la = elevation_azimuth(enu, s.position);
      write_row(o, {format_utc(t), csv_number(s.position.x()), csv_number(s.position.y()), csv_number(s.position.z()),
                    csv_number(s.velocity.x()), csv_number(s.velocity.y()), csv_number(s.velocity.z()),
                    csv_number(s.acceleration.x()), csv_number(s.acceleration.y()), csv_number(s.acceleration.z()),
                    csv_number(la.elevation_deg), csv_number(la.azimuth_deg),
                    csv_number((s.position - enu.origin_ecef).norm())});
    }
  });
}

inline void run_predict(const Common& c, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(c, err);
  const MeasurementSet set =
      noiseless_measurements(sc.orbit, sc.truth(), sc.epochs(), sc.carrier_wavelength, sc.mask_deg);
  with_output(c.out_path, out, [&](std::ostream& o) {
    write_row(o, {"epoch_utc", "range_rate_mps", "doppler_hz", "elevation_deg"});
    for (const auto& m : set.measurements) {
      write_row(o, {format_utc(m.epoch), csv_number(m.range_rate),
                    csv_number(range_rate_to_hz(m.range_rate, sc.carrier_wavelength)), csv_number(m.elevation_deg)});
    }
  });
}

struct SolveOptions {
  double east_offset_m = 0.0;
  double north_offset_m = 0.0;
  double initial_time_offset_s = 0.0;
  double initial_drift_mps = 0.0;
};

/// Initial guess displaced horizontally from the truth (along the plane the
/// solver moves in) with the given clock terms.
inline StateVector displaced_guess(const Scenario& sc, double east_m, double north_m) {
  const StateVector truth = sc.truth();
  const EnuFrame enu = enu_frame(sc.user);
  StateVector g = truth;
  if (sc.solver.vertical == VerticalConstraint::EcefZ && sc.solver.mode == SolverMode::Horizontal4State) {
    Vec3 d = east_m * enu.east + north_m * enu.north;
    d.z() = 0.0;
    if (d.norm() > 0.0) d *= std::hypot(east_m, north_m) / d.norm();
    g.position_ecef += d;
  } else {
    g.position_ecef += east_m * enu.east + north_m * enu.north;
    GeodeticPosition geo = ecef_to_geodetic(g.position_ecef);
    geo.height_m = sc.user.height_m;
    g.position_ecef = geodetic_to_ecef(geo);
  }
  return g;
}

inline int run_solve(const Common& c, const SolveOptions& so, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(c, err);
  const StateVector truth = sc.truth();
  const auto epochs = sc.epochs();
  const MeasurementSet set =
      generate_measurements(sc.orbit, truth, epochs, sc.noise, sc.carrier_wavelength, sc.mask_deg);
  StateVector init = displaced_guess(sc, so.east_offset_m, so.north_offset_m);
  init.time_offset = so.initial_time_offset_s;
  init.clock_drift_scaled = so.initial_drift_mps;
  const SolveResult r = solve(set, sc.orbit, init, sc.solver);

  const EnuFrame enu = enu_frame(sc.user);
  const RtnFrame rtn = reference_rtn(sc.orbit, sc.user, epochs.front(), epochs.back(), sc.mask_deg);
  const AlongCross ac = decompose_error(r.estimate, truth, rtn, enu);
  const Vec3 e = enu.to_enu(r.estimate.position_ecef - truth.position_ecef);
  std::ostream& o = out;
  o << "orbit: " << sc.orbit.describe() << '\n';
  o << "epochs: " << epochs.size() << " (" << format_utc(epochs.front()) << " to " << format_utc(epochs.back()) << ")\n";
  o << "iterations: " << r.iterations << '\n';
  o << "converged: " << yes_no(r.converged) << '\n';
  if (std::isfinite(r.estimate.position_ecef.norm()) && r.estimate.position_ecef.norm() > 6.3e6) {
    const GeodeticPosition g = ecef_to_geodetic(r.estimate.position_ecef);
    o << "latitude_deg: " << fmt("%.9f", g.latitude_deg) << '\n';
    o << "longitude_deg: " << fmt("%.9f", g.longitude_deg) << '\n';
    o << "height_m: " << fmt("%.3f", g.height_m) << '\n';
  }
  o << "clock_drift_scaled_mps: " << fmt("%.6f", r.estimate.clock_drift_scaled) << '\n';
  o << "time_offset_s: " << fmt("%.9f", r.estimate.time_offset) << '\n';
  o << "along_error_m: " << fmt("%.6f", ac.along) << '\n';
  o << "cross_error_m: " << fmt("%.6f", ac.cross) << '\n';
  o << "east_error_m: " << fmt("%.6f", e.x()) << '\n';
  o << "north_error_m: " << fmt("%.6f", e.y()) << '\n';
  o << "up_error_m: " << fmt("%.6f", e.z()) << '\n';
  o << "horizontal_error_m: " << fmt("%.6f", std::hypot(e.x(), e.y())) << '\n';
  o << "weighted_residual_norm_mps: " << fmt("%.6g", r.weighted_residual_norm) << '\n';
  if (!r.converged) {
    report(err, Error(ErrorCode::DidNotConverge, "no convergence after " + std::to_string(r.iterations) + " iterations"));
    return kExitNumerical;
  }
  return kExitOk;
}

inline void run_ddop(const Common& c, double confidence, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(c, err);
  const auto epochs = sc.epochs();
  const RtnFrame rtn = reference_rtn(sc.orbit, sc.user, epochs.front(), epochs.back(), sc.mask_deg);
  const TheoryResult t =
      analyze_geometry(sc.orbit, sc.truth(), epochs, sc.solver, sc.noise.sigma_dopp, rtn, sc.mask_deg, confidence);
  const double k = std::sqrt(chi2_2dof(confidence));
  std::ostream& o = out;
  o << "orbit: " << sc.orbit.describe() << '\n';
  o << "epochs: " << epochs.size() << '\n';
  o << "a_orb_m: " << fmt("%.3f", t.scaling.a_orb) << '\n';
  o << "gamma_per_s: " << fmt("%.9e", t.scaling.gamma) << '\n';
  o << "eta_mps2: " << fmt("%.9e", t.scaling.eta) << '\n';
  const std::pair<const char*, double> rows[] = {
      {"PDDOP", t.ddop.pddop}, {"HDDOP", t.ddop.hddop}, {"CDDOP", t.ddop.cddop}, {"TDDOP", t.ddop.tddop}};
  for (const auto& [name, v] : rows) {
    o << name << ": " << fmt("%.6g", v) << " (" << rating_name(classify_dop(v)) << ")\n";
  }
  o << "sigma_dopp_mps: " << fmt("%.6g", sc.noise.sigma_dopp) << '\n';
  o << "position_sigma_m: " << fmt("%.6g", t.ddop.position_sigma) << '\n';
  o << "time_offset_sigma_s: " << fmt("%.6g", t.ddop.time_offset_sigma) << '\n';
  o << "drift_sigma: " << fmt("%.6g", t.ddop.drift_sigma) << '\n';
  o << "along_sigma_m: " << fmt("%.6g", t.ellipse.along_sigma) << '\n';
  o << "cross_sigma_m: " << fmt("%.6g", t.ellipse.cross_sigma) << '\n';
  o << "confidence: " << fmt("%.4g", confidence) << '\n';
  o << "along_extent_m: " << fmt("%.6g", k * t.ellipse.along_sigma) << '\n';
  o << "cross_extent_m: " << fmt("%.6g", k * t.ellipse.cross_sigma) << '\n';
  o << "ellipse_semi_major_m: " << fmt("%.6g", t.ellipse.ellipse.semi_major) << '\n';
  o << "ellipse_semi_minor_m: " << fmt("%.6g", t.ellipse.ellipse.semi_minor) << '\n';
  o << "ellipse_orientation_deg: " << fmt("%.4f", t.ellipse.ellipse.orientation / kDeg) << '\n';
}

inline void run_montecarlo(const Common& c, int trials, unsigned threads, double confidence, std::ostream& out,
                           std::ostream& err) {
  const Scenario sc = load(c, err);
  McConfig mc;
  mc.n_trials = trials > 0 ? trials : sc.trials;
  mc.base_seed = sc.noise.seed;
  mc.noise = sc.noise;
  mc.solver = sc.solver;
  mc.confidence = confidence;
  mc.threads = threads;
  const McResult r = run_trials(sc, mc);
  if (!c.out_path.empty()) with_output(c.out_path, out, [&](std::ostream& o) { write_trials_csv(o, r); });
  std::ostream& o = out;
  o << "trials: " << mc.n_trials << '\n';
  o << "converged: " << r.converged_count << '\n';
  o << "confidence: " << fmt("%.4g", confidence) << '\n';
  o << "empirical_mean_along_m: " << fmt("%.6g", r.empirical_mean(0)) << '\n';
  o << "empirical_mean_cross_m: " << fmt("%.6g", r.empirical_mean(1)) << '\n';
  o << "empirical_along_sigma_m: " << fmt("%.6g", std::sqrt(r.empirical_cov(0, 0))) << '\n';
  o << "empirical_cross_sigma_m: " << fmt("%.6g", std::sqrt(r.empirical_cov(1, 1))) << '\n';
  o << "theoretical_along_sigma_m: " << fmt("%.6g", r.theoretical.along_sigma) << '\n';
  o << "theoretical_cross_sigma_m: " << fmt("%.6g", r.theoretical.cross_sigma) << '\n';
  o << "empirical_semi_major_m: " << fmt("%.6g", r.empirical_ellipse.semi_major) << '\n';
  o << "empirical_semi_minor_m: " << fmt("%.6g", r.empirical_ellipse.semi_minor) << '\n';
  o << "theoretical_semi_major_m: " << fmt("%.6g", r.theoretical.ellipse.semi_major) << '\n';
  o << "theoretical_semi_minor_m: " << fmt("%.6g", r.theoretical.ellipse.semi_minor) << '\n';
  o << "containment_fraction: " << fmt("%.4f", r.containment_fraction) << '\n';
  if (c.out_path.empty()) write_trials_csv(o, r);
}

struct SweepCli {
  bool confidence_scaled = false;
  int montecarlo = 0;
  unsigned threads = 0;
  std::vector<int> counts = kDefaultCounts;
  std::vector<double> intervals = default_intervals();
  std::vector<double> offsets = default_offsets();
  std::vector<double> elevations = default_max_elevations();
  double altitude_m = 0.0;
  double heading_deg = 0.0;
  double interval_s = 60.0;
  int observations = 4;
  GridOptions grid;
};

/// 1-sigma empirical along/cross spread for one sweep row; NaN when the row is
/// unusable or too few trials converge.
inline EmpiricalOverlay overlay_row(const Scenario& sc, const SweepRecord& row, const SweepCli& o) {
  EmpiricalOverlay ov;
  if (row.status != SweepStatus::Ok || row.epochs.empty()) return ov;
  McConfig mc;
  mc.n_trials = o.montecarlo;
  mc.base_seed = sc.noise.seed;
  mc.noise = sc.noise;
  mc.solver = sc.solver;
  mc.threads = o.threads;
  const RtnFrame rtn = reference_rtn(sc.orbit, sc.user, row.epochs.front(), row.epochs.back(), sc.mask_deg);
  try {
    const McResult r = run_trials(sc, row.epochs, mc, &rtn);
    ov.along_m = std::sqrt(r.empirical_cov(0, 0));
    ov.cross_m = std::sqrt(r.empirical_cov(1, 1));
    ov.converged = r.converged_count;
  } catch (const Error& e) {
    if (!is_numerical(e.code())) throw;
  }
  return ov;
}

inline void run_sweep(const std::string& kind, const Common& c, SweepCli o, std::ostream& out, std::ostream& err) {
  const Scenario sc = load(c, err);
  SweepOptions opt;
  opt.confidence_scaled = o.confidence_scaled;
  if (kind == "grid") {
    const auto rows = sweep_user_grid(sc, o.grid, opt);
    with_output(c.out_path, out, [&](std::ostream& f) { write_grid_csv(f, rows, o.confidence_scaled); });
    return;
  }
  std::vector<SweepRecord> rows;
  std::vector<Scenario> row_scenarios;
  if (kind == "count") {
    rows = sweep_observation_count(sc, o.counts, opt);
  } else if (kind == "sampling") {
    rows = sweep_sampling_time(sc, o.intervals, opt, o.observations);
  } else if (kind == "offset") {
    rows = sweep_window_offset(sc, o.intervals, o.offsets, opt, o.observations);
  } else {
    InclinationOptions inc;
    inc.altitude_m = o.altitude_m > 0.0 ? o.altitude_m : mean_altitude(sc);
    const auto ep = sc.epochs();
    inc.reference_epoch = add_seconds(ep.front(), 0.5 * seconds_between(ep.front(), ep.back()));
    inc.heading_deg = o.heading_deg;
    inc.interval_s = o.interval_s;
    inc.observations = o.observations;
    rows = sweep_inclination(sc, o.elevations, inc, opt);
    if (o.montecarlo > 0) {
      for (double target : o.elevations) {
        Scenario s = sc;
        s.orbit = synthesize_pass(sc.user, inc.altitude_m, target, inc.reference_epoch, inc.heading_deg, sc.mask_deg);
        row_scenarios.push_back(s);
      }
    }
  }
  std::vector<EmpiricalOverlay> overlay;
  if (o.montecarlo > 0) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      overlay.push_back(overlay_row(row_scenarios.empty() ? sc : row_scenarios[i], rows[i], o));
    }
  }
  with_output(c.out_path, out, [&](std::ostream& f) {
    write_sweep_csv(f, rows, o.confidence_scaled, o.montecarlo > 0 ? &overlay : nullptr);
  });
}

}  // namespace cli_detail

/// Runs one command line (without the program name). Returns the exit code:
/// 0 success, 1 usage error, 2 data or parse error, 3 numerical failure.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Single-satellite LEO Doppler positioning and DDOP analysis", "leodop"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Common common;
  SolveOptions so;
  SweepCli sw;
  int trials = 0;
  unsigned threads = 0;
  double confidence = 0.95;

  auto* propagate_cmd = app.add_subcommand("propagate", "satellite state table over the scenario window");
  add_common(propagate_cmd, common);
  auto* predict_cmd = app.add_subcommand("predict", "noise-free Doppler series for the true state");
  add_common(predict_cmd, common);

  auto* solve_cmd = app.add_subcommand("solve", "one weighted least-squares solution from simulated data");
  add_common(solve_cmd, common, false);
  solve_cmd->add_option("--east-offset-m,--initial-offset-m", so.east_offset_m, "initial guess east of the truth");
  solve_cmd->add_option("--north-offset-m", so.north_offset_m, "initial guess north of the truth");
  solve_cmd->add_option("--initial-time-offset-s", so.initial_time_offset_s, "initial time offset guess")
      ->check(CLI::Range(-9.999, 9.999));
  solve_cmd->add_option("--initial-drift-mps", so.initial_drift_mps, "initial scaled clock drift guess");

  auto* ddop_cmd = app.add_subcommand("ddop", "DDOP metrics and theoretical confidence ellipse");
  add_common(ddop_cmd, common, false);
  ddop_cmd->add_option("--confidence", confidence, "ellipse confidence level")->check(CLI::Range(0.5, 0.9999));

  auto* mc_cmd = app.add_subcommand("montecarlo", "Monte Carlo validation of the theoretical ellipse");
  add_common(mc_cmd, common);
  mc_cmd->add_option("-n,--trials", trials, "number of trials (default: montecarlo.trials)")->check(CLI::Range(2, 10000000));
  mc_cmd->add_option("-j,--threads", threads, "worker threads (0: all cores)");
  mc_cmd->add_option("--confidence", confidence, "ellipse confidence level")->check(CLI::Range(0.5, 0.9999));

  auto* sweep_cmd = app.add_subcommand("sweep", "theoretical error sweeps");
  sweep_cmd->require_subcommand(1);
  struct Kind {
    const char* name;
    const char* help;
  };
  const Kind kinds[] = {{"count", "number of observations over the window"},
                        {"sampling", "sampling interval from the window start"},
                        {"offset", "window centre offset from closest approach"},
                        {"inclination", "synthetic passes by maximum elevation"},
                        {"grid", "users on a latitude/longitude grid"}};
  std::string chosen_kind;
  for (const auto& k : kinds) {
    auto* sub = sweep_cmd->add_subcommand(k.name, k.help);
    add_common(sub, common);
    sub->add_flag("--ninety-five", sw.confidence_scaled, "report 95% extents instead of 1-sigma errors");
    const std::string name = k.name;
    if (name != "grid") {
      sub->add_option("--montecarlo", sw.montecarlo, "overlay empirical 1-sigma errors from this many trials per row")
          ->check(CLI::NonNegativeNumber);
      sub->add_option("-j,--threads", sw.threads, "worker threads for the overlay (0: all cores)");
    }
    if (name == "count") sub->add_option("--counts", sw.counts, "observation counts")->delimiter(',');
    if (name == "sampling" || name == "offset") {
      sub->add_option("--intervals", sw.intervals, "sampling intervals, s")->delimiter(',');
    }
    if (name == "offset") sub->add_option("--offsets", sw.offsets, "window offsets, s")->delimiter(',');
    if (name == "sampling" || name == "offset" || name == "inclination") {
      sub->add_option("--observations", sw.observations, "observations per window")->check(CLI::Range(4, 100000));
    }
    if (name == "inclination") {
      sub->add_option("--interval", sw.interval_s, "sampling interval, s")->check(CLI::PositiveNumber);
    }
    if (name == "inclination") {
      sub->add_option("--elevations", sw.elevations, "target maximum elevations, deg")->delimiter(',');
      sub->add_option("--altitude-m", sw.altitude_m, "synthetic orbit altitude (default: scenario orbit)");
      sub->add_option("--heading-deg", sw.heading_deg, "ground-track heading at closest approach");
    }
    if (name == "grid") {
      sub->add_option("--lat-min", sw.grid.lat_min, "latitude range start relative to the user, deg");
      sub->add_option("--lat-max", sw.grid.lat_max, "latitude range end relative to the user, deg");
      sub->add_option("--lon-min", sw.grid.lon_min, "longitude range start relative to the user, deg");
      sub->add_option("--lon-max", sw.grid.lon_max, "longitude range end relative to the user, deg");
      sub->add_option("--step", sw.grid.step_deg, "grid step, deg")->check(CLI::PositiveNumber);
      sub->add_option("--observations", sw.grid.observations,
                      "observations centred on closest approach (default: the scenario window)")
          ->check(CLI::Range(4, 100000));
      sub->add_option("--interval", sw.grid.interval_s, "sampling interval with --observations, s")
          ->check(CLI::PositiveNumber);
    }
    sub->callback([&chosen_kind, name] { chosen_kind = name; });
  }

  std::vector<std::string> argv_store{"leodop"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error[Usage]: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (propagate_cmd->parsed()) run_propagate(common, out, err);
    else if (predict_cmd->parsed()) run_predict(common, out, err);
    else if (solve_cmd->parsed()) return run_solve(common, so, out, err);
    else if (ddop_cmd->parsed()) run_ddop(common, confidence, out, err);
    else if (mc_cmd->parsed()) run_montecarlo(common, trials, threads, confidence, out, err);
    else run_sweep(chosen_kind, common, sw, out, err);
  } catch (const Error& e) {
    report(err, e);
    return is_numerical(e.code()) ? kExitNumerical : kExitData;
  } catch (const std::exception& e) {
    err << "error[Internal]: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

inline int dispatch(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace leodop
