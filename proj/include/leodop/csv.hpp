#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "leodop/experiments.hpp"
#include "leodop/montecarlo.hpp"

namespace leodop {

/// Shortest round-trip-safe text for a double; "nan" for NaN.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

/// Optional empirical overlay for a sweep row (1-sigma standard deviations).
struct EmpiricalOverlay {
  double along_m = NAN;
  double cross_m = NAN;
  int converged = 0;
};

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows, bool confidence_scaled,
                            const std::vector<EmpiricalOverlay>* overlay = nullptr) {
  const bool secondary = !rows.empty() && !std::isnan(rows.front().secondary_value);
  std::vector<std::string> head{"parameter"};
  head.push_back(rows.empty() ? "value" : rows.front().parameter_name + "_" + rows.front().unit);
  if (secondary) head.push_back("sampling_interval_s");
  head.push_back("along_error_m");
  head.push_back("cross_error_m");
  head.push_back("hddop");
  head.push_back("error_level");
  head.push_back("status");
  if (overlay) {
    head.push_back("empirical_along_m");
    head.push_back("empirical_cross_m");
    head.push_back("empirical_converged");
  }
  write_row(out, head);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::vector<std::string> c{r.parameter_name, csv_number(r.parameter_value)};
    if (secondary) c.push_back(csv_number(r.secondary_value));
    c.push_back(csv_number(r.along_error_m));
    c.push_back(csv_number(r.cross_error_m));
    c.push_back(csv_number(r.hddop));
    c.push_back(confidence_scaled ? "95pct" : "1sigma");
    c.push_back(status_name(r.status));
    if (overlay) {
      const auto& o = overlay->at(i);
      c.push_back(csv_number(o.along_m));
      c.push_back(csv_number(o.cross_m));
      c.push_back(std::to_string(o.converged));
    }
    write_row(out, c);
  }
}

inline void write_grid_csv(std::ostream& out, const std::vector<GridRecord>& rows, bool confidence_scaled) {
  write_row(out, {"latitude_deg", "longitude_deg", "track_distance_m", "along_error_m", "cross_error_m", "hddop",
                  "error_level", "status"});
  for (const auto& r : rows) {
    write_row(out, {csv_number(r.latitude_deg), csv_number(r.longitude_deg), csv_number(r.track_distance_m),
                    csv_number(r.along_error_m), csv_number(r.cross_error_m), csv_number(r.hddop),
                    confidence_scaled ? "95pct" : "1sigma", status_name(r.status)});
  }
}

inline void write_trials_csv(std::ostream& out, const McResult& r) {
  write_row(out, {"trial", "converged", "along_m", "cross_m", "east_m", "north_m"});
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const auto& t = r.trials[i];
    write_row(out, {std::to_string(i), t.converged ? "1" : "0", csv_number(t.along), csv_number(t.cross),
                    csv_number(t.east), csv_number(t.north)});
  }
}

}  // namespace leodop
