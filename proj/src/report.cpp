#include "bathyloc/report.hpp"

#include <charconv>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bathyloc/config.hpp"

namespace bathyloc {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

const char* motion_name(const MotionModel& m) { return m.is_mixed() ? "mixed" : "linear"; }

bool wants_ess(FilterKind k) { return k == FilterKind::pf || k == FilterKind::mpf; }

} // namespace

std::string trajectory_csv(const TruthRun& truth, std::span<const RunReport> reports) {
  std::ostringstream out;
  out << "t,truth_x,truth_y,truth_z,meas_depth,meas_altitude";
  for (const RunReport& r : reports) {
    const char* name = filter_name(r.filter);
    out << ',' << name << "_x," << name << "_y," << name << "_z";
    if (wants_ess(r.filter)) out << ',' << name << "_ess";
  }
  out << "\r\n";

  for (std::size_t t = 0; t < truth.length(); ++t) {
    out << t << ',' << format_double(truth.states[t].px) << ','
        << format_double(truth.states[t].py) << ',' << format_double(truth.states[t].pz) << ','
        << format_double(truth.measurements[t].depth) << ','
        << format_double(truth.measurements[t].altitude);
    for (const RunReport& r : reports) {
      const State& e = r.estimates[t];
      out << ',' << format_double(e.px) << ',' << format_double(e.py) << ','
          << format_double(e.pz);
      if (wants_ess(r.filter)) {
        out << ',' << (t < r.ess.size() ? format_double(r.ess[t]) : "");
      }
    }
    out << "\r\n";
  }
  return out.str();
}

namespace {

json report_entry(const RunReport& r, bool include_estimates) {
  json entry{{"filter", filter_name(r.filter)},
             {"seed", r.seed},
             {"rmse_x", r.rmse_x},
             {"rmse_y", r.rmse_y},
             {"rmse_z", r.rmse_z},
             {"rmse_horizontal", horizontal_rmse(r)},
             {"runtime_seconds", r.runtime_seconds},
             {"diverged", r.diverged},
             {"steps_completed", r.steps_completed}};
  if (include_estimates) {
    json est = json::array();
    for (const State& s : r.estimates) est.push_back({s.px, s.py, s.pz});
    entry["estimates"] = est;
  }
  return entry;
}

} // namespace

json run_report_json(const BenchmarkConfig& cfg, const BathymetryGrid& grid,
                     const TruthRun& truth, std::span<const RunReport> reports) {
  json filters = json::array();
  for (const RunReport& r : reports) {
    filters.push_back(report_entry(r, /*include_estimates=*/true));
  }
  return json{{"report_version", kReportVersion},
              {"kind", "run"},
              {"config", config_to_json(cfg)},
              {"lake",
               {{"name", cfg.lake.name},
                {"ncols", grid.ncols()},
                {"nrows", grid.nrows()},
                {"cell_size", grid.cell_size()},
                {"min_height", grid.min_height()},
                {"max_height", grid.max_height()}}},
              {"truth",
               {{"seed", truth.seed},
                {"steps", truth.length()},
                {"truncated", truth.truncated}}},
              {"reports", filters}};
}

std::string per_run_csv(const BenchmarkConfig& cfg, const BenchResult& result) {
  std::ostringstream out;
  out << "lake,motion,filter,replicate,seed,steps_completed,rmse_x,rmse_y,rmse_z,"
         "rmse_horizontal,runtime_seconds,diverged\r\n";
  for (const RunRecord& rec : result.runs) {
    const RunReport& r = rec.report;
    out << cfg.lake.name << ',' << motion_name(cfg.motion) << ',' << filter_name(rec.filter)
        << ',' << rec.replicate << ',' << r.seed << ',' << r.steps_completed << ','
        << format_double(r.rmse_x) << ',' << format_double(r.rmse_y) << ','
        << format_double(r.rmse_z) << ',' << format_double(horizontal_rmse(r)) << ','
        << format_double(r.runtime_seconds) << ',' << (r.diverged ? "true" : "false")
        << "\r\n";
  }
  return out.str();
}

namespace {

json stats_json(const Stats& s) {
  return json{{"mean", s.mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}};
}

} // namespace

json bench_report_json(const BenchmarkConfig& cfg, const BenchResult& result) {
  json rows = json::array();
  for (const FilterAggregate& agg : result.aggregates) {
    rows.push_back(json{{"lake", cfg.lake.name},
                        {"motion", motion_name(cfg.motion)},
                        {"filter", filter_name(agg.filter)},
                        {"runs", agg.runs},
                        {"rmse_x", stats_json(agg.rmse_x)},
                        {"rmse_y", stats_json(agg.rmse_y)},
                        {"rmse_z", stats_json(agg.rmse_z)},
                        {"rmse_horizontal", stats_json(agg.rmse_horizontal)},
                        {"runtime_seconds", stats_json(agg.runtime)},
                        {"diverged", agg.diverged}});
  }
  return json{{"report_version", kReportVersion},
              {"kind", "bench"},
              {"config", config_to_json(cfg)},
              {"results", rows},
              {"truncated_truths", result.truncated_truths}};
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

} // namespace bathyloc
