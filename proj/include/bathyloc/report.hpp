#ifndef BATHYLOC_REPORT_HPP
#define BATHYLOC_REPORT_HPP

#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>

#include "bathyloc/sim.hpp"

namespace bathyloc {

inline constexpr int kReportVersion = 1;

/// Shortest decimal string that parses back to the same double. Locale-free,
/// so identical values always serialize to identical bytes.
std::string format_double(double v);

/// Per-step trajectory table: t, truth, measurements, one estimate triple per
/// filter, plus an ESS column for particle filters. RFC 4180, '.' decimals.
std::string trajectory_csv(const TruthRun& truth, std::span<const RunReport> reports);

/// Single-run report document (report_version 1).
nlohmann::json run_report_json(const BenchmarkConfig& cfg, const BathymetryGrid& grid,
                               const TruthRun& truth, std::span<const RunReport> reports);

/// One row per (replicate, filter) of a benchmark.
std::string per_run_csv(const BenchmarkConfig& cfg, const BenchResult& result);

/// Aggregate benchmark document keyed (lake, motion, filter).
nlohmann::json bench_report_json(const BenchmarkConfig& cfg, const BenchResult& result);

/// Serialization used for every emitted document: 2-space indent, sorted
/// keys, trailing newline.
std::string dump_json(const nlohmann::json& doc);

} // namespace bathyloc

#endif
