#ifndef BATHYLOC_CONFIG_HPP
#define BATHYLOC_CONFIG_HPP

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "bathyloc/sim.hpp"

namespace bathyloc {

/// Parses and validates a benchmark/run configuration document. Unknown keys
/// are rejected; missing optional fields take the documented defaults.
/// Throws ConfigError with the offending key in the message.
BenchmarkConfig parse_config(const nlohmann::json& doc);
BenchmarkConfig parse_config_text(const std::string& text);
BenchmarkConfig load_config_file(const std::string& path);

/// Fully resolved echo of a configuration (defaults materialized), as
/// embedded in every report.
nlohmann::json config_to_json(const BenchmarkConfig& cfg);

/// Parses a synthetic-lake spec document (the `lake.synthetic` object).
SyntheticLakeSpec parse_lake_spec(const nlohmann::json& doc);
nlohmann::json lake_spec_to_json(const SyntheticLakeSpec& spec);

} // namespace bathyloc

#endif
