// bathyloc command-line frontend. All filtering/benchmark work happens behind
// the shared library's C API; this binary only parses arguments, shuttles
// JSON, and writes files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "bathyloc/bathyloc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;  // config/validation errors
constexpr int kExitRuntime = 3; // runtime/numeric errors

int exit_code_for(bathyloc_status status) {
  switch (status) {
    case BATHYLOC_OK:
      return kExitOk;
    case BATHYLOC_ERROR_NUMERIC:
    case BATHYLOC_ERROR_INTERNAL:
      return kExitRuntime;
    default:
      // Parse, dimension, value, bounds, nodata, config, and input-file
      // errors all trace back to user-supplied inputs.
      return kExitConfig;
  }
}

int fail(bathyloc_status status) {
  std::cerr << "error: " << bathyloc_last_error() << "\n";
  return exit_code_for(status);
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return out.good();
}

struct OutputFormat {
  bool csv = true;
  bool json = true;
};

bool parse_format(const std::string& spec, OutputFormat& fmt) {
  fmt.csv = fmt.json = false;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token == "csv") {
      fmt.csv = true;
    } else if (token == "json") {
      fmt.json = true;
    } else if (!token.empty()) {
      return false;
    }
  }
  return fmt.csv || fmt.json;
}

// Reads the config file and applies command-line overrides on the raw JSON;
// full validation happens inside the library.
int load_config_text(const std::string& path, bool has_seed, std::uint64_t seed,
                     std::string& out_text) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config file: " << path << "\n";
    return kExitConfig;
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (has_seed) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
      return kExitConfig;
    }
    doc["master_seed"] = seed;
    text = doc.dump();
  }
  out_text = text;
  return kExitOk;
}

int cmd_gen_lake(const std::string& profile, int ncols, int nrows, double cell_size,
                 double max_height, double asymmetry, double noise_amplitude,
                 std::uint64_t seed, const std::string& out_path) {
  const nlohmann::json spec{{"profile", profile},
                            {"ncols", ncols},
                            {"nrows", nrows},
                            {"cell_size", cell_size},
                            {"max_height", max_height},
                            {"asymmetry", asymmetry},
                            {"noise_amplitude", noise_amplitude},
                            {"seed", seed}};

  bathyloc_grid* grid = nullptr;
  bathyloc_status status = bathyloc_grid_generate(spec.dump().c_str(), &grid);
  if (status != BATHYLOC_OK) return fail(status);

  status = bathyloc_grid_save_file(grid, out_path.c_str());
  if (status != BATHYLOC_OK) {
    bathyloc_grid_free(grid);
    std::cerr << "error: " << bathyloc_last_error() << "\n";
    return kExitRuntime;
  }

  bathyloc_grid_info info{};
  bathyloc_grid_get_info(grid, &info);
  bathyloc_grid_free(grid);

  std::printf("wrote %s\n", out_path.c_str());
  std::printf("  profile: %s, %dx%d cells, cell size %g m\n", profile.c_str(), info.ncols,
              info.nrows, info.cell_size);
  std::printf("  interior bounds: x [%g, %g] m, y [%g, %g] m\n", info.min_x, info.max_x,
              info.min_y, info.max_y);
  std::printf("  height range: [%g, %g] m\n", info.min_height, info.max_height);
  return kExitOk;
}

int run_or_bench(bool bench, const std::string& config_path, bool has_seed, std::uint64_t seed,
                 int workers, const std::string& out_dir, const OutputFormat& fmt) {
  std::string config_text;
  const int rc = load_config_text(config_path, has_seed, seed, config_text);
  if (rc != kExitOk) return rc;

  bathyloc_result* result = nullptr;
  const bathyloc_status status =
      bench ? bathyloc_bench(config_text.c_str(), workers, &result)
            : bathyloc_run(config_text.c_str(), &result);
  if (status != BATHYLOC_OK) return fail(status);

  const std::string json_path = out_dir + (bench ? "/bench_report.json" : "/run_report.json");
  const std::string csv_path = out_dir + (bench ? "/runs.csv" : "/trajectory.csv");

  int code = kExitOk;
  if (fmt.json && !write_file(json_path, bathyloc_result_report_json(result))) {
    std::cerr << "error: cannot write " << json_path << "\n";
    code = kExitRuntime;
  }
  if (code == kExitOk && fmt.csv && !write_file(csv_path, bathyloc_result_csv(result))) {
    std::cerr << "error: cannot write " << csv_path << "\n";
    code = kExitRuntime;
  }
  bathyloc_result_free(result);

  if (code == kExitOk) {
    if (fmt.json) std::printf("wrote %s\n", json_path.c_str());
    if (fmt.csv) std::printf("wrote %s\n", csv_path.c_str());
  }
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bathymetric terrain-aided localization filters and benchmarks"};
  app.set_version_flag("--version", bathyloc_version());
  app.require_subcommand(1);

  // gen-lake
  std::string profile = "bowl";
  int ncols = 200, nrows = 200;
  double cell_size = 1.0, max_height = 20.0, asymmetry = 0.0, noise_amplitude = 0.0;
  std::uint64_t lake_seed = 0;
  std::string lake_out = "lake.asc";
  CLI::App* gen = app.add_subcommand("gen-lake", "Generate a synthetic lake raster (.asc)");
  gen->add_option("--profile", profile, "bowl|tilted-plane|ridge|twin-basin")
      ->capture_default_str();
  gen->add_option("--ncols", ncols)->capture_default_str();
  gen->add_option("--nrows", nrows)->capture_default_str();
  gen->add_option("--cell-size", cell_size, "meters")->capture_default_str();
  gen->add_option("--max-height", max_height, "peak water-column height, meters")
      ->capture_default_str();
  gen->add_option("--asymmetry", asymmetry, "profile skew in [0,1]")->capture_default_str();
  gen->add_option("--noise-amplitude", noise_amplitude, "smooth terrain noise, meters")
      ->capture_default_str();
  gen->add_option("--seed", lake_seed)->capture_default_str();
  gen->add_option("--out", lake_out, "output path")->capture_default_str();

  // run
  std::string run_config;
  std::uint64_t run_seed = 0;
  std::string run_out = ".";
  std::string run_format = "csv,json";
  CLI::App* run = app.add_subcommand("run", "Single simulated run per configured filter");
  run->add_option("--config", run_config, "config JSON file")->required();
  CLI::Option* run_seed_opt = run->add_option("--seed", run_seed, "override master_seed");
  run->add_option("--out", run_out, "output directory")->capture_default_str();
  run->add_option("--format", run_format, "comma list of csv,json")->capture_default_str();

  // bench
  std::string bench_config;
  std::uint64_t bench_seed = 0;
  int workers = 0;
  std::string bench_out = ".";
  std::string bench_format = "csv,json";
  CLI::App* bench = app.add_subcommand("bench", "Monte Carlo benchmark over many replicates");
  bench->add_option("--config", bench_config, "config JSON file")->required();
  CLI::Option* bench_seed_opt = bench->add_option("--seed", bench_seed, "override master_seed");
  bench->add_option("--workers", workers, "0 = hardware concurrency")->capture_default_str();
  bench->add_option("--out", bench_out, "output directory")->capture_default_str();
  bench->add_option("--format", bench_format, "comma list of csv,json")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (gen->parsed()) {
    return cmd_gen_lake(profile, ncols, nrows, cell_size, max_height, asymmetry,
                        noise_amplitude, lake_seed, lake_out);
  }
  OutputFormat fmt;
  if (run->parsed()) {
    if (!parse_format(run_format, fmt)) {
      std::cerr << "error: --format must be a comma list of csv,json\n";
      return kExitConfig;
    }
    return run_or_bench(false, run_config, run_seed_opt->count() > 0, run_seed, 1, run_out,
                        fmt);
  }
  if (!parse_format(bench_format, fmt)) {
    std::cerr << "error: --format must be a comma list of csv,json\n";
    return kExitConfig;
  }
  return run_or_bench(true, bench_config, bench_seed_opt->count() > 0, bench_seed, workers,
                      bench_out, fmt);
}
