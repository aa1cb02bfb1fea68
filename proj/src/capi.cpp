#include "bathyloc/bathyloc.h"

#include <cstring>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>

#include "bathyloc/config.hpp"
#include "bathyloc/errors.hpp"
#include "bathyloc/grid.hpp"
#include "bathyloc/report.hpp"
#include "bathyloc/sim.hpp"

struct bathyloc_grid {
  bathyloc::BathymetryGrid grid;
};

struct bathyloc_result {
  std::string report_json;
  std::string csv;
};

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

bathyloc_status classify(const std::exception& e) {
  using namespace bathyloc;
  if (dynamic_cast<const ParseError*>(&e)) return BATHYLOC_ERROR_PARSE;
  if (dynamic_cast<const DimensionError*>(&e)) return BATHYLOC_ERROR_DIMENSION;
  if (dynamic_cast<const ValueError*>(&e)) return BATHYLOC_ERROR_VALUE;
  if (dynamic_cast<const BoundsError*>(&e)) return BATHYLOC_ERROR_BOUNDS;
  if (dynamic_cast<const NodataError*>(&e)) return BATHYLOC_ERROR_NODATA;
  if (dynamic_cast<const NumericError*>(&e)) return BATHYLOC_ERROR_NUMERIC;
  if (dynamic_cast<const ConfigError*>(&e)) return BATHYLOC_ERROR_CONFIG;
  if (dynamic_cast<const IoError*>(&e)) return BATHYLOC_ERROR_IO;
  return BATHYLOC_ERROR_INTERNAL;
}

template <typename Fn>
bathyloc_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return BATHYLOC_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return classify(e);
  } catch (...) {
    set_error("unknown error");
    return BATHYLOC_ERROR_INTERNAL;
  }
}

// Shared implementation of run/bench: parse + load + execute + render.
bathyloc_status execute(const char* config_json, bool bench, int workers,
                        bathyloc_result** out) {
  if (!config_json || !out) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    bathyloc::BenchmarkConfig cfg = bathyloc::parse_config_text(config_json);
    const bathyloc::BathymetryGrid grid = cfg.lake.load();

    auto result = std::make_unique<bathyloc_result>();
    if (bench) {
      int n = workers;
      if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
      if (n < 1) n = 1;
      const bathyloc::BenchResult bres = bathyloc::monte_carlo(cfg, grid, n);
      result->report_json = bathyloc::dump_json(bathyloc::bench_report_json(cfg, bres));
      result->csv = bathyloc::per_run_csv(cfg, bres);
    } else {
      cfg.validate();
      const std::uint64_t truth_seed = bathyloc::derive_seed(cfg.master_seed, 0, 0);
      const bathyloc::TruthRun truth =
          bathyloc::simulate_truth(grid, cfg.motion, cfg.steps, cfg.noise, cfg.dt, truth_seed,
                                   cfg.init_pose, cfg.process_noise_in_truth);
      std::vector<bathyloc::RunReport> reports;
      reports.reserve(cfg.filters.size());
      for (std::size_t f = 0; f < cfg.filters.size(); ++f) {
        const std::uint64_t filter_seed = bathyloc::derive_seed(cfg.master_seed, 0, 1 + f);
        bathyloc::RunReport r = bathyloc::run_filter(cfg.filters[f], truth, grid, cfg.motion,
                                                     cfg.noise, cfg.params, filter_seed);
        if (!cfg.timing) r.runtime_seconds = 0.0;
        reports.push_back(std::move(r));
      }
      result->report_json =
          bathyloc::dump_json(bathyloc::run_report_json(cfg, grid, truth, reports));
      result->csv = bathyloc::trajectory_csv(truth, reports);
    }
    *out = result.release();
  });
}

} // namespace

extern "C" {

const char* bathyloc_version(void) { return "0.1.0"; }

const char* bathyloc_last_error(void) { return t_last_error.c_str(); }

bathyloc_status bathyloc_grid_load_file(const char* path, bathyloc_grid** out) {
  if (!path || !out) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    *out = new bathyloc_grid{bathyloc::load_esri_ascii_file(path)};
  });
}

bathyloc_status bathyloc_grid_load_text(const char* text, bathyloc_grid** out) {
  if (!text || !out) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    *out = new bathyloc_grid{bathyloc::load_esri_ascii(std::string(text))};
  });
}

bathyloc_status bathyloc_grid_generate(const char* spec_json, bathyloc_grid** out) {
  if (!spec_json || !out) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(spec_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw bathyloc::ParseError(std::string("lake spec is not valid JSON: ") + e.what());
    }
    const bathyloc::SyntheticLakeSpec spec = bathyloc::parse_lake_spec(doc);
    *out = new bathyloc_grid{bathyloc::generate_synthetic_lake(spec)};
  });
}

bathyloc_status bathyloc_grid_save_file(const bathyloc_grid* grid, const char* path) {
  if (!grid || !path) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { bathyloc::save_esri_ascii_file(grid->grid, path); });
}

bathyloc_status bathyloc_grid_to_text(const bathyloc_grid* grid, char** out_text) {
  if (!grid || !out_text) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  *out_text = nullptr;
  return guarded([&] {
    const std::string text = bathyloc::to_esri_ascii(grid->grid);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out_text = buf;
  });
}

bathyloc_status bathyloc_grid_get_info(const bathyloc_grid* grid, bathyloc_grid_info* out) {
  if (!grid || !out) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const bathyloc::BathymetryGrid& g = grid->grid;
    *out = bathyloc_grid_info{g.ncols(),  g.nrows(), g.cell_size(), g.origin_x(),
                              g.origin_y(), g.min_x(), g.max_x(),     g.min_y(),
                              g.max_y(),    g.min_height(), g.max_height()};
  });
}

bathyloc_status bathyloc_grid_height_at(const bathyloc_grid* grid, double x, double y,
                                        double* out_height) {
  if (!grid || !out_height) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out_height = grid->grid.height_at(x, y); });
}

bathyloc_status bathyloc_grid_gradient_at(const bathyloc_grid* grid, double x, double y,
                                          double* out_dx, double* out_dy) {
  if (!grid || !out_dx || !out_dy) {
    set_error("null argument");
    return BATHYLOC_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto [dx, dy] = grid->grid.gradient_at(x, y);
    *out_dx = dx;
    *out_dy = dy;
  });
}

int bathyloc_grid_in_bounds(const bathyloc_grid* grid, double x, double y) {
  if (!grid) return 0;
  return grid->grid.in_bounds(x, y) ? 1 : 0;
}

void bathyloc_grid_free(bathyloc_grid* grid) { delete grid; }

bathyloc_status bathyloc_run(const char* config_json, bathyloc_result** out) {
  return execute(config_json, /*bench=*/false, 1, out);
}

bathyloc_status bathyloc_bench(const char* config_json, int workers, bathyloc_result** out) {
  return execute(config_json, /*bench=*/true, workers, out);
}

const char* bathyloc_result_report_json(const bathyloc_result* result) {
  return result ? result->report_json.c_str() : "";
}

const char* bathyloc_result_csv(const bathyloc_result* result) {
  return result ? result->csv.c_str() : "";
}

void bathyloc_result_free(bathyloc_result* result) { delete result; }

void bathyloc_string_free(char* text) { delete[] text; }

} // extern "C"
