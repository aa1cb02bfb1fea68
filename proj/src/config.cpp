#include "bathyloc/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "bathyloc/errors.hpp"

namespace bathyloc {

using nlohmann::json;

namespace {

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + " must be a JSON object");
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

double get_double(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw ConfigError(where + "." + key + " must be a number");
  }
  return v.get<double>();
}

double get_double_or(const json& j, const std::string& key, const std::string& where,
                     double fallback) {
  return j.contains(key) ? get_double(j, key, where) : fallback;
}

std::int64_t get_int(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError(where + "." + key + " must be an integer");
  }
  return v.get<std::int64_t>();
}

bool get_bool_or(const json& j, const std::string& key, const std::string& where,
                 bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) {
    throw ConfigError(where + "." + key + " must be a boolean");
  }
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) {
    throw ConfigError(where + "." + key + " must be a string");
  }
  return v.get<std::string>();
}

Eigen::MatrixXd parse_matrix(const json& v, int rows, int cols, const std::string& where) {
  // Accepted forms: full row-major nested array, or {"diag": [...]}.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  if (v.is_object()) {
    check_keys(v, {"diag"}, where);
    const json& d = v.at("diag");
    if (!d.is_array() || static_cast<int>(d.size()) != rows) {
      throw ConfigError(where + ".diag must be an array of " + std::to_string(rows) +
                        " numbers");
    }
    for (int i = 0; i < rows; ++i) {
      m(i, i) = d.at(i).get<double>();
    }
    return m;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != rows) {
    throw ConfigError(where + " must be a " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " array or {\"diag\": [...]}");
  }
  for (int r = 0; r < rows; ++r) {
    const json& row = v.at(r);
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw ConfigError(where + " row " + std::to_string(r) + " must have " +
                        std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) {
      m(r, c) = row.at(c).get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

std::string stem_of(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base;
}

} // namespace

SyntheticLakeSpec parse_lake_spec(const json& doc) {
  expect_object(doc, "lake.synthetic");
  check_keys(doc,
             {"profile", "ncols", "nrows", "cell_size", "max_height", "asymmetry",
              "noise_amplitude", "seed"},
             "lake.synthetic");
  SyntheticLakeSpec spec;
  if (!doc.contains("profile")) {
    throw ConfigError("lake.synthetic.profile is required");
  }
  spec.profile = profile_from_name(get_string(doc, "profile", "lake.synthetic"));
  spec.ncols = static_cast<int>(get_int(doc, "ncols", "lake.synthetic"));
  spec.nrows = static_cast<int>(get_int(doc, "nrows", "lake.synthetic"));
  spec.cell_size = get_double_or(doc, "cell_size", "lake.synthetic", 1.0);
  spec.max_height = get_double(doc, "max_height", "lake.synthetic");
  spec.asymmetry = get_double_or(doc, "asymmetry", "lake.synthetic", 0.0);
  spec.noise_amplitude = get_double_or(doc, "noise_amplitude", "lake.synthetic", 0.0);
  spec.seed = doc.contains("seed")
                  ? static_cast<std::uint64_t>(get_int(doc, "seed", "lake.synthetic"))
                  : 0;
  spec.validate();
  return spec;
}

json lake_spec_to_json(const SyntheticLakeSpec& spec) {
  return json{{"profile", profile_name(spec.profile)},
              {"ncols", spec.ncols},
              {"nrows", spec.nrows},
              {"cell_size", spec.cell_size},
              {"max_height", spec.max_height},
              {"asymmetry", spec.asymmetry},
              {"noise_amplitude", spec.noise_amplitude},
              {"seed", spec.seed}};
}

namespace {

LakeSource parse_lake(const json& doc) {
  expect_object(doc, "lake");
  check_keys(doc, {"file", "synthetic", "name"}, "lake");
  LakeSource lake;
  const bool has_file = doc.contains("file");
  const bool has_synth = doc.contains("synthetic");
  if (has_file == has_synth) {
    throw ConfigError("lake needs exactly one of 'file' or 'synthetic'");
  }
  if (has_file) {
    lake.file = get_string(doc, "file", "lake");
  } else {
    lake.synthetic = parse_lake_spec(doc.at("synthetic"));
  }
  if (doc.contains("name")) {
    lake.name = get_string(doc, "name", "lake");
  } else if (has_file) {
    lake.name = stem_of(*lake.file);
  } else {
    lake.name = std::string("synthetic-") + profile_name(lake.synthetic->profile);
  }
  return lake;
}

MotionModel parse_motion(const json& doc) {
  expect_object(doc, "motion");
  const std::string model = doc.contains("model") ? get_string(doc, "model", "motion") : "";
  if (model == "linear") {
    check_keys(doc, {"model", "velocity"}, "motion");
    const json& v = doc.at("velocity");
    if (!v.is_array() || v.size() != 3) {
      throw ConfigError("motion.velocity must be [vx, vy, vz]");
    }
    ControlInput u{v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
    return MotionModel::linear(u);
  }
  if (model == "mixed") {
    check_keys(doc, {"model", "a", "a_d", "a_off", "b", "b_d", "b_off", "vz"}, "motion");
    MixedMotionParams p;
    p.a = get_double(doc, "a", "motion");
    p.a_d = get_double(doc, "a_d", "motion");
    p.a_off = get_double(doc, "a_off", "motion");
    p.b = get_double(doc, "b", "motion");
    p.b_d = get_double(doc, "b_d", "motion");
    p.b_off = get_double(doc, "b_off", "motion");
    p.vz = get_double(doc, "vz", "motion");
    p.validate();
    return MotionModel::mixed(p);
  }
  throw ConfigError("motion.model must be 'linear' or 'mixed'");
}

NoiseConfig parse_noise(const json* doc, const MotionModel& motion) {
  // Defaults follow the standard parameter table, with the process noise
  // scaled from the nominal velocity. The mixed model has no horizontal
  // velocity, so its default scale is (1, 1, vz).
  double vx = 1.0, vy = 1.0;
  const double vz = motion.vz();
  if (const auto* u = motion.control()) {
    vx = u->vx;
    vy = u->vy;
  }
  NoiseConfig noise = NoiseConfig::defaults(vx, vy, vz);

  if (doc) {
    expect_object(*doc, "noise");
    check_keys(*doc, {"q", "r", "p0"}, "noise");
    if (doc->contains("q")) {
      const json& q = doc->at("q");
      if (q.is_object() && q.contains("velocity_scale")) {
        check_keys(q, {"velocity_scale"}, "noise.q");
        const json& vs = q.at("velocity_scale");
        if (!vs.is_array() || vs.size() != 3) {
          throw ConfigError("noise.q.velocity_scale must be [vx, vy, vz]");
        }
        noise.process = NoiseConfig::defaults(vs.at(0).get<double>(), vs.at(1).get<double>(),
                                              vs.at(2).get<double>())
                            .process;
      } else {
        noise.process = parse_matrix(q, 3, 3, "noise.q");
      }
    }
    if (doc->contains("r")) {
      noise.measurement = parse_matrix(doc->at("r"), 2, 2, "noise.r");
    }
    if (doc->contains("p0")) {
      noise.initial = parse_matrix(doc->at("p0"), 3, 3, "noise.p0");
    }
  }
  noise.validate();
  return noise;
}

FilterParams parse_filter_params(const json* doc) {
  FilterParams params;
  if (!doc) return params;
  expect_object(*doc, "filter_params");
  check_keys(*doc,
             {"pf_particles", "mpf_particles", "inject_fraction", "ukf", "ess_threshold",
              "estimate_before_resample", "paper_exact_jacobian", "divergence_threshold"},
             "filter_params");
  if (doc->contains("pf_particles")) {
    params.pf_particles = static_cast<std::size_t>(get_int(*doc, "pf_particles", "filter_params"));
  }
  if (doc->contains("mpf_particles")) {
    params.mpf_particles =
        static_cast<std::size_t>(get_int(*doc, "mpf_particles", "filter_params"));
  }
  params.inject_fraction =
      get_double_or(*doc, "inject_fraction", "filter_params", params.inject_fraction);
  if (doc->contains("ukf")) {
    const json& u = doc->at("ukf");
    expect_object(u, "filter_params.ukf");
    check_keys(u, {"alpha", "beta", "kappa"}, "filter_params.ukf");
    params.ukf.alpha = get_double_or(u, "alpha", "filter_params.ukf", params.ukf.alpha);
    params.ukf.beta = get_double_or(u, "beta", "filter_params.ukf", params.ukf.beta);
    params.ukf.kappa = get_double_or(u, "kappa", "filter_params.ukf", params.ukf.kappa);
  }
  if (doc->contains("ess_threshold") && !doc->at("ess_threshold").is_null()) {
    params.ess_threshold = get_double(*doc, "ess_threshold", "filter_params");
  }
  params.estimate_before_resample = get_bool_or(*doc, "estimate_before_resample",
                                                "filter_params", params.estimate_before_resample);
  params.jacobian = get_bool_or(*doc, "paper_exact_jacobian", "filter_params", false)
                        ? JacobianConvention::paper_exact
                        : JacobianConvention::analytic;
  params.divergence_threshold =
      get_double_or(*doc, "divergence_threshold", "filter_params", params.divergence_threshold);
  return params;
}

} // namespace

BenchmarkConfig parse_config(const json& doc) {
  expect_object(doc, "config");
  check_keys(doc,
             {"lake", "motion", "noise", "steps", "runs", "dt", "init_pose", "filters",
              "filter_params", "process_noise_in_truth", "timing", "master_seed", "note"},
             "config");
  if (!doc.contains("lake")) throw ConfigError("config.lake is required");
  if (!doc.contains("motion")) throw ConfigError("config.motion is required");
  if (!doc.contains("init_pose")) throw ConfigError("config.init_pose is required");

  BenchmarkConfig cfg;
  cfg.lake = parse_lake(doc.at("lake"));
  cfg.motion = parse_motion(doc.at("motion"));
  cfg.noise = parse_noise(doc.contains("noise") ? &doc.at("noise") : nullptr, cfg.motion);

  if (doc.contains("steps")) {
    const std::int64_t steps = get_int(doc, "steps", "config");
    if (steps < 1) throw ConfigError("config.steps must be >= 1");
    cfg.steps = static_cast<std::size_t>(steps);
  }
  if (doc.contains("runs")) {
    const std::int64_t runs = get_int(doc, "runs", "config");
    if (runs < 1) throw ConfigError("config.runs must be >= 1");
    cfg.runs = static_cast<std::size_t>(runs);
  }
  cfg.dt = get_double_or(doc, "dt", "config", cfg.dt);

  const json& pose = doc.at("init_pose");
  if (!pose.is_array() || pose.size() != 3) {
    throw ConfigError("config.init_pose must be [x, y, z]");
  }
  cfg.init_pose = {pose.at(0).get<double>(), pose.at(1).get<double>(), pose.at(2).get<double>()};

  if (doc.contains("filters")) {
    const json& filters = doc.at("filters");
    if (!filters.is_array() || filters.empty()) {
      throw ConfigError("config.filters must be a nonempty array");
    }
    cfg.filters.clear();
    for (const json& f : filters) {
      if (!f.is_string()) throw ConfigError("config.filters entries must be strings");
      const FilterKind kind = filter_from_name(f.get<std::string>());
      for (FilterKind existing : cfg.filters) {
        if (existing == kind) throw ConfigError("config.filters lists a filter twice");
      }
      cfg.filters.push_back(kind);
    }
  }

  cfg.params = parse_filter_params(doc.contains("filter_params") ? &doc.at("filter_params")
                                                                 : nullptr);
  cfg.process_noise_in_truth =
      get_bool_or(doc, "process_noise_in_truth", "config", cfg.process_noise_in_truth);
  cfg.timing = get_bool_or(doc, "timing", "config", cfg.timing);
  if (doc.contains("master_seed")) {
    cfg.master_seed = static_cast<std::uint64_t>(get_int(doc, "master_seed", "config"));
  }
  if (doc.contains("note")) {
    cfg.note = get_string(doc, "note", "config");
  }

  cfg.validate();
  return cfg;
}

BenchmarkConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

BenchmarkConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

json config_to_json(const BenchmarkConfig& cfg) {
  json lake;
  if (cfg.lake.file) {
    lake["file"] = *cfg.lake.file;
  } else {
    lake["synthetic"] = lake_spec_to_json(*cfg.lake.synthetic);
  }
  lake["name"] = cfg.lake.name;

  json motion;
  if (const auto* u = cfg.motion.control()) {
    motion["model"] = "linear";
    motion["velocity"] = {u->vx, u->vy, u->vz};
  } else {
    const auto* p = cfg.motion.mixed_params();
    motion["model"] = "mixed";
    motion["a"] = p->a;
    motion["a_d"] = p->a_d;
    motion["a_off"] = p->a_off;
    motion["b"] = p->b;
    motion["b_d"] = p->b_d;
    motion["b_off"] = p->b_off;
    motion["vz"] = p->vz;
  }

  json params{{"pf_particles", cfg.params.pf_particles},
              {"mpf_particles", cfg.params.mpf_particles},
              {"inject_fraction", cfg.params.inject_fraction},
              {"ukf",
               {{"alpha", cfg.params.ukf.alpha},
                {"beta", cfg.params.ukf.beta},
                {"kappa", cfg.params.ukf.kappa}}},
              {"estimate_before_resample", cfg.params.estimate_before_resample},
              {"paper_exact_jacobian", cfg.params.jacobian == JacobianConvention::paper_exact},
              {"divergence_threshold", cfg.params.divergence_threshold}};
  params["ess_threshold"] =
      cfg.params.ess_threshold ? json(*cfg.params.ess_threshold) : json(nullptr);

  json filters = json::array();
  for (FilterKind f : cfg.filters) filters.push_back(filter_name(f));

  json doc{{"lake", lake},
           {"motion", motion},
           {"noise",
            {{"q", matrix_to_json(cfg.noise.process)},
             {"r", matrix_to_json(cfg.noise.measurement)},
             {"p0", matrix_to_json(cfg.noise.initial)}}},
           {"steps", cfg.steps},
           {"runs", cfg.runs},
           {"dt", cfg.dt},
           {"init_pose", {cfg.init_pose.px, cfg.init_pose.py, cfg.init_pose.pz}},
           {"filters", filters},
           {"filter_params", params},
           {"process_noise_in_truth", cfg.process_noise_in_truth},
           {"timing", cfg.timing},
           {"master_seed", cfg.master_seed}};
  if (!cfg.note.empty()) {
    doc["note"] = cfg.note;
  }
  return doc;
}

} // namespace bathyloc
