#include "qht/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qht/rng.hpp"

namespace qht {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// ---------------------------------------------------------------------------
// Config parsing.  Every diagnostic names the offending key.

void check_known_keys(const json& obj, const std::string& prefix,
                      const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("config: unknown key " + prefix + item.key());
  }
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double require_number(const json& obj, const std::string& path,
                      const std::string& key) {
  const json* v = find(obj, key);
  if (!v || !v->is_number())
    throw ConfigError("config: " + path + key + " must be a number");
  return v->get<double>();
}

double optional_number(const json& obj, const std::string& path,
                       const std::string& key, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number())
    throw ConfigError("config: " + path + key + " must be a number");
  return v->get<double>();
}

int optional_int(const json& obj, const std::string& path,
                 const std::string& key, int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    throw ConfigError("config: " + path + key + " must be an integer");
  return v->get<int>();
}

std::string optional_string(const json& obj, const std::string& path,
                            const std::string& key,
                            const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string())
    throw ConfigError("config: " + path + key + " must be a string");
  return v->get<std::string>();
}

std::pair<double, double> parse_window(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError("config: " + path + " must be [lo, hi]");
  const double lo = v[0].get<double>();
  const double hi = v[1].get<double>();
  if (hi < lo) throw ConfigError("config: " + path + " bounds unordered");
  return {lo, hi};
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "parallel-dephasing") return NoiseKind::parallel_dephasing;
  if (s == "transverse-dephasing") return NoiseKind::transverse_dephasing;
  if (s == "spontaneous-emission") return NoiseKind::spontaneous_emission;
  throw ConfigError("config: scenario.kind must be one of parallel-dephasing, "
                    "transverse-dephasing, spontaneous-emission");
}

std::string noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::parallel_dephasing: return "parallel-dephasing";
    case NoiseKind::transverse_dephasing: return "transverse-dephasing";
    case NoiseKind::spontaneous_emission: return "spontaneous-emission";
  }
  return "?";
}

void parse_scenario(const json& obj, RunConfig& cfg) {
  check_known_keys(obj, "scenario.",
                   {"kind", "gamma", "gamma_plus", "target_time", "slices",
                    "domega"});
  const json* kind = find(obj, "kind");
  if (!kind || !kind->is_string())
    throw ConfigError("config: scenario.kind is required");
  cfg.kind = parse_noise_kind(kind->get<std::string>());
  cfg.gamma = require_number(obj, "scenario.", "gamma");
  if (cfg.gamma < 0.0)
    throw ConfigError("config: scenario.gamma must be >= 0");
  cfg.gamma_plus = optional_number(obj, "scenario.", "gamma_plus", 0.0);
  if (cfg.gamma_plus < 0.0)
    throw ConfigError("config: scenario.gamma_plus must be >= 0");
  cfg.target_time = require_number(obj, "scenario.", "target_time");
  if (!(cfg.target_time > 0.0))
    throw ConfigError("config: scenario.target_time must be > 0");
  cfg.slices = optional_int(obj, "scenario.", "slices", 0);
  if (cfg.slices < 0)
    throw ConfigError("config: scenario.slices must be >= 1");
  cfg.domega = optional_number(obj, "scenario.", "domega", 0.0);
}

void parse_objective(const json& obj, RunConfig& cfg) {
  check_known_keys(obj, "objective.", {"kind", "priors", "robust"});
  const std::string kind = optional_string(obj, "objective.", "kind",
                                           "helstrom");
  if (kind == "helstrom") {
    cfg.objective_kind = ObjectiveKind::maximize_distance;
  } else if (kind == "fixed-local") {
    cfg.objective_kind = ObjectiveKind::minimize_error;
  } else {
    throw ConfigError(
        "config: objective.kind must be helstrom or fixed-local");
  }
  if (const json* priors = find(obj, "priors")) {
    const auto [p0, p1] = parse_window(*priors, "objective.priors");
    try {
      cfg.priors = Priors(p0, p1);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: objective.priors: ") + e.what());
    }
  }
  if (const json* robust = find(obj, "robust")) {
    check_known_keys(*robust, "objective.robust.", {"window", "samples"});
    const json* window = find(*robust, "window");
    if (!window)
      throw ConfigError("config: objective.robust.window is required");
    cfg.robust_window = parse_window(*window, "objective.robust.window");
    cfg.robust_samples = optional_int(*robust, "objective.robust.", "samples",
                                      21);
    if (cfg.robust_samples < 1)
      throw ConfigError("config: objective.robust.samples must be >= 1");
  }
}

void parse_optimizer(const json& obj, RunConfig& cfg) {
  check_known_keys(obj, "optimizer.",
                   {"method", "threshold", "max_iterations", "gradient_mode",
                    "amplitude_bound", "anneal"});
  const std::string method = optional_string(obj, "optimizer.", "method",
                                             "grape");
  if (method == "grape") {
    cfg.method = OptMethod::grape;
  } else if (method == "sagrape") {
    cfg.method = OptMethod::sagrape;
  } else {
    throw ConfigError("config: optimizer.method must be grape or sagrape");
  }
  cfg.grape.threshold =
      optional_number(obj, "optimizer.", "threshold", cfg.grape.threshold);
  if (!(cfg.grape.threshold > 0.0))
    throw ConfigError("config: optimizer.threshold must be > 0");
  cfg.grape.max_iterations = optional_int(obj, "optimizer.", "max_iterations",
                                          cfg.grape.max_iterations);
  if (cfg.grape.max_iterations < 1)
    throw ConfigError("config: optimizer.max_iterations must be >= 1");
  const std::string mode = optional_string(obj, "optimizer.", "gradient_mode",
                                           "truncated");
  if (mode == "truncated") {
    cfg.grape.gradient_mode = GradientMode::truncated;
  } else if (mode == "exact") {
    cfg.grape.gradient_mode = GradientMode::exact;
  } else {
    throw ConfigError(
        "config: optimizer.gradient_mode must be truncated or exact");
  }
  if (const json* bound = find(obj, "amplitude_bound")) {
    if (!bound->is_number() || bound->get<double>() <= 0.0)
      throw ConfigError("config: optimizer.amplitude_bound must be > 0");
    cfg.grape.amplitude_bound = bound->get<double>();
  }
  if (const json* anneal = find(obj, "anneal")) {
    check_known_keys(*anneal, "optimizer.anneal.",
                     {"initial_temperature", "cooling_factor", "cooling_steps",
                      "perturbation_scale", "max_cycles",
                      "grape_iterations_per_cycle"});
    cfg.anneal.initial_temperature =
        optional_number(*anneal, "optimizer.anneal.", "initial_temperature",
                        cfg.anneal.initial_temperature);
    cfg.anneal.cooling_factor =
        optional_number(*anneal, "optimizer.anneal.", "cooling_factor",
                        cfg.anneal.cooling_factor);
    cfg.anneal.cooling_steps = optional_int(
        *anneal, "optimizer.anneal.", "cooling_steps", cfg.anneal.cooling_steps);
    cfg.anneal.perturbation_scale =
        optional_number(*anneal, "optimizer.anneal.", "perturbation_scale",
                        cfg.anneal.perturbation_scale);
    cfg.anneal.max_cycles = optional_int(*anneal, "optimizer.anneal.",
                                         "max_cycles", cfg.anneal.max_cycles);
    cfg.anneal.grape_iterations_per_cycle =
        optional_int(*anneal, "optimizer.anneal.", "grape_iterations_per_cycle",
                     cfg.anneal.grape_iterations_per_cycle);
    if (!(cfg.anneal.initial_temperature > 0.0))
      throw ConfigError("config: optimizer.anneal.initial_temperature must be > 0");
    if (!(cfg.anneal.cooling_factor > 0.0 && cfg.anneal.cooling_factor < 1.0))
      throw ConfigError("config: optimizer.anneal.cooling_factor must be in (0, 1)");
    if (cfg.anneal.cooling_steps < 1)
      throw ConfigError("config: optimizer.anneal.cooling_steps must be >= 1");
  }
}

void parse_init(const json& obj, RunConfig& cfg) {
  check_known_keys(obj, "init.", {"kind", "amplitude"});
  const std::string kind = optional_string(obj, "init.", "kind", "constant");
  if (kind == "constant") {
    cfg.init_kind = InitKind::constant;
  } else if (kind == "zero") {
    cfg.init_kind = InitKind::zero;
  } else if (kind == "random") {
    cfg.init_kind = InitKind::random;
  } else {
    throw ConfigError("config: init.kind must be constant, zero or random");
  }
  cfg.init_amplitude = optional_number(obj, "init.", "amplitude",
                                       kind == "random" ? 0.1 : 0.01);
}

void parse_sweep(const json& obj, RunConfig& cfg) {
  check_known_keys(obj, "sweep.", {"parameter", "values"});
  const std::string parameter = optional_string(obj, "sweep.", "parameter",
                                                "gamma");
  if (parameter == "gamma") {
    cfg.sweep_parameter = SweepSpec::Parameter::gamma;
  } else if (parameter == "target_time") {
    cfg.sweep_parameter = SweepSpec::Parameter::target_time;
  } else if (parameter == "domega") {
    cfg.sweep_parameter = SweepSpec::Parameter::domega;
  } else {
    throw ConfigError(
        "config: sweep.parameter must be gamma, target_time or domega");
  }
  if (const json* values = find(obj, "values")) {
    if (!values->is_array() || values->empty())
      throw ConfigError("config: sweep.values must be a non-empty array");
    for (const auto& v : *values) {
      if (!v.is_number())
        throw ConfigError("config: sweep.values must contain numbers");
      cfg.sweep_values.push_back(v.get<double>());
    }
  } else {
    // Default grids: T in [0.5, 20] step 0.5; gamma in [0.05, 0.3] step 0.05.
    if (*cfg.sweep_parameter == SweepSpec::Parameter::target_time) {
      for (int i = 1; i <= 40; ++i) cfg.sweep_values.push_back(0.5 * i);
    } else if (*cfg.sweep_parameter == SweepSpec::Parameter::gamma) {
      for (int i = 1; i <= 6; ++i) cfg.sweep_values.push_back(0.05 * i);
    } else {
      for (int i = 0; i < 41; ++i)
        cfg.sweep_values.push_back(-0.2 + 0.4 * i / 40.0);
    }
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: document must be an object");
  check_known_keys(root, "",
                   {"schema_version", "scenario", "objective", "optimizer",
                    "init", "restarts", "seed", "sweep", "robust_eval",
                    "gradcheck"});

  RunConfig cfg;
  cfg.raw_text = text;
  cfg.schema_version = optional_int(root, "", "schema_version", 1);
  if (cfg.schema_version != 1)
    throw ConfigError("config: schema_version must be 1");

  const json* scenario = find(root, "scenario");
  if (!scenario || !scenario->is_object())
    throw ConfigError("config: scenario section is required");
  parse_scenario(*scenario, cfg);

  if (const json* objective = find(root, "objective"))
    parse_objective(*objective, cfg);
  if (const json* optimizer = find(root, "optimizer"))
    parse_optimizer(*optimizer, cfg);
  if (const json* init = find(root, "init")) parse_init(*init, cfg);

  cfg.restarts = optional_int(root, "", "restarts", 1);
  if (cfg.restarts < 1) throw ConfigError("config: restarts must be >= 1");
  if (const json* seed = find(root, "seed")) {
    if (!seed->is_number_integer())
      throw ConfigError("config: seed must be an integer");
    cfg.seed = seed->get<uint64_t>();
  }
  cfg.grape.seed = cfg.seed;
  cfg.anneal.seed = derive_seed(cfg.seed, 1);

  if (const json* sweep = find(root, "sweep")) parse_sweep(*sweep, cfg);

  if (const json* eval = find(root, "robust_eval")) {
    check_known_keys(*eval, "robust_eval.", {"window", "samples"});
    if (const json* window = find(*eval, "window"))
      cfg.evaluation_window = parse_window(*window, "robust_eval.window");
    cfg.evaluation_samples = optional_int(*eval, "robust_eval.", "samples", 41);
    if (cfg.evaluation_samples < 2)
      throw ConfigError("config: robust_eval.samples must be >= 2");
  }

  if (const json* gradcheck = find(root, "gradcheck")) {
    check_known_keys(*gradcheck, "gradcheck.", {"fd_step"});
    cfg.fd_step = optional_number(*gradcheck, "gradcheck.", "fd_step", 1e-6);
    if (!(cfg.fd_step > 0.0))
      throw ConfigError("config: gradcheck.fd_step must be > 0");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

int RunConfig::effective_slices() const {
  if (slices > 0) return slices;
  return std::max(1, static_cast<int>(std::lround(target_time / 0.05)));
}

MeasurementKind RunConfig::measurement() const {
  return objective_kind == ObjectiveKind::maximize_distance
             ? MeasurementKind::helstrom
             : MeasurementKind::fixed_local;
}

DiscriminationProblem RunConfig::problem() const {
  return make_problem(kind, gamma, target_time, effective_slices(), domega,
                      measurement(), gamma_plus);
}

Objective RunConfig::plain_objective() const {
  Objective o = objective_kind == ObjectiveKind::maximize_distance
                    ? Objective::distance()
                    : Objective::fixed_error(plus_minus_povm(), priors);
  o.priors = priors;
  return o;
}

Objective RunConfig::objective() const {
  Objective o = plain_objective();
  if (robust_window)
    o = o.robust_over(robust_window->first, robust_window->second,
                      robust_samples);
  return o;
}

ControlField RunConfig::initial_controls() const {
  const int n = effective_slices();
  switch (init_kind) {
    case InitKind::zero: return ControlField::zero(2, n);
    case InitKind::constant: return ControlField::constant(init_amplitude, 2, n);
    case InitKind::random: {
      Rng rng(derive_seed(seed, 7777));
      ControlField out = ControlField::zero(2, n);
      for (int k = 0; k < 2; ++k)
        for (int s = 0; s < n; ++s)
          out.values()(k, s) = rng.uniform(-init_amplitude, init_amplitude);
      return out;
    }
  }
  throw std::logic_error("unreachable init kind");
}

// ---------------------------------------------------------------------------
// Serialization.

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

namespace {

json controls_to_json(const ControlField& controls) {
  json values = json::array();
  for (int k = 0; k < controls.channel_count(); ++k) {
    json row = json::array();
    for (int n = 0; n < controls.slice_count(); ++n)
      row.push_back(controls(k, n));
    values.push_back(std::move(row));
  }
  return json{{"channels", controls.channels()}, {"values", std::move(values)}};
}

ControlField controls_from_json(const json& j) {
  const auto channels = j.at("channels").get<std::vector<std::string>>();
  const auto& values = j.at("values");
  Eigen::MatrixXd m(values.size(), values.empty() ? 0 : values[0].size());
  for (size_t k = 0; k < values.size(); ++k)
    for (size_t n = 0; n < values[k].size(); ++n)
      m(k, n) = values[k][n].get<double>();
  return ControlField(std::move(m), channels);
}

json bloch_to_json(const BlochVector& b) {
  return json{{"x", b.x}, {"y", b.y}, {"z", b.z}};
}

BlochVector bloch_from_json(const json& j) {
  return BlochVector{j.at("x").get<double>(), j.at("y").get<double>(),
                     j.at("z").get<double>()};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buffer;
}

void write_meta(const std::string& out_dir, double wall_seconds) {
  json meta{{"tool_version", kToolVersion},
            {"timestamp", timestamp_utc()},
            {"wall_seconds", wall_seconds},
            {"threads", max_threads()}};
  write_text_file(join_path(out_dir, "meta.json"), meta.dump(2) + "\n");
}

void write_trace_csv(const std::string& path,
                     const std::vector<double>& trace) {
  std::string text = "iteration,objective\n";
  for (size_t i = 0; i < trace.size(); ++i)
    text += std::to_string(i) + "," + format_double(trace[i]) + "\n";
  write_text_file(path, text);
}

void ensure_output_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("config: output directory not writable: " + out_dir);
}

}  // namespace

std::string run_record_to_json(const RunRecord& record) {
  json j{{"schema_version", 1},
         {"tool_version", record.tool_version},
         {"config_text", record.config_text},
         {"effective_seed", record.effective_seed},
         {"effective_restarts", record.effective_restarts},
         {"result",
          json{{"controls", controls_to_json(record.result.controls)},
               {"objective_trace", record.result.objective_trace},
               {"pe_helstrom", record.result.pe_helstrom},
               {"pe_fixed", record.result.pe_fixed},
               {"iterations", record.result.iterations},
               {"converged", record.result.converged},
               {"seed", record.result.seed}}},
         {"scenario_outputs",
          json{{"pe_uncontrolled", record.pe_uncontrolled},
               {"final_bloch_h0", bloch_to_json(record.final_bloch0)},
               {"final_bloch_h1", bloch_to_json(record.final_bloch1)}}}};
  return j.dump(2) + "\n";
}

RunRecord run_record_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunRecord record;
  record.tool_version = j.at("tool_version").get<std::string>();
  record.config_text = j.at("config_text").get<std::string>();
  record.effective_seed = j.at("effective_seed").get<uint64_t>();
  record.effective_restarts = j.at("effective_restarts").get<int>();
  const json& r = j.at("result");
  record.result.controls = controls_from_json(r.at("controls"));
  record.result.objective_trace =
      r.at("objective_trace").get<std::vector<double>>();
  record.result.pe_helstrom = r.at("pe_helstrom").get<double>();
  record.result.pe_fixed = r.at("pe_fixed").get<double>();
  record.result.iterations = r.at("iterations").get<int>();
  record.result.converged = r.at("converged").get<bool>();
  record.result.seed = r.at("seed").get<uint64_t>();
  const json& s = j.at("scenario_outputs");
  record.pe_uncontrolled = s.at("pe_uncontrolled").get<double>();
  record.final_bloch0 = bloch_from_json(s.at("final_bloch_h0"));
  record.final_bloch1 = bloch_from_json(s.at("final_bloch_h1"));
  return record;
}

bool records_equal(const RunRecord& a, const RunRecord& b) {
  return a.config_text == b.config_text &&
         a.effective_seed == b.effective_seed &&
         a.effective_restarts == b.effective_restarts &&
         a.tool_version == b.tool_version &&
         a.result.controls.values() == b.result.controls.values() &&
         a.result.controls.channels() == b.result.controls.channels() &&
         a.result.objective_trace == b.result.objective_trace &&
         a.result.pe_helstrom == b.result.pe_helstrom &&
         a.result.pe_fixed == b.result.pe_fixed &&
         a.result.iterations == b.result.iterations &&
         a.result.converged == b.result.converged &&
         a.result.seed == b.result.seed &&
         a.pe_uncontrolled == b.pe_uncontrolled &&
         a.final_bloch0.x == b.final_bloch0.x &&
         a.final_bloch0.y == b.final_bloch0.y &&
         a.final_bloch0.z == b.final_bloch0.z &&
         a.final_bloch1.x == b.final_bloch1.x &&
         a.final_bloch1.y == b.final_bloch1.y &&
         a.final_bloch1.z == b.final_bloch1.z;
}

void write_pulse_csv(const std::string& path, const ControlField& controls,
                     double dt) {
  std::string text = "slice,t_start";
  for (const auto& label : controls.channels()) text += ",u_" + label;
  text += "\n";
  for (int n = 0; n < controls.slice_count(); ++n) {
    text += std::to_string(n) + "," + format_double(n * dt);
    for (int k = 0; k < controls.channel_count(); ++k)
      text += "," + format_double(controls(k, n));
    text += "\n";
  }
  write_text_file(path, text);
}

ControlField read_pulse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read pulse file " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("pulse file empty: " + path);
  std::vector<std::string> labels;
  {
    std::stringstream header(line);
    std::string column;
    int index = 0;
    while (std::getline(header, column, ',')) {
      if (index >= 2) {
        if (column.rfind("u_", 0) != 0)
          throw std::runtime_error("pulse file: bad channel column " + column);
        labels.push_back(column.substr(2));
      }
      ++index;
    }
  }
  if (labels.empty())
    throw std::runtime_error("pulse file: no control columns in " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != labels.size() + 2)
      throw std::runtime_error("pulse file: bad row in " + path);
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd values(labels.size(), rows.size());
  for (size_t n = 0; n < rows.size(); ++n)
    for (size_t k = 0; k < labels.size(); ++k) values(k, n) = rows[n][k + 2];
  return ControlField(std::move(values), labels);
}

// ---------------------------------------------------------------------------
// Commands.

namespace {

RunRecord build_record(const RunConfig& config, OptimizationResult result) {
  RunRecord record;
  record.config_text = config.raw_text;
  record.effective_seed = config.seed;
  record.effective_restarts = config.restarts;
  record.result = std::move(result);

  const DiscriminationProblem problem = config.problem();
  record.pe_uncontrolled = uncontrolled_error(
      config.kind, config.gamma, config.target_time, config.domega,
      config.gamma_plus);
  record.final_bloch0 = bloch_from_density(
      evolve(problem, 0, record.result.controls).final_state);
  record.final_bloch1 = bloch_from_density(
      evolve(problem, 1, record.result.controls).final_state);
  return record;
}

}  // namespace

int cmd_optimize(const RunConfig& config, const std::string& out_dir) {
  ensure_output_dir(out_dir);
  const DiscriminationProblem problem = config.problem();
  const OptimizationResult result = optimize_best_of(
      problem, config.objective(), config.initial_controls(), config.method,
      config.grape, config.anneal, config.restarts);

  const RunRecord record = build_record(config, result);
  write_text_file(join_path(out_dir, "record.json"),
                  run_record_to_json(record));
  write_pulse_csv(join_path(out_dir, "pulse.csv"), record.result.controls,
                  problem.grid.dt());
  write_trace_csv(join_path(out_dir, "trace.csv"),
                  record.result.objective_trace);
  write_meta(out_dir, record.result.wall_seconds);
  return record.result.converged ? kExitOk : kExitNotConverged;
}

int cmd_sweep(const RunConfig& config, const std::string& out_dir) {
  ensure_output_dir(out_dir);
  if (!config.sweep_parameter)
    throw ConfigError("config: sweep section is required for the sweep command");
  if (config.sweep_values.empty())
    throw ConfigError("config: sweep.values must be a non-empty array");

  SweepSpec spec;
  spec.parameter = *config.sweep_parameter;
  spec.values = config.sweep_values;
  spec.kind = config.kind;
  spec.gamma = config.gamma;
  spec.gamma_plus = config.gamma_plus;
  spec.target_time = config.target_time;
  spec.dt = config.target_time / config.effective_slices();
  spec.domega = config.domega;
  spec.measurement = config.measurement();
  spec.objective_kind = config.objective_kind;
  spec.method = config.method;
  spec.grape = config.grape;
  spec.anneal = config.anneal;
  spec.restarts = config.restarts;
  spec.init_amplitude =
      config.init_kind == InitKind::zero ? 0.0 : config.init_amplitude;
  spec.seed = config.seed;

  const auto start = std::chrono::steady_clock::now();
  const std::vector<SweepRow> rows = run_sweep(spec);

  std::string table = "value,pe_helstrom,pe_fixed,controls_file\n";
  std::string uncontrolled = "value,pe_uncontrolled\n";
  bool all_converged = true;
  for (size_t i = 0; i < rows.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "controls_%03zu.csv", i);
    const double total_time =
        spec.parameter == SweepSpec::Parameter::target_time
            ? rows[i].value
            : spec.target_time;
    write_pulse_csv(join_path(out_dir, name), rows[i].result.controls,
                    total_time / rows[i].result.controls.slice_count());
    table += format_double(rows[i].value) + "," +
             format_double(rows[i].pe_helstrom) + "," +
             format_double(rows[i].pe_fixed) + "," + name + "\n";
    uncontrolled += format_double(rows[i].value) + "," +
                    format_double(rows[i].pe_uncontrolled) + "\n";
    all_converged = all_converged && rows[i].result.converged;
  }
  write_text_file(join_path(out_dir, "sweep.csv"), table);
  write_text_file(join_path(out_dir, "sweep_uncontrolled.csv"), uncontrolled);
  write_meta(out_dir, std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count());
  return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_robust(const RunConfig& config, const std::string& out_dir) {
  ensure_output_dir(out_dir);
  if (!config.robust_window)
    throw ConfigError(
        "config: objective.robust is required for the robust command");
  const auto start = std::chrono::steady_clock::now();

  const DiscriminationProblem problem = config.problem();
  const ControlField init = config.initial_controls();

  GrapeOptions nominal_opts = config.grape;
  nominal_opts.seed = derive_seed(config.seed, 11);
  AnnealOptions nominal_anneal = config.anneal;
  nominal_anneal.seed = derive_seed(config.seed, 12);
  const OptimizationResult nominal =
      optimize_best_of(problem, config.plain_objective(), init, config.method,
                       nominal_opts, nominal_anneal, config.restarts);

  GrapeOptions robust_opts = config.grape;
  robust_opts.seed = derive_seed(config.seed, 21);
  AnnealOptions robust_anneal = config.anneal;
  robust_anneal.seed = derive_seed(config.seed, 22);
  const OptimizationResult robust =
      optimize_best_of(problem, config.objective(), init, config.method,
                       robust_opts, robust_anneal, config.restarts);

  const double half_width = M_PI / (2.0 * config.target_time);
  const std::pair<double, double> eval_window =
      config.evaluation_window.value_or(
          std::pair<double, double>{-half_width, half_width});
  const RobustnessReport report = robustness_report(
      problem, nominal.controls, robust.controls, *config.robust_window,
      eval_window, config.evaluation_samples);

  std::string table = "domega,pe_uncontrolled,pe_optimal,pe_robust\n";
  for (size_t i = 0; i < report.detunings.size(); ++i) {
    table += format_double(report.detunings[i]) + "," +
             format_double(report.pe_uncontrolled[i]) + "," +
             format_double(report.pe_optimal[i]) + "," +
             format_double(report.pe_robust[i]) + "\n";
  }
  write_text_file(join_path(out_dir, "robust_table.csv"), table);

  json summary{
      {"scenario", noise_kind_name(config.kind)},
      {"gamma", config.gamma},
      {"target_time", config.target_time},
      {"training_window", {report.training_lo, report.training_hi}},
      {"evaluation_window", {report.evaluation_lo, report.evaluation_hi}},
      {"evaluation_samples", config.evaluation_samples},
      {"avg_pe_uncontrolled", report.avg_uncontrolled},
      {"avg_pe_optimal", report.avg_optimal},
      {"avg_pe_robust", report.avg_robust},
      {"relative_reduction_vs_optimal",
       report.avg_optimal > 0.0
           ? 1.0 - report.avg_robust / report.avg_optimal
           : 0.0}};
  write_text_file(join_path(out_dir, "robust_summary.json"),
                  summary.dump(2) + "\n");
  write_pulse_csv(join_path(out_dir, "pulse_optimal.csv"), nominal.controls,
                  problem.grid.dt());
  write_pulse_csv(join_path(out_dir, "pulse_robust.csv"), robust.controls,
                  problem.grid.dt());
  write_meta(out_dir, std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count());
  return nominal.converged && robust.converged ? kExitOk : kExitNotConverged;
}

int cmd_gradcheck(const RunConfig& config, const std::string& out_dir) {
  ensure_output_dir(out_dir);
  const auto start = std::chrono::steady_clock::now();
  const DiscriminationProblem problem = config.problem();
  const Objective objective = config.objective();
  const ControlField controls = config.initial_controls();

  const Eigen::MatrixXd fd =
      finite_difference_gradient(problem, controls, objective, config.fd_step);
  const Eigen::MatrixXd exact =
      objective_gradient(problem, controls, objective, GradientMode::exact);
  const Eigen::MatrixXd truncated = objective_gradient(
      problem, controls, objective, GradientMode::truncated);

  const double fd_scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-30);
  const double exact_err = (exact - fd).cwiseAbs().maxCoeff() / fd_scale;
  const double trunc_err = (truncated - fd).cwiseAbs().maxCoeff() / fd_scale;

  // Truncation-order diagnostic: truncated-vs-exact error on the nominal
  // grid and on a grid with halved dt (same control function).
  const auto exact_scale = std::max(exact.cwiseAbs().maxCoeff(), 1e-30);
  const double coarse_err =
      (truncated - exact).cwiseAbs().maxCoeff() / exact_scale;
  DiscriminationProblem fine_problem = problem;
  fine_problem.grid = TimeGrid(problem.grid.total_time,
                               2 * problem.grid.slices);
  const ControlField fine_controls = controls.refine(2);
  const Eigen::MatrixXd fine_exact = objective_gradient(
      fine_problem, fine_controls, objective, GradientMode::exact);
  const Eigen::MatrixXd fine_truncated = objective_gradient(
      fine_problem, fine_controls, objective, GradientMode::truncated);
  const double fine_scale = std::max(fine_exact.cwiseAbs().maxCoeff(), 1e-30);
  const double fine_err =
      (fine_truncated - fine_exact).cwiseAbs().maxCoeff() / fine_scale;
  const double ratio = fine_err > 0.0 ? coarse_err / fine_err : 0.0;

  std::printf("gradcheck: exact vs finite differences      %.3e\n", exact_err);
  std::printf("gradcheck: truncated vs finite differences  %.3e\n", trunc_err);
  std::printf("gradcheck: truncated error at dt, dt/2      %.3e  %.3e  (ratio %.2f)\n",
              coarse_err, fine_err, ratio);

  json report{{"max_rel_error_exact", exact_err},
              {"max_rel_error_truncated", trunc_err},
              {"truncation_error_dt", coarse_err},
              {"truncation_error_half_dt", fine_err},
              {"truncation_error_ratio", ratio},
              {"fd_step", config.fd_step}};
  write_text_file(join_path(out_dir, "gradcheck.json"), report.dump(2) + "\n");
  write_meta(out_dir, std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count());
  return exact_err <= 1e-3 ? kExitOk : kExitNotConverged;
}

int cmd_trajectory(const RunConfig& config, const std::string& controls_path,
                   const std::string& out_dir) {
  ensure_output_dir(out_dir);
  const auto start = std::chrono::steady_clock::now();
  const DiscriminationProblem problem = config.problem();
  const ControlField controls = controls_path.empty()
                                    ? config.initial_controls()
                                    : read_pulse_csv(controls_path);
  const BlochTrajectories traj = bloch_trajectories(problem, controls);

  for (int j = 0; j < 2; ++j) {
    const auto& series = j == 0 ? traj.hypothesis0 : traj.hypothesis1;
    std::string text = "t,x,y,z\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
      text += format_double(traj.times[i]) + "," +
              format_double(series[i].x) + "," + format_double(series[i].y) +
              "," + format_double(series[i].z) + "\n";
    }
    write_text_file(
        join_path(out_dir, j == 0 ? "trajectory_h0.csv" : "trajectory_h1.csv"),
        text);
  }
  write_meta(out_dir, std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count());
  return kExitOk;
}

}  // namespace qht
