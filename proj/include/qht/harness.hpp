// Run orchestration behind the CLI: JSON run configuration, persisted run
// records and CSV emission.  All primary outputs are byte-deterministic for
// a fixed config + seed; wall-clock data is quarantined to a sidecar
// metadata file.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qht/scenarios.hpp"

namespace qht {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

/// Configuration problem (bad key, bad value, unreadable file); maps to exit
/// status 2.  The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitKind { constant, zero, random };

struct RunConfig {
  int schema_version = 1;

  NoiseKind kind = NoiseKind::parallel_dephasing;
  double gamma = 0.1;
  double gamma_plus = 0.0;
  double target_time = 10.0;
  int slices = 0;  // 0 => round(target_time / 0.05)
  double domega = 0.0;

  ObjectiveKind objective_kind = ObjectiveKind::maximize_distance;
  Priors priors{};
  std::optional<std::pair<double, double>> robust_window{};
  int robust_samples = 21;

  OptMethod method = OptMethod::grape;
  GrapeOptions grape{};
  AnnealOptions anneal{};

  InitKind init_kind = InitKind::constant;
  double init_amplitude = 0.01;
  int restarts = 1;
  uint64_t seed = 0;

  std::optional<SweepSpec::Parameter> sweep_parameter{};
  std::vector<double> sweep_values{};

  std::optional<std::pair<double, double>> evaluation_window{};
  int evaluation_samples = 41;

  double fd_step = 1e-6;

  std::string raw_text;  // byte-exact snapshot of the config document

  int effective_slices() const;
  DiscriminationProblem problem() const;
  Objective objective() const;          // robust window applied when present
  Objective plain_objective() const;    // same objective without averaging
  ControlField initial_controls() const;
  MeasurementKind measurement() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Everything a finished optimization run persists (minus wall-clock data).
struct RunRecord {
  std::string config_text;
  uint64_t effective_seed = 0;
  int effective_restarts = 1;
  std::string tool_version = kToolVersion;
  OptimizationResult result;
  double pe_uncontrolled = 0.0;
  BlochVector final_bloch0{};
  BlochVector final_bloch1{};
};

std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& text);
/// Equality over persisted content (wall_seconds is sidecar-only).
bool records_equal(const RunRecord& a, const RunRecord& b);

std::string format_double(double v);  // 17 significant digits

void write_pulse_csv(const std::string& path, const ControlField& controls,
                     double dt);
ControlField read_pulse_csv(const std::string& path);

// Subcommands.  Each returns a process exit status.
int cmd_optimize(const RunConfig& config, const std::string& out_dir);
int cmd_sweep(const RunConfig& config, const std::string& out_dir);
int cmd_robust(const RunConfig& config, const std::string& out_dir);
int cmd_gradcheck(const RunConfig& config, const std::string& out_dir);
int cmd_trajectory(const RunConfig& config, const std::string& controls_path,
                   const std::string& out_dir);

}  // namespace qht
