// The three physical settings (parallel dephasing, transverse dephasing,
// spontaneous emission), free-evolution error oracles, parameter sweeps and
// the detuning-robustness experiment.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qht/optimizer.hpp"
#include "qht/problem.hpp"

namespace qht {

/// Fully-populated discrimination problem: hypotheses {0, (1+dw) sigma_z},
/// controls {sigma_x, sigma_y}, initial state |+><+|, |+>/|-> POVM with
/// symmetric priors, and the requested noise channel.
DiscriminationProblem make_problem(NoiseKind kind, double gamma,
                                   double total_time, int slices,
                                   double domega, MeasurementKind measurement,
                                   double gamma_plus = 0.0);

/// Helstrom error of the zero-control evolution.  Parallel dephasing uses
/// the closed form (1/2)(1 - e^{-gamma T} |sin((1+dw) T)|); the other noise
/// kinds integrate the Bloch equations with a fine fixed-step RK4, fully
/// independent of the superoperator-exponential code path.
double uncontrolled_error(NoiseKind kind, double gamma, double total_time,
                          double domega, double gamma_plus = 0.0);

/// Helstrom error of `controls` on `problem` with the signal offset replaced
/// by `domega`.
double helstrom_error_at(const DiscriminationProblem& problem,
                         const ControlField& controls, double domega);

struct SweepSpec {
  enum class Parameter { target_time, gamma, domega };

  Parameter parameter = Parameter::gamma;
  std::vector<double> values;

  NoiseKind kind = NoiseKind::parallel_dephasing;
  double gamma = 0.1;
  double gamma_plus = 0.0;
  double target_time = 10.0;
  double dt = 0.05;  // slice width; slices = round(T / dt)
  double domega = 0.0;
  MeasurementKind measurement = MeasurementKind::helstrom;
  ObjectiveKind objective_kind = ObjectiveKind::maximize_distance;
  OptMethod method = OptMethod::grape;
  GrapeOptions grape{};
  AnnealOptions anneal{};
  int restarts = 1;
  double init_amplitude = 0.01;
  uint64_t seed = 0;
};

struct SweepRow {
  double value = 0.0;
  double pe_helstrom = 0.0;
  double pe_fixed = 0.0;
  double pe_uncontrolled = 0.0;
  OptimizationResult result;
};

/// One optimization per swept value (deterministic per seed; points run
/// concurrently).
std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                Exec exec = Exec::parallel);

struct RobustnessReport {
  std::vector<double> detunings;        // evaluation grid, ascending
  std::vector<double> pe_uncontrolled;  // Helstrom error per scheme
  std::vector<double> pe_optimal;
  std::vector<double> pe_robust;
  double avg_uncontrolled = 0.0;  // uniform averages over the grid
  double avg_optimal = 0.0;
  double avg_robust = 0.0;
  double training_lo = 0.0, training_hi = 0.0;
  double evaluation_lo = 0.0, evaluation_hi = 0.0;
};

/// Evaluate the three schemes (no control, nominal-optimal, robust) on an
/// evenly spaced detuning grid over the evaluation window.
RobustnessReport robustness_report(const DiscriminationProblem& problem,
                                   const ControlField& optimal_controls,
                                   const ControlField& robust_controls,
                                   std::pair<double, double> training_window,
                                   std::pair<double, double> evaluation_window,
                                   int samples, Exec exec = Exec::parallel);

struct BlochTrajectories {
  std::vector<double> times;
  std::vector<BlochVector> hypothesis0;
  std::vector<BlochVector> hypothesis1;
};

/// Per-hypothesis Bloch-vector time series for plotting/export; endpoints
/// match evolve.
BlochTrajectories bloch_trajectories(const DiscriminationProblem& problem,
                                     const ControlField& controls);

}  // namespace qht
