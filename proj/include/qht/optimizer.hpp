// Control-pulse optimization: discrimination objectives and their analytic
// gradients (O(N) forward/backward assembly), plain gradient ascent with an
// exact line search, and the simulated-annealing hybrid.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qht/parallel.hpp"
#include "qht/problem.hpp"
#include "qht/propagation.hpp"

namespace qht {

enum class ObjectiveKind {
  /// Maximize the squared Hilbert-Schmidt distance (trace-distance squared
  /// for qubits); drives the Helstrom error down.
  maximize_distance,
  /// Minimize the misidentification probability of a fixed local POVM.
  minimize_error,
};

/// What the optimizer extremizes.  With detuning samples present the
/// functional is the weighted mean over signal offsets H_1 = (1 + dw) Hs,
/// realizing the robust (ensemble) objective; a single sample dw = 0
/// reproduces the plain objective.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::maximize_distance;
  Povm povm = plus_minus_povm();
  Priors priors{};
  std::vector<double> detuning_samples{};
  std::vector<double> detuning_weights{};  // empty => uniform

  bool robust() const { return !detuning_samples.empty(); }
  /// +1 when the functional is maximized, -1 when minimized.
  double direction() const {
    return kind == ObjectiveKind::maximize_distance ? 1.0 : -1.0;
  }

  static Objective distance();
  static Objective fixed_error(const Povm& povm, const Priors& priors);
  /// Copy of this objective averaged over `samples` uniform detunings
  /// spanning [lo, hi].
  Objective robust_over(double lo, double hi, int samples) const;

  void validate() const;
};

enum class GradientMode { exact, truncated };
enum class OptMethod { grape, sagrape };

struct GrapeOptions {
  double threshold = 1e-6;    // successive objective difference
  int max_iterations = 2000;
  double linesearch_tol = 1e-4;  // relative tolerance on the step length
  double armijo_slope = 1e-4;
  double initial_step = 1.0;
  std::optional<double> amplitude_bound{};
  GradientMode gradient_mode = GradientMode::truncated;
  uint64_t seed = 0;
};

struct AnnealOptions {
  double initial_temperature = 0.02;
  double cooling_factor = 0.9;
  int cooling_steps = 50;
  double perturbation_scale = 0.1;
  uint64_t seed = 0;
  int max_cycles = 40;
  int grape_iterations_per_cycle = 50;
};

struct OptimizationResult {
  ControlField controls;
  std::vector<double> objective_trace;  // functional value per iteration
  double pe_helstrom = 0.0;  // Helstrom error at the final controls
  double pe_fixed = 0.0;     // fixed-POVM error at the final controls
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  uint64_t seed = 0;
};

/// Value of the objective functional (D or P_e; detuning-averaged when
/// robust) for the given controls.
double objective_value(const DiscriminationProblem& problem,
                       const ControlField& controls, const Objective& objective,
                       Exec exec = Exec::parallel);

/// d(objective)/du_{k,n}.  Cost O(N) superoperator products per hypothesis
/// per detuning sample: forward states are cached and the adjoint row is
/// accumulated backwards.
Eigen::MatrixXd objective_gradient(const DiscriminationProblem& problem,
                                   const ControlField& controls,
                                   const Objective& objective,
                                   GradientMode mode = GradientMode::truncated,
                                   Exec exec = Exec::parallel);

/// Central finite differences of objective_value; the gradient oracle used
/// by tests and the gradcheck command.
Eigen::MatrixXd finite_difference_gradient(const DiscriminationProblem& problem,
                                           const ControlField& controls,
                                           const Objective& objective,
                                           double step = 1e-6,
                                           Exec exec = Exec::parallel);

OptimizationResult grape(const DiscriminationProblem& problem,
                         const Objective& objective, const ControlField& init,
                         const GrapeOptions& options,
                         Exec exec = Exec::parallel);

OptimizationResult sagrape(const DiscriminationProblem& problem,
                           const Objective& objective, const ControlField& init,
                           const GrapeOptions& grape_options,
                           const AnnealOptions& anneal_options,
                           Exec exec = Exec::parallel);

/// Init pulse for restart `r`: the supplied base field for r = 0, the zero
/// field for r = 1 (so a best-of pool never loses to free evolution), and
/// seeded uniform noise in [-amplitude, amplitude] beyond that.
ControlField initial_controls_for_restart(const ControlField& base, int restart,
                                          uint64_t seed,
                                          double amplitude = 0.1);

/// Best of `restarts` independent runs (deterministic per seed; restarts may
/// execute concurrently).  Ties break towards the lower restart index.
OptimizationResult optimize_best_of(const DiscriminationProblem& problem,
                                    const Objective& objective,
                                    const ControlField& base_init,
                                    OptMethod method,
                                    const GrapeOptions& grape_options,
                                    const AnnealOptions& anneal_options,
                                    int restarts, Exec exec = Exec::parallel);

}  // namespace qht
