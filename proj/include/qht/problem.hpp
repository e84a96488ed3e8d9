// The binary discrimination problem: hypothesis pair, noise channel, control
// Hamiltonians, time grid and measurement choice.

#pragma once

#include <vector>

#include "qht/control.hpp"
#include "qht/discrimination.hpp"
#include "qht/operators.hpp"

namespace qht {

enum class NoiseKind {
  parallel_dephasing,   // collapse sqrt(gamma/2) sigma_z
  transverse_dephasing, // collapse sqrt(gamma/2) sigma_x
  spontaneous_emission  // collapse sqrt(gamma) |0><1| (+ optional pump term)
};

enum class MeasurementKind { helstrom, fixed_local };

/// Hypotheses are H_0 = 0 and H_1 = (1 + domega) * signal, with `signal`
/// the nominal field operator (sigma_z in all built-in scenarios) and
/// `domega` a fractional frequency offset.  Both hypotheses share the noise
/// channel and the control Hamiltonians.
struct DiscriminationProblem {
  HermitianOperator signal;
  double domega;
  std::vector<CollapseOperator> collapses;
  std::vector<HermitianOperator> control_hamiltonians;
  DensityMatrix initial_state;
  TimeGrid grid;
  MeasurementKind measurement;
  Povm povm;
  Priors priors;

  NoiseKind noise_kind;
  double gamma = 0.0;
  double gamma_plus = 0.0;

  int channel_count() const {
    return static_cast<int>(control_hamiltonians.size());
  }

  Mat2 hamiltonian(int hypothesis) const;

  /// Same problem with the signal offset replaced by `domega`.
  DiscriminationProblem with_detuning(double new_domega) const;
};

}  // namespace qht
