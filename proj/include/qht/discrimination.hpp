// Error-probability objectives and measurements for binary state
// discrimination: trace distance, Helstrom bound, fixed-POVM error, the
// squared Hilbert-Schmidt surrogate, and the optimal projective measurement.

#pragma once

#include <span>

#include "qht/operators.hpp"

namespace qht {

/// Two-outcome POVM {E_0, E_1}: each element Hermitian with spectrum in
/// [0, 1] and E_0 + E_1 = I.
struct Povm {
  Povm(const Mat2& e0, const Mat2& e1);

  Mat2 e0;
  Mat2 e1;
};

/// Projectors onto |+> and |->; the fixed local measurement used by the
/// dephasing/emission scenarios.
Povm plus_minus_povm();

struct Priors {
  Priors() = default;
  Priors(double p0, double p1);

  double p0 = 0.5;
  double p1 = 0.5;
};

/// (1/2) || rho_0 - rho_1 ||_1, computed in closed form for qubits.
double trace_distance(const DensityMatrix& rho0, const DensityMatrix& rho1);

/// Minimum error probability over all measurements (symmetric priors):
/// (1/2)(1 - trace_distance).
double helstrom_error(const DensityMatrix& rho0, const DensityMatrix& rho1);

/// p0 tr(rho_0 E_1) + p1 tr(rho_1 E_0).
double fixed_local_error(const DensityMatrix& rho0, const DensityMatrix& rho1,
                         const Povm& povm, const Priors& priors);

/// (1/2) tr[(rho_0 - rho_1)^+ (rho_0 - rho_1)]; equals trace_distance^2 for
/// qubits and lower-bounds the trace distance.  Differentiable, so it serves
/// as the optimization surrogate targeting the Helstrom error.
double hs_objective(const DensityMatrix& rho0, const DensityMatrix& rho1);

struct HelstromMeasurement {
  Povm povm;
  /// Set when rho_0 == rho_1 up to round-off; the returned projectors are
  /// then the sigma_z pair by convention (any choice yields error 1/2).
  bool degenerate = false;
};

/// Projective measurement achieving the Helstrom bound: E_1 projects onto
/// the negative eigenspace of rho_0 - rho_1, E_0 = I - E_1.
HelstromMeasurement helstrom_povm(const DensityMatrix& rho0,
                                  const DensityMatrix& rho1);

/// Weighted mean of per-sample errors; uniform weights realize the uniform
/// average over a detuning window.
double averaged_error(std::span<const double> errors,
                      std::span<const double> weights);

}  // namespace qht
