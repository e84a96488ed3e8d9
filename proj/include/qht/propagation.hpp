// Piecewise-constant time evolution of the master equation, propagator
// exponentials, and the exact and second-order-truncated derivatives of a
// single propagation step with respect to a control amplitude.

#pragma once

#include <optional>
#include <vector>

#include "qht/control.hpp"
#include "qht/problem.hpp"

namespace qht {

/// e^{dt L}; relative accuracy better than 1e-12 over the rate/field ranges
/// used here (scaling-and-squaring Pade).
Superoperator step_propagator(const Superoperator& l, double dt);

/// Per-slice data cached by one forward propagation of a hypothesis.
struct ForwardPass {
  std::vector<Vec4> states;               // N + 1 vectorized states
  std::vector<Superoperator> generators;  // N slice generators L_n
  std::vector<Superoperator> propagators; // N slice propagators e^{dt L_n}
};

/// Propagate hypothesis `hypothesis` under `controls`, caching everything
/// the gradient assembly needs.
ForwardPass propagate_pass(const DiscriminationProblem& problem,
                           int hypothesis, const ControlField& controls);

struct EvolveResult {
  DensityMatrix final_state;
  std::optional<Trajectory> trajectory;
};

/// rho(T) = prod_n e^{dt L_n} rho(0) with L_n built from the hypothesis
/// Hamiltonian, the slice controls and the noise channel.
EvolveResult evolve(const DiscriminationProblem& problem, int hypothesis,
                    const ControlField& controls, bool record = false);

/// Exact Frechet derivative of e^{dt L} along the control direction,
/// int_0^1 e^{s dt L} (dt dL/du) e^{(1-s) dt L} ds, read off the top-right
/// block of the exponential of [[dt L, dt dL/du], [0, dt L]].  Serves as the
/// gradient oracle for the truncated form.
Superoperator step_derivative_exact(const Superoperator& l,
                                    const HermitianOperator& hc, double dt);

/// Second-order truncation of the same derivative: with X = -i Hc^x,
/// (dt X + (dt^2/2) [L, X]) e^{dt L}; per-step error O(dt^3).
Superoperator step_derivative_truncated(const Superoperator& l,
                                        const HermitianOperator& hc,
                                        double dt);

/// The N slice propagators of a hypothesis, in time order; products of
/// suffixes give the maps D_{n+1}^{N} used by the O(N) gradient scheme.
std::vector<Superoperator> accumulate_propagators(
    const DiscriminationProblem& problem, int hypothesis,
    const ControlField& controls);

}  // namespace qht
