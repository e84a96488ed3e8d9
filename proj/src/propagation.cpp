#include "qht/propagation.hpp"

#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace qht {

namespace {
constexpr double kEvolvedStateTol = 1e-8;
}

Superoperator step_propagator(const Superoperator& l, double dt) {
  if (!l.allFinite())
    throw std::invalid_argument("step propagator: non-finite generator");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step propagator: dt must be positive");
  return (dt * l).exp();
}

ForwardPass propagate_pass(const DiscriminationProblem& problem,
                           int hypothesis, const ControlField& controls) {
  const int slices = problem.grid.slices;
  const int channels = problem.channel_count();
  if (controls.slice_count() != slices || controls.channel_count() != channels)
    throw std::invalid_argument("evolve: control dimensions do not match problem");

  const double dt = problem.grid.dt();
  const Superoperator free_part = lindblad_generator(
      HermitianOperator(problem.hamiltonian(hypothesis),
                        OperatorRole::hypothesis),
      problem.collapses);
  std::vector<Superoperator> control_terms;
  control_terms.reserve(channels);
  for (const auto& hc : problem.control_hamiltonians)
    control_terms.push_back(control_generator_term(hc));

  ForwardPass pass;
  pass.states.resize(slices + 1);
  pass.generators.resize(slices);
  pass.propagators.resize(slices);
  pass.states[0] = vectorize(problem.initial_state.matrix());
  for (int n = 0; n < slices; ++n) {
    Superoperator l = free_part;
    for (int k = 0; k < channels; ++k) l += controls(k, n) * control_terms[k];
    pass.generators[n] = l;
    pass.propagators[n] = step_propagator(l, dt);
    pass.states[n + 1] = pass.propagators[n] * pass.states[n];
  }
  return pass;
}

EvolveResult evolve(const DiscriminationProblem& problem, int hypothesis,
                    const ControlField& controls, bool record) {
  const ForwardPass pass = propagate_pass(problem, hypothesis, controls);
  const int slices = problem.grid.slices;
  const double dt = problem.grid.dt();

  EvolveResult out{DensityMatrix(unvectorize(pass.states[slices]),
                                 kEvolvedStateTol, kEvolvedStateTol),
                   std::nullopt};
  if (record) {
    Trajectory traj;
    traj.times.reserve(slices + 1);
    traj.states.reserve(slices + 1);
    for (int n = 0; n <= slices; ++n) {
      traj.times.push_back(n * dt);
      traj.states.emplace_back(unvectorize(pass.states[n]), kEvolvedStateTol,
                               kEvolvedStateTol);
    }
    out.trajectory = std::move(traj);
  }
  return out;
}

Superoperator step_derivative_exact(const Superoperator& l,
                                    const HermitianOperator& hc, double dt) {
  if (!l.allFinite())
    throw std::invalid_argument("step derivative: non-finite generator");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step derivative: dt must be positive");
  const Superoperator direction = control_generator_term(hc);
  Eigen::Matrix<complexd, 8, 8> block = Eigen::Matrix<complexd, 8, 8>::Zero();
  block.topLeftCorner<4, 4>() = dt * l;
  block.bottomRightCorner<4, 4>() = dt * l;
  block.topRightCorner<4, 4>() = dt * direction;
  return block.exp().topRightCorner<4, 4>();
}

Superoperator step_derivative_truncated(const Superoperator& l,
                                        const HermitianOperator& hc,
                                        double dt) {
  if (!l.allFinite())
    throw std::invalid_argument("step derivative: non-finite generator");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step derivative: dt must be positive");
  const Superoperator x = control_generator_term(hc);
  const Superoperator series = dt * x + 0.5 * dt * dt * (l * x - x * l);
  return series * step_propagator(l, dt);
}

std::vector<Superoperator> accumulate_propagators(
    const DiscriminationProblem& problem, int hypothesis,
    const ControlField& controls) {
  return propagate_pass(problem, hypothesis, controls).propagators;
}

}  // namespace qht
