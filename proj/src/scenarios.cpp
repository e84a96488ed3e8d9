#include "qht/scenarios.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "qht/rng.hpp"

namespace qht {

namespace {

// Bloch-equation right-hand side for zero-control evolution under one
// hypothesis (rotation about z at angular frequency 2*omega plus the noise
// channel).  Used only by the free-evolution oracle.
struct BlochOde {
  NoiseKind kind;
  double gamma;
  double gamma_plus;
  double omega;  // 0 or 1 + domega

  std::array<double, 3> operator()(const std::array<double, 3>& r) const {
    std::array<double, 3> d{-2.0 * omega * r[1], 2.0 * omega * r[0], 0.0};
    switch (kind) {
      case NoiseKind::parallel_dephasing:
        d[0] -= gamma * r[0];
        d[1] -= gamma * r[1];
        break;
      case NoiseKind::transverse_dephasing:
        d[1] -= gamma * r[1];
        d[2] -= gamma * r[2];
        break;
      case NoiseKind::spontaneous_emission: {
        const double transverse = 0.5 * (gamma + gamma_plus);
        d[0] -= transverse * r[0];
        d[1] -= transverse * r[1];
        d[2] += (gamma - gamma_plus) - (gamma + gamma_plus) * r[2];
        break;
      }
    }
    return d;
  }
};

std::array<double, 3> integrate_bloch(const BlochOde& ode, double total_time) {
  // Classical 4th-order fixed step, dt <= 1e-4.
  const long steps = std::max(1L, std::lround(std::ceil(total_time / 1e-4)));
  const double h = total_time / static_cast<double>(steps);
  std::array<double, 3> r{1.0, 0.0, 0.0};  // |+><+|
  const auto axpy = [](const std::array<double, 3>& a, double s,
                       const std::array<double, 3>& b) {
    return std::array<double, 3>{a[0] + s * b[0], a[1] + s * b[1],
                                 a[2] + s * b[2]};
  };
  for (long i = 0; i < steps; ++i) {
    const auto k1 = ode(r);
    const auto k2 = ode(axpy(r, 0.5 * h, k1));
    const auto k3 = ode(axpy(r, 0.5 * h, k2));
    const auto k4 = ode(axpy(r, h, k3));
    for (int c = 0; c < 3; ++c)
      r[c] += (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }
  return r;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = n == 1 ? 0.5 * (lo + hi)
                    : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return out;
}

}  // namespace

DiscriminationProblem make_problem(NoiseKind kind, double gamma,
                                   double total_time, int slices,
                                   double domega, MeasurementKind measurement,
                                   double gamma_plus) {
  if (gamma < 0.0 || gamma_plus < 0.0)
    throw std::invalid_argument("make_problem: rates must be >= 0");

  std::vector<CollapseOperator> collapses;
  switch (kind) {
    case NoiseKind::parallel_dephasing:
      collapses.emplace_back(pauli_z(), 0.5 * gamma);
      break;
    case NoiseKind::transverse_dephasing:
      // Dephasing axis n = x (theta = pi/2, phi = 0).
      collapses.emplace_back(pauli_x(), 0.5 * gamma);
      break;
    case NoiseKind::spontaneous_emission:
      collapses.emplace_back(lowering_operator(), gamma);
      if (gamma_plus > 0.0)
        collapses.emplace_back(raising_operator(), gamma_plus);
      break;
    default:
      throw std::invalid_argument("make_problem: unknown noise kind");
  }

  return DiscriminationProblem{
      HermitianOperator(pauli_z(), OperatorRole::hypothesis),
      domega,
      std::move(collapses),
      {HermitianOperator(pauli_x(), OperatorRole::control),
       HermitianOperator(pauli_y(), OperatorRole::control)},
      DensityMatrix::plus_state(),
      TimeGrid(total_time, slices),
      measurement,
      plus_minus_povm(),
      Priors{},
      kind,
      gamma,
      gamma_plus};
}

double uncontrolled_error(NoiseKind kind, double gamma, double total_time,
                          double domega, double gamma_plus) {
  if (gamma < 0.0) throw std::invalid_argument("uncontrolled_error: gamma < 0");
  if (kind == NoiseKind::parallel_dephasing) {
    return 0.5 * (1.0 - std::exp(-gamma * total_time) *
                            std::abs(std::sin((1.0 + domega) * total_time)));
  }
  const auto r0 = integrate_bloch(
      BlochOde{kind, gamma, gamma_plus, 0.0}, total_time);
  const auto r1 = integrate_bloch(
      BlochOde{kind, gamma, gamma_plus, 1.0 + domega}, total_time);
  const double dist = std::sqrt((r0[0] - r1[0]) * (r0[0] - r1[0]) +
                                (r0[1] - r1[1]) * (r0[1] - r1[1]) +
                                (r0[2] - r1[2]) * (r0[2] - r1[2]));
  return 0.5 * (1.0 - 0.5 * dist);
}

double helstrom_error_at(const DiscriminationProblem& problem,
                         const ControlField& controls, double domega) {
  const DiscriminationProblem p = problem.with_detuning(domega);
  return helstrom_error(evolve(p, 0, controls).final_state,
                        evolve(p, 1, controls).final_state);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, Exec exec) {
  if (spec.values.empty())
    throw std::invalid_argument("sweep: empty value list");
  for (double v : spec.values) {
    if (spec.parameter != SweepSpec::Parameter::domega && v < 0.0)
      throw std::invalid_argument("sweep: values must be >= 0");
  }

  std::vector<SweepRow> rows(spec.values.size());
  for_each_index(
      static_cast<int>(spec.values.size()),
      [&](int i) {
        const double v = spec.values[i];
        double gamma = spec.gamma;
        double total_time = spec.target_time;
        double domega = spec.domega;
        switch (spec.parameter) {
          case SweepSpec::Parameter::gamma: gamma = v; break;
          case SweepSpec::Parameter::target_time: total_time = v; break;
          case SweepSpec::Parameter::domega: domega = v; break;
        }
        const int slices =
            std::max(1, static_cast<int>(std::lround(total_time / spec.dt)));
        const DiscriminationProblem problem =
            make_problem(spec.kind, gamma, total_time, slices, domega,
                         spec.measurement, spec.gamma_plus);

        Objective objective =
            spec.objective_kind == ObjectiveKind::maximize_distance
                ? Objective::distance()
                : Objective::fixed_error(problem.povm, problem.priors);

        GrapeOptions gopts = spec.grape;
        gopts.seed = derive_seed(spec.seed, 1000 + i);
        AnnealOptions aopts = spec.anneal;
        aopts.seed = derive_seed(spec.seed, 2000 + i);

        const ControlField init = ControlField::constant(
            spec.init_amplitude, problem.channel_count(), slices);
        SweepRow row;
        row.value = v;
        row.result = optimize_best_of(problem, objective, init, spec.method,
                                      gopts, aopts, spec.restarts, exec);
        row.pe_helstrom = row.result.pe_helstrom;
        row.pe_fixed = row.result.pe_fixed;
        row.pe_uncontrolled = uncontrolled_error(spec.kind, gamma, total_time,
                                                 domega, spec.gamma_plus);
        rows[i] = std::move(row);
      },
      exec);
  return rows;
}

RobustnessReport robustness_report(const DiscriminationProblem& problem,
                                   const ControlField& optimal_controls,
                                   const ControlField& robust_controls,
                                   std::pair<double, double> training_window,
                                   std::pair<double, double> evaluation_window,
                                   int samples, Exec exec) {
  if (samples < 2)
    throw std::invalid_argument("robustness report: need >= 2 samples");
  if (training_window.second < training_window.first ||
      evaluation_window.second < evaluation_window.first)
    throw std::invalid_argument("robustness report: window bounds unordered");

  RobustnessReport report;
  report.training_lo = training_window.first;
  report.training_hi = training_window.second;
  report.evaluation_lo = evaluation_window.first;
  report.evaluation_hi = evaluation_window.second;
  report.detunings =
      linspace(evaluation_window.first, evaluation_window.second, samples);
  report.pe_uncontrolled.resize(samples);
  report.pe_optimal.resize(samples);
  report.pe_robust.resize(samples);

  const ControlField zero = ControlField::zero(
      optimal_controls.channel_count(), optimal_controls.slice_count());
  for_each_index(
      samples,
      [&](int i) {
        const double dw = report.detunings[i];
        report.pe_uncontrolled[i] = helstrom_error_at(problem, zero, dw);
        report.pe_optimal[i] = helstrom_error_at(problem, optimal_controls, dw);
        report.pe_robust[i] = helstrom_error_at(problem, robust_controls, dw);
      },
      exec);

  const std::vector<double> weights(samples, 1.0 / samples);
  report.avg_uncontrolled = averaged_error(report.pe_uncontrolled, weights);
  report.avg_optimal = averaged_error(report.pe_optimal, weights);
  report.avg_robust = averaged_error(report.pe_robust, weights);
  return report;
}

BlochTrajectories bloch_trajectories(const DiscriminationProblem& problem,
                                     const ControlField& controls) {
  BlochTrajectories out;
  const EvolveResult r0 = evolve(problem, 0, controls, true);
  const EvolveResult r1 = evolve(problem, 1, controls, true);
  out.times = r0.trajectory->times;
  out.hypothesis0.reserve(out.times.size());
  out.hypothesis1.reserve(out.times.size());
  for (const auto& s : r0.trajectory->states)
    out.hypothesis0.push_back(bloch_from_density(s));
  for (const auto& s : r1.trajectory->states)
    out.hypothesis1.push_back(bloch_from_density(s));
  return out;
}

}  // namespace qht
