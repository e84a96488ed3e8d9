#include "qht/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "qht/rng.hpp"

namespace qht {

namespace {

using RowVec4 = Eigen::Matrix<complexd, 1, 4>;

double weight_at(const Objective& objective, size_t i) {
  if (objective.detuning_weights.empty())
    return 1.0 / static_cast<double>(objective.detuning_samples.size());
  return objective.detuning_weights[i];
}

// Final states of both hypotheses as raw matrices.
std::pair<Mat2, Mat2> final_states(const DiscriminationProblem& problem,
                                   const ControlField& controls) {
  const int slices = problem.grid.slices;
  const Vec4 v0 = propagate_pass(problem, 0, controls).states[slices];
  const Vec4 v1 = propagate_pass(problem, 1, controls).states[slices];
  return {unvectorize(v0), unvectorize(v1)};
}

double functional_value(const DiscriminationProblem& problem,
                        const ControlField& controls,
                        const Objective& objective) {
  const auto [rho0, rho1] = final_states(problem, controls);
  if (objective.kind == ObjectiveKind::maximize_distance) {
    const Mat2 delta = rho0 - rho1;
    return 0.5 * delta.squaredNorm();
  }
  return objective.priors.p0 * (rho0 * objective.povm.e1).trace().real() +
         objective.priors.p1 * (rho1 * objective.povm.e0).trace().real();
}

// Adds Re[ vec(seed)^+ D_{n+1}^N (d e^{dt L_n}/du_k) rho_something ] for all
// slices and channels of one hypothesis into `grad`.
void accumulate_hypothesis_gradient(const DiscriminationProblem& problem,
                                    const ForwardPass& pass, const Mat2& seed,
                                    GradientMode mode, double sample_weight,
                                    Eigen::MatrixXd& grad) {
  const int slices = problem.grid.slices;
  const int channels = problem.channel_count();
  const double dt = problem.grid.dt();

  std::vector<Superoperator> control_terms;
  control_terms.reserve(channels);
  for (const auto& hc : problem.control_hamiltonians)
    control_terms.push_back(control_generator_term(hc));

  RowVec4 adjoint = vectorize(seed).adjoint();
  for (int n = slices - 1; n >= 0; --n) {
    if (mode == GradientMode::truncated) {
      // d rho^{n+1}/du = (dt X + dt^2/2 [L, X]) rho^{n+1} + O(dt^3),
      // X = -i Hc^x; only matrix-vector products per channel.
      const Vec4& post = pass.states[n + 1];
      const Vec4 l_post = pass.generators[n] * post;
      for (int k = 0; k < channels; ++k) {
        const Vec4 x_post = control_terms[k] * post;
        const Vec4 series = dt * x_post +
                            0.5 * dt * dt *
                                (pass.generators[n] * x_post -
                                 control_terms[k] * l_post);
        grad(k, n) += sample_weight * (adjoint * series).value().real();
      }
    } else {
      const Vec4& pre = pass.states[n];
      for (int k = 0; k < channels; ++k) {
        const Superoperator deriv = step_derivative_exact(
            pass.generators[n], problem.control_hamiltonians[k], dt);
        grad(k, n) += sample_weight * (adjoint * (deriv * pre)).value().real();
      }
    }
    adjoint = adjoint * pass.propagators[n];
  }
}

Eigen::MatrixXd sample_gradient(const DiscriminationProblem& problem,
                                const ControlField& controls,
                                const Objective& objective,
                                GradientMode mode) {
  const ForwardPass pass0 = propagate_pass(problem, 0, controls);
  const ForwardPass pass1 = propagate_pass(problem, 1, controls);
  const int slices = problem.grid.slices;
  const Mat2 rho0 = unvectorize(pass0.states[slices]);
  const Mat2 rho1 = unvectorize(pass1.states[slices]);

  Mat2 seed0, seed1;
  if (objective.kind == ObjectiveKind::maximize_distance) {
    // dD/du = tr[(d rho_0 - d rho_1) (rho_0 - rho_1)]
    seed0 = rho0 - rho1;
    seed1 = -seed0;
  } else {
    seed0 = objective.priors.p0 * objective.povm.e1;
    seed1 = objective.priors.p1 * objective.povm.e0;
  }

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(problem.channel_count(),
                                               slices);
  accumulate_hypothesis_gradient(problem, pass0, seed0, mode, 1.0, grad);
  accumulate_hypothesis_gradient(problem, pass1, seed1, mode, 1.0, grad);
  return grad;
}

void check_finite_objective(double value) {
  if (!std::isfinite(value))
    throw std::runtime_error(
        "optimizer: objective became non-finite during evaluation");
}

void clamp_controls(ControlField& controls,
                    const std::optional<double>& bound) {
  if (!bound) return;
  controls.values() =
      controls.values().cwiseMax(-*bound).cwiseMin(*bound);
}

// ---------------------------------------------------------------------------
// Line search: maximize phi(eps) = score(u + eps d) for an ascent direction.
// Brackets a maximum by doubling, refines with golden sections to a relative
// tolerance on eps, and falls back to Armijo backtracking when the first
// probe overshoots.  Returns the accepted (eps, score) or nullopt when no
// improving step exists.

struct LineSearchResult {
  double step;
  double score;
};

template <typename Eval>
std::optional<LineSearchResult> line_search_ascent(const Eval& eval, double s0,
                                                   double slope0,
                                                   const GrapeOptions& options,
                                                   double& step_hint) {
  constexpr double kGolden = 0.6180339887498949;
  constexpr int kMaxExpand = 60;
  constexpr int kMaxShrink = 60;

  const auto armijo = [&](double eps, double s) {
    return s >= s0 + options.armijo_slope * eps * slope0;
  };

  double best_eps = 0.0;
  double best_score = s0;
  const auto remember = [&](double eps, double s) {
    if (s > best_score) {
      best_eps = eps;
      best_score = s;
    }
  };

  double step = step_hint;
  double f1 = eval(step);
  remember(step, f1);

  if (f1 > s0 && armijo(step, f1)) {
    // Expand until the objective turns over: [lo, mid, hi] with the maximum
    // at mid.
    double lo = 0.0;
    double mid = step, s_mid = f1;
    double hi = 2.0 * step;
    double s_hi = eval(hi);
    remember(hi, s_hi);
    for (int i = 0; i < kMaxExpand && s_hi > s_mid; ++i) {
      lo = mid;
      mid = hi;
      s_mid = s_hi;
      hi *= 2.0;
      s_hi = eval(hi);
      remember(hi, s_hi);
    }
    // Golden-section refinement on [lo, hi].
    double a = lo, b = hi;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f_x1 = eval(x1), f_x2 = eval(x2);
    remember(x1, f_x1);
    remember(x2, f_x2);
    const double tol = options.linesearch_tol;
    for (int i = 0; i < 200 && (b - a) > tol * b; ++i) {
      if (f_x1 < f_x2) {
        a = x1;
        x1 = x2;
        f_x1 = f_x2;
        x2 = a + kGolden * (b - a);
        f_x2 = eval(x2);
        remember(x2, f_x2);
      } else {
        b = x2;
        x2 = x1;
        f_x2 = f_x1;
        x1 = b - kGolden * (b - a);
        f_x1 = eval(x1);
        remember(x1, f_x1);
      }
    }
    if (best_score > s0) {
      step_hint = std::clamp(2.0 * best_eps, 1e-12, 1e12);
      return LineSearchResult{best_eps, best_score};
    }
    return std::nullopt;
  }

  // Backtracking (Armijo fallback).
  for (int i = 0; i < kMaxShrink; ++i) {
    step *= 0.5;
    const double f = eval(step);
    remember(step, f);
    if (f > s0 && armijo(step, f)) {
      step_hint = std::clamp(step, 1e-12, 1e12);
      return LineSearchResult{step, f};
    }
  }
  return std::nullopt;
}

struct LoopOutcome {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Shared GRAPE iteration: mutates `controls`, appends functional values to
// `trace`.
LoopOutcome grape_loop(const DiscriminationProblem& problem,
                       const Objective& objective, ControlField& controls,
                       const GrapeOptions& options, int max_iterations,
                       double initial_value, std::vector<double>& trace,
                       double& step_hint, Exec exec) {
  const double dir = objective.direction();
  double value = initial_value;

  LoopOutcome out;
  for (int iter = 0; iter < max_iterations; ++iter) {
    const Eigen::MatrixXd g = objective_gradient(problem, controls, objective,
                                                 options.gradient_mode, exec);
    const double gnorm = g.cwiseAbs().maxCoeff();
    if (gnorm < 1e-12) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd ascent = dir * g;
    const double slope0 = ascent.squaredNorm();

    const auto eval = [&](double eps) {
      ControlField candidate = controls;
      candidate.values() += eps * ascent;
      clamp_controls(candidate, options.amplitude_bound);
      const double v = objective_value(problem, candidate, objective, exec);
      check_finite_objective(v);
      return dir * v;
    };
    const auto accepted =
        line_search_ascent(eval, dir * value, slope0, options, step_hint);
    if (!accepted) {
      out.converged = true;
      break;
    }
    controls.values() += accepted->step * ascent;
    clamp_controls(controls, options.amplitude_bound);
    const double new_value = dir * accepted->score;
    trace.push_back(new_value);
    ++out.iterations;
    const bool settled = std::abs(new_value - value) < options.threshold;
    value = new_value;
    if (settled) {
      out.converged = true;
      break;
    }
  }
  out.value = value;
  return out;
}

void finalize_errors(const DiscriminationProblem& problem,
                     const Objective& objective, OptimizationResult& result) {
  const auto [rho0m, rho1m] = final_states(problem, result.controls);
  const DensityMatrix rho0(rho0m, 1e-8, 1e-8);
  const DensityMatrix rho1(rho1m, 1e-8, 1e-8);
  result.pe_helstrom = helstrom_error(rho0, rho1);
  result.pe_fixed =
      fixed_local_error(rho0, rho1, objective.povm, objective.priors);
}

}  // namespace

Objective Objective::distance() { return Objective{}; }

Objective Objective::fixed_error(const Povm& povm, const Priors& priors) {
  Objective o;
  o.kind = ObjectiveKind::minimize_error;
  o.povm = povm;
  o.priors = priors;
  return o;
}

Objective Objective::robust_over(double lo, double hi, int samples) const {
  if (samples < 1)
    throw std::invalid_argument("objective: robust sample count must be >= 1");
  if (hi < lo) throw std::invalid_argument("objective: bad detuning window");
  Objective o = *this;
  o.detuning_samples.resize(samples);
  o.detuning_weights.assign(samples, 1.0 / samples);
  for (int i = 0; i < samples; ++i)
    o.detuning_samples[i] =
        samples == 1 ? 0.5 * (lo + hi)
                     : lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
  return o;
}

void Objective::validate() const {
  if (detuning_weights.empty()) return;
  if (detuning_weights.size() != detuning_samples.size())
    throw std::invalid_argument("objective: weight/sample length mismatch");
  double sum = 0.0;
  for (double w : detuning_weights) {
    if (w < 0.0) throw std::invalid_argument("objective: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("objective: weights must sum to 1");
}

double objective_value(const DiscriminationProblem& problem,
                       const ControlField& controls, const Objective& objective,
                       Exec exec) {
  objective.validate();
  if (!objective.robust()) {
    const double v = functional_value(problem, controls, objective);
    check_finite_objective(v);
    return v;
  }
  const int n = static_cast<int>(objective.detuning_samples.size());
  std::vector<double> values(n, 0.0);
  for_each_index(
      n,
      [&](int i) {
        values[i] = functional_value(
            problem.with_detuning(objective.detuning_samples[i]), controls,
            objective);
      },
      exec);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += weight_at(objective, i) * values[i];
  check_finite_objective(acc);
  return acc;
}

Eigen::MatrixXd objective_gradient(const DiscriminationProblem& problem,
                                   const ControlField& controls,
                                   const Objective& objective,
                                   GradientMode mode, Exec exec) {
  objective.validate();
  if (!objective.robust())
    return sample_gradient(problem, controls, objective, mode);
  const int n = static_cast<int>(objective.detuning_samples.size());
  std::vector<Eigen::MatrixXd> grads(n);
  for_each_index(
      n,
      [&](int i) {
        grads[i] = sample_gradient(
            problem.with_detuning(objective.detuning_samples[i]), controls,
            objective, mode);
      },
      exec);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(controls.channel_count(),
                                                controls.slice_count());
  for (int i = 0; i < n; ++i) total += weight_at(objective, i) * grads[i];
  return total;
}

Eigen::MatrixXd finite_difference_gradient(const DiscriminationProblem& problem,
                                           const ControlField& controls,
                                           const Objective& objective,
                                           double step, Exec exec) {
  if (!(step > 0.0))
    throw std::invalid_argument("finite differences: step must be positive");
  Eigen::MatrixXd grad(controls.channel_count(), controls.slice_count());
  ControlField probe = controls;
  for (int k = 0; k < controls.channel_count(); ++k) {
    for (int n = 0; n < controls.slice_count(); ++n) {
      const double saved = probe.values()(k, n);
      probe.values()(k, n) = saved + step;
      const double up = objective_value(problem, probe, objective, exec);
      probe.values()(k, n) = saved - step;
      const double down = objective_value(problem, probe, objective, exec);
      probe.values()(k, n) = saved;
      grad(k, n) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

OptimizationResult grape(const DiscriminationProblem& problem,
                         const Objective& objective, const ControlField& init,
                         const GrapeOptions& options, Exec exec) {
  if (options.threshold <= 0.0)
    throw std::invalid_argument("grape: threshold must be positive");
  if (options.max_iterations < 1)
    throw std::invalid_argument("grape: max iterations must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  OptimizationResult result;
  result.seed = options.seed;
  result.controls = init;
  clamp_controls(result.controls, options.amplitude_bound);

  const double initial = objective_value(problem, result.controls, objective,
                                         exec);
  result.objective_trace.push_back(initial);
  double step_hint = options.initial_step;
  const LoopOutcome outcome =
      grape_loop(problem, objective, result.controls, options,
                 options.max_iterations, initial, result.objective_trace,
                 step_hint, exec);
  result.iterations = outcome.iterations;
  result.converged = outcome.converged;
  finalize_errors(problem, objective, result);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

OptimizationResult sagrape(const DiscriminationProblem& problem,
                           const Objective& objective, const ControlField& init,
                           const GrapeOptions& grape_options,
                           const AnnealOptions& anneal_options,
                           Exec exec) {
  if (!(anneal_options.initial_temperature > 0.0))
    throw std::invalid_argument("sagrape: initial temperature must be > 0");
  if (!(anneal_options.cooling_factor > 0.0 &&
        anneal_options.cooling_factor < 1.0))
    throw std::invalid_argument("sagrape: cooling factor must be in (0, 1)");
  if (anneal_options.cooling_steps < 1)
    throw std::invalid_argument("sagrape: cooling steps must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const double dir = objective.direction();

  OptimizationResult result;
  result.seed = anneal_options.seed;
  result.controls = init;
  clamp_controls(result.controls, grape_options.amplitude_bound);

  Rng rng(anneal_options.seed);
  double temperature = anneal_options.initial_temperature;
  double value = objective_value(problem, result.controls, objective, exec);
  result.objective_trace.push_back(value);

  ControlField best_controls = result.controls;
  double best_value = value;
  const auto remember = [&](const ControlField& u, double v) {
    if (dir * v > dir * best_value) {
      best_controls = u;
      best_value = v;
    }
  };

  double step_hint = grape_options.initial_step;
  double prev_cycle_value = value;
  for (int cycle = 0; cycle < anneal_options.max_cycles; ++cycle) {
    // Annealing sweep: perturb every amplitude, accept when the change in
    // score clears the temperature-dependent threshold (improvements always
    // pass; mild regressions pass while the temperature is high).
    for (int i = 0; i < anneal_options.cooling_steps; ++i) {
      ControlField proposal = result.controls;
      for (int k = 0; k < proposal.channel_count(); ++k)
        for (int n = 0; n < proposal.slice_count(); ++n)
          proposal.values()(k, n) += rng.uniform(
              -anneal_options.perturbation_scale,
              anneal_options.perturbation_scale);
      clamp_controls(proposal, grape_options.amplitude_bound);
      const double proposal_value =
          objective_value(problem, proposal, objective, exec);
      const double delta = dir * proposal_value - dir * value;
      const double gate =
          -std::min(1.0, temperature * std::exp(delta / temperature));
      if (delta >= gate) {
        result.controls = proposal;
        value = proposal_value;
      }
      remember(proposal, proposal_value);
      result.objective_trace.push_back(value);
      ++result.iterations;
      temperature *= anneal_options.cooling_factor;
    }

    const LoopOutcome outcome = grape_loop(
        problem, objective, result.controls, grape_options,
        anneal_options.grape_iterations_per_cycle, value,
        result.objective_trace, step_hint, exec);
    value = outcome.value;
    result.iterations += outcome.iterations;
    remember(result.controls, value);

    if (std::abs(value - prev_cycle_value) < grape_options.threshold) {
      result.converged = true;
      break;
    }
    prev_cycle_value = value;
  }

  if (dir * best_value > dir * value) {
    result.controls = best_controls;
    value = best_value;
    result.objective_trace.push_back(value);
  }
  finalize_errors(problem, objective, result);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

ControlField initial_controls_for_restart(const ControlField& base, int restart,
                                          uint64_t seed, double amplitude) {
  if (restart <= 0) return base;
  if (restart == 1)
    return ControlField::zero(base.channel_count(), base.slice_count());
  Rng rng(derive_seed(seed, static_cast<uint64_t>(restart)));
  ControlField out = base;
  for (int k = 0; k < out.channel_count(); ++k)
    for (int n = 0; n < out.slice_count(); ++n)
      out.values()(k, n) = rng.uniform(-amplitude, amplitude);
  return out;
}

OptimizationResult optimize_best_of(const DiscriminationProblem& problem,
                                    const Objective& objective,
                                    const ControlField& base_init,
                                    OptMethod method,
                                    const GrapeOptions& grape_options,
                                    const AnnealOptions& anneal_options,
                                    int restarts, Exec exec) {
  if (restarts < 1)
    throw std::invalid_argument("optimize: restarts must be >= 1");
  std::vector<OptimizationResult> results(restarts);
  for_each_index(
      restarts,
      [&](int r) {
        const ControlField init = initial_controls_for_restart(
            base_init, r, grape_options.seed);
        GrapeOptions gopts = grape_options;
        gopts.seed = derive_seed(grape_options.seed, 100 + r);
        if (method == OptMethod::grape) {
          results[r] = grape(problem, objective, init, gopts, exec);
        } else {
          AnnealOptions aopts = anneal_options;
          aopts.seed = derive_seed(anneal_options.seed, 200 + r);
          results[r] = sagrape(problem, objective, init, gopts, aopts, exec);
        }
      },
      exec);
  const double dir = objective.direction();
  int best = 0;
  for (int r = 1; r < restarts; ++r) {
    if (dir * results[r].objective_trace.back() >
        dir * results[best].objective_trace.back())
      best = r;
  }
  return results[best];
}

}  // namespace qht
