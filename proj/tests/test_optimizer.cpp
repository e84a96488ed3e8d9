#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qht/optimizer.hpp"
#include "qht/rng.hpp"
#include "qht/scenarios.hpp"
#include "test_util.hpp"

using namespace qht;

namespace {

// A problem whose control Hamiltonians are zero: the objective cannot depend
// on the controls.
DiscriminationProblem inert_problem(int slices) {
  DiscriminationProblem p = make_problem(NoiseKind::parallel_dephasing, 0.1,
                                         2.0, slices, 0.0,
                                         MeasurementKind::helstrom);
  p.control_hamiltonians = {
      HermitianOperator(Mat2::Zero(), OperatorRole::control),
      HermitianOperator(Mat2::Zero(), OperatorRole::control)};
  return p;
}

ControlField random_controls(Rng& rng, int slices, double amp = 0.5) {
  ControlField u = ControlField::zero(2, slices);
  for (int k = 0; k < 2; ++k)
    for (int n = 0; n < slices; ++n) u.values()(k, n) = rng.uniform(-amp, amp);
  return u;
}

double rel_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).cwiseAbs().maxCoeff() /
         std::max(want.cwiseAbs().maxCoeff(), 1e-30);
}

}  // namespace

TEST_CASE("objective value anchors") {
  const int n = 32;
  const DiscriminationProblem half_turn = make_problem(
      NoiseKind::parallel_dephasing, 0.0, M_PI / 2.0, n, 0.0,
      MeasurementKind::helstrom);
  const ControlField zero = ControlField::zero(2, n);
  CHECK(objective_value(half_turn, zero, Objective::distance()) ==
        doctest::Approx(1.0).epsilon(1e-10));

  const DiscriminationProblem full_turn = make_problem(
      NoiseKind::parallel_dephasing, 0.0, M_PI, n, 0.0,
      MeasurementKind::helstrom);
  CHECK(objective_value(full_turn, zero, Objective::distance()) ==
        doctest::Approx(0.0).epsilon(1e-10));

  // A single robust sample at dw = 0 is the plain objective.
  const DiscriminationProblem deph = make_problem(
      NoiseKind::parallel_dephasing, 0.1, 2.0, 40, 0.0,
      MeasurementKind::helstrom);
  Rng rng(1);
  const ControlField u = random_controls(rng, 40);
  Objective single = Objective::distance();
  single.detuning_samples = {0.0};
  single.detuning_weights = {1.0};
  CHECK(objective_value(deph, u, single) ==
        doctest::Approx(objective_value(deph, u, Objective::distance()))
            .epsilon(1e-14));
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    const NoiseKind kind = static_cast<NoiseKind>(trial % 3);
    const double gamma = rng.uniform(0.05, 0.3);
    const double total_time = rng.uniform(1.0, 2.5);
    const int slices = static_cast<int>(std::lround(total_time / 0.05));
    const DiscriminationProblem problem =
        make_problem(kind, gamma, total_time, slices, rng.uniform(-0.1, 0.1),
                     MeasurementKind::helstrom);
    const ControlField u = random_controls(rng, slices);
    const Objective objective =
        trial % 2 == 0 ? Objective::distance()
                       : Objective::fixed_error(plus_minus_povm(), Priors{});

    const Eigen::MatrixXd fd =
        finite_difference_gradient(problem, u, objective, 1e-6);
    CHECK(rel_error(objective_gradient(problem, u, objective,
                                       GradientMode::exact),
                    fd) < 1e-3);
    CHECK(rel_error(objective_gradient(problem, u, objective,
                                       GradientMode::truncated),
                    fd) < 10.0 * 0.05 * 0.05);
  }
}

TEST_CASE("truncated gradient error shrinks quadratically with dt") {
  Rng rng(79);
  const DiscriminationProblem coarse = make_problem(
      NoiseKind::transverse_dephasing, 0.15, 2.0, 40, 0.05,
      MeasurementKind::helstrom);
  const ControlField u = random_controls(rng, 40);
  DiscriminationProblem fine = coarse;
  fine.grid = TimeGrid(2.0, 80);
  const ControlField u_fine = u.refine(2);

  const Objective objective = Objective::distance();
  const double coarse_err =
      rel_error(objective_gradient(coarse, u, objective,
                                   GradientMode::truncated),
                objective_gradient(coarse, u, objective, GradientMode::exact));
  const double fine_err =
      rel_error(objective_gradient(fine, u_fine, objective,
                                   GradientMode::truncated),
                objective_gradient(fine, u_fine, objective,
                                   GradientMode::exact));
  const double ratio = coarse_err / fine_err;
  CHECK(ratio > 2.5);
  CHECK(ratio < 6.5);
}

TEST_CASE("zero control Hamiltonians give zero gradients") {
  const DiscriminationProblem inert = inert_problem(25);
  Rng rng(81);
  const ControlField u = random_controls(rng, 25);
  CHECK(objective_gradient(inert, u, Objective::distance())
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  // The finite-difference oracle sees a constant objective.
  CHECK(finite_difference_gradient(inert, u, Objective::distance(), 1e-6)
            .cwiseAbs()
            .maxCoeff() < 1e-9);
}

TEST_CASE("commuting single-slice problem has the analytic slope") {
  // One slice, no noise, control along sigma_z: everything commutes and
  // P_e(u) = (sin^2(u t) + cos^2((1+u) t)) / 2 in closed form.
  DiscriminationProblem p = make_problem(NoiseKind::parallel_dephasing, 0.0,
                                         0.7, 1, 0.0,
                                         MeasurementKind::fixed_local);
  p.control_hamiltonians = {
      HermitianOperator(pauli_z(), OperatorRole::control)};
  const double t = 0.7;
  const ControlField zero = ControlField::zero(1, 1);
  const Objective objective =
      Objective::fixed_error(plus_minus_povm(), Priors{});

  const double analytic = -0.5 * t * std::sin(2.0 * t);
  const Eigen::MatrixXd exact =
      objective_gradient(p, zero, objective, GradientMode::exact);
  CHECK(exact(0, 0) == doctest::Approx(analytic).epsilon(1e-12));
  const Eigen::MatrixXd fd =
      finite_difference_gradient(p, zero, objective, 1e-6);
  CHECK(fd(0, 0) == doctest::Approx(analytic).epsilon(1e-9));
}

TEST_CASE("robust gradient is the weighted mean of per-sample gradients") {
  const DiscriminationProblem problem = make_problem(
      NoiseKind::spontaneous_emission, 0.1, 2.0, 40, 0.0,
      MeasurementKind::helstrom);
  Rng rng(83);
  const ControlField u = random_controls(rng, 40);
  Objective robust = Objective::distance().robust_over(-0.1, 0.1, 5);
  robust.detuning_weights = {0.1, 0.2, 0.4, 0.2, 0.1};

  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 40);
  for (size_t i = 0; i < robust.detuning_samples.size(); ++i) {
    expected += robust.detuning_weights[i] *
                objective_gradient(
                    problem.with_detuning(robust.detuning_samples[i]), u,
                    Objective::distance(), GradientMode::truncated);
  }
  CHECK((objective_gradient(problem, u, robust, GradientMode::truncated) -
         expected)
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("grape returns immediately at a stationary point") {
  const DiscriminationProblem inert = inert_problem(20);
  const OptimizationResult r = grape(inert, Objective::distance(),
                                     ControlField::constant(0.01, 2, 20),
                                     GrapeOptions{});
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.objective_trace.size() == 1);
}

TEST_CASE("grape does not spoil a perfect free evolution") {
  const int n = 32;
  const DiscriminationProblem half_turn = make_problem(
      NoiseKind::parallel_dephasing, 0.0, M_PI / 2.0, n, 0.0,
      MeasurementKind::helstrom);
  const OptimizationResult r =
      grape(half_turn, Objective::distance(),
            ControlField::constant(0.01, 2, n), GrapeOptions{});
  CHECK(r.converged);
  CHECK(r.pe_helstrom <= 1e-6);
}

TEST_CASE("grape ascent trace is monotone for the distance objective") {
  const DiscriminationProblem problem = make_problem(
      NoiseKind::parallel_dephasing, 0.1, 3.0, 60, 0.0,
      MeasurementKind::helstrom);
  GrapeOptions opts;
  opts.max_iterations = 60;
  const OptimizationResult r = grape(problem, Objective::distance(),
                                     ControlField::constant(0.01, 2, 60), opts);
  REQUIRE(r.objective_trace.size() >= 2);
  for (size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] >= r.objective_trace[i - 1]);
  CHECK(r.objective_trace.back() > r.objective_trace.front());
}

TEST_CASE("amplitude bound is honored") {
  const DiscriminationProblem problem = make_problem(
      NoiseKind::parallel_dephasing, 0.1, 3.0, 60, 0.0,
      MeasurementKind::helstrom);
  GrapeOptions opts;
  opts.max_iterations = 40;
  opts.amplitude_bound = 0.05;
  const OptimizationResult r = grape(problem, Objective::distance(),
                                     ControlField::constant(0.01, 2, 60), opts);
  CHECK(r.controls.values().cwiseAbs().maxCoeff() <= 0.05 + 1e-15);
}

TEST_CASE("grape and sagrape are deterministic given the seed") {
  const DiscriminationProblem problem = make_problem(
      NoiseKind::transverse_dephasing, 0.1, 2.0, 40, 0.0,
      MeasurementKind::helstrom);
  const ControlField init = ControlField::constant(0.01, 2, 40);
  GrapeOptions gopts;
  gopts.max_iterations = 30;
  gopts.seed = 123;

  const OptimizationResult a = grape(problem, Objective::distance(), init,
                                     gopts);
  const OptimizationResult b = grape(problem, Objective::distance(), init,
                                     gopts);
  CHECK(a.objective_trace == b.objective_trace);
  CHECK(a.controls.values() == b.controls.values());

  AnnealOptions aopts;
  aopts.seed = 321;
  aopts.max_cycles = 2;
  aopts.cooling_steps = 10;
  aopts.grape_iterations_per_cycle = 5;
  const OptimizationResult c =
      sagrape(problem, Objective::distance(), init, gopts, aopts);
  const OptimizationResult d =
      sagrape(problem, Objective::distance(), init, gopts, aopts);
  CHECK(c.objective_trace == d.objective_trace);
  CHECK(c.controls.values() == d.controls.values());
  CHECK(c.pe_helstrom == d.pe_helstrom);
}

TEST_CASE("sagrape in the zero-temperature limit is greedy") {
  const DiscriminationProblem problem = make_problem(
      NoiseKind::parallel_dephasing, 0.1, 2.0, 40, 0.0,
      MeasurementKind::helstrom);
  GrapeOptions gopts;
  gopts.max_iterations = 20;
  AnnealOptions aopts;
  aopts.initial_temperature = 1e-12;
  aopts.seed = 5;
  aopts.max_cycles = 2;
  aopts.cooling_steps = 20;
  aopts.grape_iterations_per_cycle = 5;
  const OptimizationResult r =
      sagrape(problem, Objective::distance(), ControlField::constant(0.01, 2, 40),
              gopts, aopts);
  // Greedy acceptance plus monotone GRAPE steps: the whole trace ascends.
  for (size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-15);
}

TEST_CASE("sagrape returns its best-seen iterate") {
  const DiscriminationProblem problem = make_problem(
      NoiseKind::transverse_dephasing, 0.15, 2.0, 40, 0.0,
      MeasurementKind::helstrom);
  GrapeOptions gopts;
  gopts.max_iterations = 20;
  AnnealOptions aopts;
  aopts.seed = 9;
  aopts.max_cycles = 3;
  aopts.cooling_steps = 15;
  aopts.grape_iterations_per_cycle = 5;
  const OptimizationResult r =
      sagrape(problem, Objective::distance(), ControlField::constant(0.01, 2, 40),
              gopts, aopts);
  const double best =
      *std::max_element(r.objective_trace.begin(), r.objective_trace.end());
  CHECK(r.objective_trace.back() == doctest::Approx(best).epsilon(1e-14));
  CHECK(objective_value(problem, r.controls, Objective::distance()) ==
        doctest::Approx(r.objective_trace.back()).epsilon(1e-12));
}

TEST_CASE("restart pool starts from the base, zero and random fields") {
  const ControlField base = ControlField::constant(0.01, 2, 10);
  CHECK(initial_controls_for_restart(base, 0, 1).values() == base.values());
  CHECK(initial_controls_for_restart(base, 1, 1).values().cwiseAbs().maxCoeff() ==
        0.0);
  const ControlField r2 = initial_controls_for_restart(base, 2, 1);
  const ControlField r2_again = initial_controls_for_restart(base, 2, 1);
  const ControlField r3 = initial_controls_for_restart(base, 3, 1);
  CHECK(r2.values() == r2_again.values());
  CHECK(r2.values() != r3.values());
  CHECK(r2.values().cwiseAbs().maxCoeff() <= 0.1);
}

TEST_CASE("optimize_best_of picks the best final objective") {
  const DiscriminationProblem problem = make_problem(
      NoiseKind::parallel_dephasing, 0.1, 2.0, 40, 0.0,
      MeasurementKind::helstrom);
  GrapeOptions gopts;
  gopts.max_iterations = 40;
  gopts.seed = 17;
  const OptimizationResult best =
      optimize_best_of(problem, Objective::distance(),
                       ControlField::constant(0.01, 2, 40), OptMethod::grape,
                       gopts, AnnealOptions{}, 4);
  for (int r = 0; r < 4; ++r) {
    GrapeOptions opts = gopts;
    opts.seed = derive_seed(gopts.seed, 100 + r);
    const OptimizationResult one =
        grape(problem, Objective::distance(),
              initial_controls_for_restart(ControlField::constant(0.01, 2, 40),
                                           r, gopts.seed),
              opts);
    CHECK(best.objective_trace.back() >= one.objective_trace.back() - 1e-15);
  }
}
