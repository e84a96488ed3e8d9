#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qht/rng.hpp"
#include "qht/scenarios.hpp"

using namespace qht;

TEST_CASE("make_problem builds the stated noise channels") {
  const DiscriminationProblem parallel = make_problem(
      NoiseKind::parallel_dephasing, 0.1, 10.0, 200, 0.0,
      MeasurementKind::helstrom);
  REQUIRE(parallel.collapses.size() == 1);
  CHECK(parallel.collapses[0].rate == doctest::Approx(0.05));
  CHECK((parallel.collapses[0].op - pauli_z()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(parallel.channel_count() == 2);
  CHECK((parallel.initial_state.matrix() - plus_projector())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK((parallel.hamiltonian(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((parallel.hamiltonian(1) - pauli_z()).cwiseAbs().maxCoeff() == 0.0);

  const DiscriminationProblem transverse = make_problem(
      NoiseKind::transverse_dephasing, 0.2, 10.0, 200, 0.0,
      MeasurementKind::helstrom);
  CHECK((transverse.collapses[0].op - pauli_x()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(transverse.collapses[0].rate == doctest::Approx(0.1));

  const DiscriminationProblem emission = make_problem(
      NoiseKind::spontaneous_emission, 0.1, 10.0, 200, 0.0,
      MeasurementKind::helstrom, 0.03);
  REQUIRE(emission.collapses.size() == 2);
  CHECK(emission.collapses[0].rate == doctest::Approx(0.1));
  CHECK((emission.collapses[0].op - lowering_operator()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(emission.collapses[1].rate == doctest::Approx(0.03));

  CHECK_THROWS_AS(make_problem(NoiseKind::parallel_dephasing, -0.1, 10.0, 200,
                               0.0, MeasurementKind::helstrom),
                  std::invalid_argument);

  // Detuning scales the alternative hypothesis.
  const DiscriminationProblem detuned = parallel.with_detuning(0.2);
  CHECK((detuned.hamiltonian(1) - 1.2 * pauli_z()).cwiseAbs().maxCoeff() <
        1e-15);
}

TEST_CASE("zero-noise problem achieves zero error at a quarter period") {
  const DiscriminationProblem p = make_problem(
      NoiseKind::parallel_dephasing, 0.0, M_PI / 2.0, 1, 0.0,
      MeasurementKind::helstrom);
  CHECK(uncontrolled_error(NoiseKind::parallel_dephasing, 0.0, M_PI / 2.0,
                           0.0) == doctest::Approx(0.0).epsilon(1e-12));
  const ControlField zero = ControlField::zero(2, 1);
  CHECK(helstrom_error_at(p, zero, 0.0) ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("emission decays towards the north pole") {
  const DiscriminationProblem p = make_problem(
      NoiseKind::spontaneous_emission, 0.1, 20.0, 400, 0.0,
      MeasurementKind::helstrom);
  const BlochVector b = bloch_from_density(
      evolve(p, 0, ControlField::zero(2, 400)).final_state);
  CHECK(b.z > 0.85);
  CHECK(b.z == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-8));
}

TEST_CASE("uncontrolled error anchors") {
  CHECK(uncontrolled_error(NoiseKind::parallel_dephasing, 0.1, M_PI, 0.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(uncontrolled_error(NoiseKind::parallel_dephasing, 0.25, 2.0 * M_PI,
                           0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(uncontrolled_error(NoiseKind::parallel_dephasing, 0.1, M_PI / 2.0,
                           0.0) ==
        doctest::Approx(0.5 * (1.0 - std::exp(-0.05 * M_PI))).epsilon(1e-12));
}

TEST_CASE("free evolution matches the independent Bloch integrator") {
  Rng rng(201);
  for (int trial = 0; trial < 20; ++trial) {
    const NoiseKind kind = static_cast<NoiseKind>(trial % 3);
    const double gamma = rng.uniform(0.0, 0.3);
    const double total_time = rng.uniform(0.5, 8.0);
    const double domega = rng.uniform(-0.15, 0.15);
    const int slices =
        std::max(1, static_cast<int>(std::lround(total_time / 0.05)));
    const DiscriminationProblem p =
        make_problem(kind, gamma, total_time, slices, domega,
                     MeasurementKind::helstrom);
    const double via_evolve =
        helstrom_error_at(p, ControlField::zero(2, slices), domega);
    const double via_oracle =
        uncontrolled_error(kind, gamma, total_time, domega);
    CHECK(std::abs(via_evolve - via_oracle) < 1e-6);
  }
}

TEST_CASE("uncontrolled transverse dephasing oscillates towards 1/4") {
  // Local maxima at T = n pi decay towards 0.25; local minima at odd
  // multiples of pi/2 grow towards it.
  const auto err = [](double t) {
    return uncontrolled_error(NoiseKind::transverse_dephasing, 0.1, t, 0.0);
  };
  const double max1 = err(M_PI), max2 = err(2.0 * M_PI), max3 = err(4.0 * M_PI);
  CHECK(max1 > max2);
  CHECK(max2 > max3);
  CHECK(max3 > 0.25);
  const double min1 = err(M_PI / 2.0), min2 = err(5.0 * M_PI / 2.0),
               min3 = err(9.0 * M_PI / 2.0);
  CHECK(min1 < min2);
  CHECK(min2 < min3);
  CHECK(min3 < 0.25);
}

TEST_CASE("bloch trajectories") {
  // Zero controls, no noise: the null hypothesis stays at (1, 0, 0).
  const DiscriminationProblem calm = make_problem(
      NoiseKind::parallel_dephasing, 0.0, 2.0, 40, 0.0,
      MeasurementKind::helstrom);
  const BlochTrajectories t0 =
      bloch_trajectories(calm, ControlField::zero(2, 40));
  REQUIRE(t0.times.size() == 41);
  for (const BlochVector& b : t0.hypothesis0) {
    CHECK(b.x == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(b.y) < 1e-10);
    CHECK(std::abs(b.z) < 1e-10);
  }

  // Transverse dephasing fixes the x-axis state even at gamma > 0.
  const DiscriminationProblem transverse = make_problem(
      NoiseKind::transverse_dephasing, 0.2, 2.0, 40, 0.0,
      MeasurementKind::helstrom);
  const BlochTrajectories t1 =
      bloch_trajectories(transverse, ControlField::zero(2, 40));
  for (const BlochVector& b : t1.hypothesis0)
    CHECK(std::abs(b.x - 1.0) < 1e-10);

  // Endpoints match evolve.
  const ControlField wiggle = ControlField::constant(0.07, 2, 40);
  const BlochTrajectories t2 = bloch_trajectories(transverse, wiggle);
  const BlochVector end =
      bloch_from_density(evolve(transverse, 1, wiggle).final_state);
  CHECK(t2.hypothesis1.back().x == doctest::Approx(end.x).epsilon(1e-14));
  CHECK(t2.hypothesis1.back().z == doctest::Approx(end.z).epsilon(1e-14));
}

TEST_CASE("run_sweep validates and stays deterministic") {
  SweepSpec spec;
  spec.kind = NoiseKind::parallel_dephasing;
  spec.parameter = SweepSpec::Parameter::gamma;
  spec.values = {0.05, 0.25};
  spec.target_time = 2.0;
  spec.grape.max_iterations = 40;
  spec.restarts = 2;
  spec.seed = 11;

  const auto rows = run_sweep(spec);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == 0.05);
  CHECK(rows[1].value == 0.25);
  for (const SweepRow& row : rows) {
    // The zero pulse sits in the restart pool, so the optimum cannot lose to
    // free evolution.
    CHECK(row.pe_helstrom <= row.pe_uncontrolled + 1e-9);
    CHECK(row.result.controls.slice_count() == 40);
  }

  const auto rows_again = run_sweep(spec);
  CHECK(rows_again[0].result.objective_trace == rows[0].result.objective_trace);
  CHECK(rows_again[1].result.controls.values() ==
        rows[1].result.controls.values());

  SweepSpec empty = spec;
  empty.values.clear();
  CHECK_THROWS_AS(run_sweep(empty), std::invalid_argument);

  SweepSpec negative = spec;
  negative.values = {-0.1};
  CHECK_THROWS_AS(run_sweep(negative), std::invalid_argument);
}

TEST_CASE("robustness report mechanics") {
  const int n = 40;
  const DiscriminationProblem p = make_problem(
      NoiseKind::transverse_dephasing, 0.1, 2.0, n, 0.0,
      MeasurementKind::helstrom);
  const ControlField zero = ControlField::zero(2, n);
  const ControlField mild = ControlField::constant(0.05, 2, n);

  const RobustnessReport report =
      robustness_report(p, mild, mild, {-0.1, 0.1}, {-0.2, 0.2}, 21);
  REQUIRE(report.detunings.size() == 21);
  CHECK(report.detunings.front() == doctest::Approx(-0.2));
  CHECK(report.detunings.back() == doctest::Approx(0.2));
  for (size_t i = 1; i < report.detunings.size(); ++i)
    CHECK(report.detunings[i] > report.detunings[i - 1]);

  // The no-control row reproduces the free-evolution oracle.
  for (size_t i = 0; i < report.detunings.size(); ++i) {
    CHECK(std::abs(report.pe_uncontrolled[i] -
                   uncontrolled_error(NoiseKind::transverse_dephasing, 0.1,
                                      2.0, report.detunings[i])) < 1e-6);
  }

  // Identical pulses give identical rows and averages.
  CHECK(report.pe_optimal == report.pe_robust);
  CHECK(report.avg_optimal == doctest::Approx(report.avg_robust));

  double mean = 0.0;
  for (double v : report.pe_uncontrolled) mean += v;
  mean /= report.pe_uncontrolled.size();
  CHECK(report.avg_uncontrolled == doctest::Approx(mean).epsilon(1e-12));

  CHECK_THROWS_AS(robustness_report(p, mild, mild, {-0.1, 0.1}, {0.2, -0.2}, 21),
                  std::invalid_argument);
  CHECK_THROWS_AS(robustness_report(p, mild, mild, {-0.1, 0.1}, {-0.2, 0.2}, 1),
                  std::invalid_argument);
}
