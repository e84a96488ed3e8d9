// Timing comparison of the serial reference path against the OpenMP path
// for the ensemble-sample kernels, plus the analytic O(N) gradient against
// the O(K N^2) finite-difference route.

#include <chrono>
#include <cstdio>
#include <functional>

#include "qht/optimizer.hpp"
#include "qht/scenarios.hpp"

namespace {

double time_seconds(const std::function<void()>& fn, int repeats) {
  fn();  // warm up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
             .count() /
         repeats;
}

}  // namespace

int main() {
  using namespace qht;

  const DiscriminationProblem problem =
      make_problem(NoiseKind::transverse_dephasing, 0.1, 10.0, 200, 0.0,
                   MeasurementKind::helstrom);
  const ControlField controls = ControlField::constant(0.01, 2, 200);
  const Objective robust = Objective::distance().robust_over(-0.1, 0.1, 21);

  std::printf("threads available: %d\n\n", max_threads());
  std::printf("%-42s %12s %12s %8s\n", "kernel", "serial [ms]", "openmp [ms]",
              "speedup");

  const auto report = [&](const char* name, const std::function<void()>& s,
                          const std::function<void()>& p, int repeats) {
    const double ts = time_seconds(s, repeats);
    const double tp = time_seconds(p, repeats);
    std::printf("%-42s %12.2f %12.2f %8.2fx\n", name, 1e3 * ts, 1e3 * tp,
                ts / tp);
  };

  report(
      "robust objective (21 detuning samples)",
      [&] { objective_value(problem, controls, robust, Exec::serial); },
      [&] { objective_value(problem, controls, robust, Exec::parallel); }, 5);

  report(
      "robust gradient (21 detuning samples)",
      [&] {
        objective_gradient(problem, controls, robust, GradientMode::truncated,
                           Exec::serial);
      },
      [&] {
        objective_gradient(problem, controls, robust, GradientMode::truncated,
                           Exec::parallel);
      },
      5);

  const auto grid_eval = [&](Exec exec) {
    std::vector<double> errors(16);
    for_each_index(
        16,
        [&](int i) {
          errors[i] = helstrom_error_at(problem, controls,
                                        -0.2 + 0.4 * i / 15.0);
        },
        exec);
  };
  report(
      "detuning grid evaluation (16 points)",
      [&] { grid_eval(Exec::serial); }, [&] { grid_eval(Exec::parallel); }, 5);

  const Objective plain = Objective::distance();
  const double t_analytic = time_seconds(
      [&] {
        objective_gradient(problem, controls, plain, GradientMode::truncated,
                           Exec::serial);
      },
      5);
  const double t_fd = time_seconds(
      [&] {
        finite_difference_gradient(problem, controls, plain, 1e-6,
                                   Exec::serial);
      },
      1);
  std::printf("\nanalytic gradient:          %10.2f ms\n", 1e3 * t_analytic);
  std::printf("finite-difference gradient: %10.2f ms  (%.0fx slower)\n",
              1e3 * t_fd, t_fd / t_analytic);
  return 0;
}
