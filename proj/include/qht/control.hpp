// Time discretization and piecewise-constant control fields.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qht/operators.hpp"

namespace qht {

/// Uniform grid of N slices covering [0, T].
struct TimeGrid {
  TimeGrid(double total_time, int slices);

  double total_time;
  int slices;

  double dt() const { return total_time / slices; }
};

/// K x N real control amplitudes u_{k,n}, one row per channel.
class ControlField {
 public:
  /// Empty placeholder; assign a real field before use.
  ControlField() = default;
  ControlField(Eigen::MatrixXd values, std::vector<std::string> channels);

  static ControlField constant(double amplitude, int channels, int slices);
  static ControlField zero(int channels, int slices);

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }
  const std::vector<std::string>& channels() const { return channels_; }

  int channel_count() const { return static_cast<int>(values_.rows()); }
  int slice_count() const { return static_cast<int>(values_.cols()); }
  double operator()(int channel, int slice) const {
    return values_(channel, slice);
  }

  /// Split every slice into `factor` equal sub-slices (same control
  /// function on a finer grid).
  ControlField refine(int factor) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> channels_;
};

/// States sampled at slice boundaries; length N + 1, first entry is the
/// initial state.
struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

}  // namespace qht
