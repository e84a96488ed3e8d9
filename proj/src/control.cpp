#include "qht/control.hpp"

#include <cmath>
#include <stdexcept>

namespace qht {

TimeGrid::TimeGrid(double total_time_, int slices_)
    : total_time(total_time_), slices(slices_) {
  if (!(total_time > 0.0) || !std::isfinite(total_time))
    throw std::invalid_argument("time grid: total time must be positive");
  if (slices < 1) throw std::invalid_argument("time grid: slices must be >= 1");
}

namespace {
std::vector<std::string> default_channel_names(int channels) {
  static const char* names[] = {"x", "y", "z"};
  std::vector<std::string> out;
  out.reserve(channels);
  for (int k = 0; k < channels; ++k)
    out.push_back(k < 3 ? names[k] : "c" + std::to_string(k));
  return out;
}
}  // namespace

ControlField::ControlField(Eigen::MatrixXd values,
                           std::vector<std::string> channels)
    : values_(std::move(values)), channels_(std::move(channels)) {
  if (values_.rows() == 0 || values_.cols() == 0)
    throw std::invalid_argument("control field: empty");
  if (!values_.allFinite())
    throw std::invalid_argument("control field: non-finite amplitude");
  if (channels_.size() != static_cast<size_t>(values_.rows()))
    throw std::invalid_argument("control field: channel label count mismatch");
}

ControlField ControlField::constant(double amplitude, int channels,
                                    int slices) {
  return ControlField(Eigen::MatrixXd::Constant(channels, slices, amplitude),
                      default_channel_names(channels));
}

ControlField ControlField::zero(int channels, int slices) {
  return constant(0.0, channels, slices);
}

ControlField ControlField::refine(int factor) const {
  if (factor < 1) throw std::invalid_argument("control field: bad refinement");
  Eigen::MatrixXd fine(values_.rows(), values_.cols() * factor);
  for (int n = 0; n < values_.cols(); ++n)
    for (int r = 0; r < factor; ++r) fine.col(n * factor + r) = values_.col(n);
  return ControlField(std::move(fine), channels_);
}

}  // namespace qht
