#include "qht/discrimination.hpp"

#include <cmath>
#include <stdexcept>

namespace qht {

namespace {
constexpr double kPovmTol = 1e-10;
constexpr double kDegenerateTol = 1e-14;
}  // namespace

Povm::Povm(const Mat2& e0_, const Mat2& e1_) : e0(e0_), e1(e1_) {
  for (const Mat2* e : {&e0, &e1}) {
    if (!e->allFinite() || !is_hermitian(*e, kPovmTol))
      throw std::invalid_argument("povm: element not Hermitian");
    const auto [lo, hi] = hermitian_eigenvalues(*e);
    if (lo < -kPovmTol || hi > 1.0 + kPovmTol)
      throw std::invalid_argument("povm: element spectrum outside [0, 1]");
  }
  if ((e0 + e1 - Mat2::Identity()).cwiseAbs().maxCoeff() > kPovmTol)
    throw std::invalid_argument("povm: elements do not sum to identity");
}

Povm plus_minus_povm() { return Povm(plus_projector(), minus_projector()); }

Priors::Priors(double p0_, double p1_) : p0(p0_), p1(p1_) {
  if (!(p0 >= 0.0 && p0 <= 1.0 && p1 >= 0.0 && p1 <= 1.0))
    throw std::invalid_argument("priors: values must lie in [0, 1]");
  if (std::abs(p0 + p1 - 1.0) > 1e-12)
    throw std::invalid_argument("priors: must sum to 1");
}

double trace_distance(const DensityMatrix& rho0, const DensityMatrix& rho1) {
  // The difference is traceless Hermitian with eigenvalues +-lambda,
  // lambda = sqrt(d^2 + |c|^2) for [[d, c], [conj(c), -d]].
  const Mat2 delta = rho0.matrix() - rho1.matrix();
  const double d = 0.5 * (delta(0, 0).real() - delta(1, 1).real());
  return std::hypot(d, std::abs(delta(0, 1)));
}

double helstrom_error(const DensityMatrix& rho0, const DensityMatrix& rho1) {
  return 0.5 * (1.0 - trace_distance(rho0, rho1));
}

double fixed_local_error(const DensityMatrix& rho0, const DensityMatrix& rho1,
                         const Povm& povm, const Priors& priors) {
  return priors.p0 * (rho0.matrix() * povm.e1).trace().real() +
         priors.p1 * (rho1.matrix() * povm.e0).trace().real();
}

double hs_objective(const DensityMatrix& rho0, const DensityMatrix& rho1) {
  const Mat2 delta = rho0.matrix() - rho1.matrix();
  return 0.5 * delta.squaredNorm();
}

HelstromMeasurement helstrom_povm(const DensityMatrix& rho0,
                                  const DensityMatrix& rho1) {
  const Mat2 delta = rho0.matrix() - rho1.matrix();
  const double d = 0.5 * (delta(0, 0).real() - delta(1, 1).real());
  const complexd c = delta(0, 1);
  const double lambda = std::hypot(d, std::abs(c));
  if (lambda < kDegenerateTol) {
    Mat2 e0 = Mat2::Zero();
    Mat2 e1 = Mat2::Zero();
    e0(0, 0) = 1.0;
    e1(1, 1) = 1.0;
    return HelstromMeasurement{Povm(e0, e1), true};
  }
  // Eigenvector of [[d, c], [conj(c), -d]] for eigenvalue -lambda, with the
  // first nonzero component made real-positive.
  Eigen::Vector2cd v;
  if (std::abs(c) > kDegenerateTol) {
    v << c, complexd(-lambda - d);
  } else {
    // Diagonal difference: the negative eigenvalue sits where delta_ii < 0.
    v = (d < 0) ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
  }
  v.normalize();
  int first = (std::abs(v(0)) > kDegenerateTol) ? 0 : 1;
  v *= std::conj(v(first)) / std::abs(v(first));
  const Mat2 e1 = v * v.adjoint();
  return HelstromMeasurement{Povm(Mat2::Identity() - e1, e1), false};
}

double averaged_error(std::span<const double> errors,
                      std::span<const double> weights) {
  if (errors.size() != weights.size())
    throw std::invalid_argument("averaged_error: length mismatch");
  if (errors.empty())
    throw std::invalid_argument("averaged_error: empty input");
  double wsum = 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < errors.size(); ++i) {
    if (weights[i] < 0.0)
      throw std::invalid_argument("averaged_error: negative weight");
    wsum += weights[i];
    acc += weights[i] * errors[i];
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("averaged_error: weights must sum to 1");
  return acc;
}

}  // namespace qht
