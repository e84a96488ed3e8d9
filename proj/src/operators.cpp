#include "qht/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace qht {

namespace {
constexpr complexd kI{0.0, 1.0};
}

const Mat2& pauli_x() {
  static const Mat2 m = (Mat2() << 0, 1, 1, 0).finished();
  return m;
}

const Mat2& pauli_y() {
  static const Mat2 m = (Mat2() << complexd(0, 0), complexd(0, -1),
                         complexd(0, 1), complexd(0, 0))
                            .finished();
  return m;
}

const Mat2& pauli_z() {
  static const Mat2 m = (Mat2() << 1, 0, 0, -1).finished();
  return m;
}

const Mat2& identity2() {
  static const Mat2 m = Mat2::Identity();
  return m;
}

const Mat2& lowering_operator() {
  static const Mat2 m = (Mat2() << 0, 1, 0, 0).finished();
  return m;
}

const Mat2& raising_operator() {
  static const Mat2 m = (Mat2() << 0, 0, 1, 0).finished();
  return m;
}

Mat2 plus_projector() {
  Mat2 m;
  m << 0.5, 0.5, 0.5, 0.5;
  return m;
}

Mat2 minus_projector() {
  Mat2 m;
  m << 0.5, -0.5, -0.5, 0.5;
  return m;
}

bool is_hermitian(const Mat2& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

std::pair<double, double> hermitian_eigenvalues(const Mat2& m) {
  const double a = m(0, 0).real();
  const double b = m(1, 1).real();
  const double mean = 0.5 * (a + b);
  const double radius = std::hypot(0.5 * (a - b), std::abs(m(0, 1)));
  return {mean - radius, mean + radius};
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

DensityMatrix::DensityMatrix(const Mat2& m, double tol, double psd_tol)
    : m_(m) {
  if (!m.allFinite()) throw std::invalid_argument("density matrix: non-finite entries");
  if (!is_hermitian(m, tol))
    throw std::invalid_argument("density matrix: not Hermitian");
  if (std::abs(m.trace() - complexd(1.0)) > std::max(tol, kTraceTol))
    throw std::invalid_argument("density matrix: trace != 1");
  const auto [lo, hi] = hermitian_eigenvalues(m);
  (void)hi;
  if (lo < -psd_tol)
    throw std::invalid_argument("density matrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::plus_state() {
  return DensityMatrix(plus_projector());
}

DensityMatrix DensityMatrix::minus_state() {
  return DensityMatrix(minus_projector());
}

DensityMatrix DensityMatrix::basis_state(int k) {
  Mat2 m = Mat2::Zero();
  m(k, k) = 1.0;
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix(0.5 * Mat2::Identity());
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

HermitianOperator::HermitianOperator(const Mat2& m, OperatorRole role)
    : m_(m), role_(role) {
  if (!m.allFinite())
    throw std::invalid_argument("operator: non-finite entries");
  if (role != OperatorRole::collapse_prefactor && !is_hermitian(m))
    throw std::invalid_argument("operator: not Hermitian");
}

CollapseOperator::CollapseOperator(const Mat2& op_, double rate_)
    : op(op_), rate(rate_) {
  if (!op.allFinite())
    throw std::invalid_argument("collapse operator: non-finite entries");
  if (!(rate >= 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("collapse operator: rate must be >= 0");
}

Vec4 vectorize(const Mat2& m) {
  // Eigen stores column-major, so the raw layout is already vec(m).
  return Eigen::Map<const Vec4>(m.data());
}

Mat2 unvectorize(const Vec4& v) {
  return Eigen::Map<const Mat2>(v.data());
}

Mat4 kron2(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Superoperator commutation_superop(const Mat2& a) {
  return kron2(identity2(), a) - kron2(a.transpose(), identity2());
}

Superoperator lindblad_generator(const HermitianOperator& h,
                                 std::span<const CollapseOperator> collapses) {
  Superoperator l = -kI * commutation_superop(h.matrix());
  for (const auto& c : collapses) {
    const Mat2 cdc = c.op.adjoint() * c.op;
    l += c.rate * (kron2(c.op.conjugate(), c.op) -
                   0.5 * kron2(identity2(), cdc) -
                   0.5 * kron2(cdc.transpose(), identity2()));
  }
  return l;
}

Superoperator control_generator_term(const HermitianOperator& hc) {
  return -kI * commutation_superop(hc.matrix());
}

BlochVector bloch_from_density(const DensityMatrix& rho) {
  const Mat2& m = rho.matrix();
  return BlochVector{(pauli_x() * m).trace().real(),
                     (pauli_y() * m).trace().real(),
                     (pauli_z() * m).trace().real()};
}

DensityMatrix density_from_bloch(const BlochVector& r) {
  if (r.norm() > 1.0 + kBlochNormTol)
    throw std::invalid_argument("bloch vector: norm exceeds 1");
  const Mat2 m = 0.5 * (identity2() + r.x * pauli_x() + r.y * pauli_y() +
                        r.z * pauli_z());
  // Norm round-off right at the boundary can push an eigenvalue slightly
  // below zero; widen the PSD tolerance accordingly.
  return DensityMatrix(m, kHermitianTol, kPsdTol + kBlochNormTol);
}

}  // namespace qht
