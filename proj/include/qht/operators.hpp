// Qubit operator algebra: states, Bloch vectors, Hermitian operators,
// collapse channels, and the vectorized (superoperator) representation of
// Lindblad generators.
//
// Conventions used throughout the library:
//   * basis |0> = (1,0)^T (Bloch z = +1), |1> = (0,1)^T (z = -1);
//   * column-stacking vectorization, vec(A X B) = kron(B^T, A) vec(X);
//   * generators act as d/dt vec(rho) = L vec(rho) with
//     L[rho] = -i[H, rho] + sum_k rate_k (C rho C^+ - 1/2 {C^+ C, rho});
//   * hbar = 1; time, rates and field amplitudes are dimensionless.
//
// Under these conventions H = sigma_z precesses the Bloch vector about +z at
// angular frequency 2: d<sigma_y>/dt = +2<sigma_x>.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qht {

using complexd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

/// 4x4 matrix acting on column-stacked vec(rho): Lindblad generators and
/// their exponentials (propagators).
using Superoperator = Mat4;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kBlochNormTol = 1e-10;

const Mat2& pauli_x();
const Mat2& pauli_y();
const Mat2& pauli_z();
const Mat2& identity2();
/// |0><1|: decays |1> towards |0> (Bloch z -> +1).
const Mat2& lowering_operator();
/// |1><0|: pumps |0> towards |1> (Bloch z -> -1).
const Mat2& raising_operator();

Mat2 plus_projector();   // |+><+|
Mat2 minus_projector();  // |-><-|

bool is_hermitian(const Mat2& m, double tol = kHermitianTol);

/// Eigenvalues of a 2x2 Hermitian matrix, ascending (closed form).
std::pair<double, double> hermitian_eigenvalues(const Mat2& m);

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
};

/// 2x2 Hermitian, unit-trace, positive-semidefinite matrix.  Construction
/// validates all three invariants; `tol` loosens the Hermiticity/trace checks
/// for states produced by long numerical evolutions.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Mat2& m, double tol = kHermitianTol,
                         double psd_tol = kPsdTol);

  static DensityMatrix plus_state();       // |+><+|
  static DensityMatrix minus_state();      // |-><-|
  static DensityMatrix basis_state(int k); // |k><k|, k in {0,1}
  static DensityMatrix maximally_mixed();  // I/2

  const Mat2& matrix() const { return m_; }
  double purity() const;  // tr(rho^2)

 private:
  Mat2 m_;
};

enum class OperatorRole { hypothesis, control, collapse_prefactor };

/// 2x2 operator with a role tag.  Hermiticity is enforced for hypothesis and
/// control roles; collapse prefactors (e.g. |0><1|) are exempt.
class HermitianOperator {
 public:
  HermitianOperator(const Mat2& m, OperatorRole role);

  const Mat2& matrix() const { return m_; }
  OperatorRole role() const { return role_; }

 private:
  Mat2 m_;
  OperatorRole role_;
};

/// Bare collapse operator plus its rate; the sqrt(rate) scaling is folded in
/// when the generator is built.
struct CollapseOperator {
  CollapseOperator(const Mat2& op, double rate);

  Mat2 op;
  double rate;
};

Vec4 vectorize(const Mat2& m);
Mat2 unvectorize(const Vec4& v);
Mat4 kron2(const Mat2& a, const Mat2& b);

/// Commutation superoperator A^x with vec([A, X]) = A^x vec(X).
Superoperator commutation_superop(const Mat2& a);

/// Full Lindblad generator L with vec(L[rho]) = L vec(rho).
Superoperator lindblad_generator(const HermitianOperator& h,
                                 std::span<const CollapseOperator> collapses);

/// d L / d u for a control channel u * H_c: the superoperator -i H_c^x.
Superoperator control_generator_term(const HermitianOperator& hc);

BlochVector bloch_from_density(const DensityMatrix& rho);

/// (I + x sigma_x + y sigma_y + z sigma_z) / 2; rejects |r| > 1 + 1e-10.
DensityMatrix density_from_bloch(const BlochVector& r);

}  // namespace qht
