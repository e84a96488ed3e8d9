#include "qht/problem.hpp"

#include <stdexcept>

namespace qht {

Mat2 DiscriminationProblem::hamiltonian(int hypothesis) const {
  if (hypothesis == 0) return Mat2::Zero();
  if (hypothesis == 1) return (1.0 + domega) * signal.matrix();
  throw std::invalid_argument("hypothesis index must be 0 or 1");
}

DiscriminationProblem DiscriminationProblem::with_detuning(
    double new_domega) const {
  DiscriminationProblem out = *this;
  out.domega = new_domega;
  return out;
}

}  // namespace qht
