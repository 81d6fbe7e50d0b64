// Shared helpers for the unit tests: seeded random matrices and states.

#pragma once

#include "cascade/operator_algebra.hpp"

#include <random>

namespace cascade::testing {

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n;
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const ComplexMatrix m = random_matrix(rng, n, n);
  return (m + m.adjoint()) / 2.0;
}

// Random full-rank density matrix (Ginibre construction).
inline ComplexMatrix random_density(std::mt19937_64& rng, Eigen::Index n) {
  const ComplexMatrix g = random_matrix(rng, n, n);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace();
}

inline ComplexMatrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(rng, n, n));
  return qr.householderQ();
}

inline ComplexMatrix pure(const ComplexVector& v) {
  const ComplexVector u = v.normalized();
  return u * u.adjoint();
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace cascade::testing
