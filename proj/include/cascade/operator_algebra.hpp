// Dense complex matrices over tensor-product spaces.
//
// All operators in this library are dense Eigen::MatrixXcd values. Composite
// spaces are described by a TensorSpace whose first factor is the most
// significant index (kron(A, B) places A's index first).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonHermitianError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// --------------------------- Tensor structure --------------------------------

class TensorSpace {
 public:
  TensorSpace(std::initializer_list<std::size_t> dims);
  explicit TensorSpace(std::vector<std::size_t> dims);

  std::span<const std::size_t> factor_dims() const noexcept { return dims_; }
  std::size_t factor(std::size_t site) const { return dims_.at(site); }
  std::size_t num_factors() const noexcept { return dims_.size(); }
  std::size_t total_dim() const noexcept { return total_; }

  bool operator==(const TensorSpace& other) const { return dims_ == other.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 1;
};

struct StateVector {
  TensorSpace space;
  ComplexVector amplitudes;

  StateVector(TensorSpace s, ComplexVector amps);

  double norm() const { return amplitudes.norm(); }
  bool is_normalized(double tol = 1e-12) const { return std::abs(norm() - 1.0) <= tol; }
  StateVector normalized() const;
  ComplexMatrix projector() const { return amplitudes * amplitudes.adjoint(); }
  Complex inner(const StateVector& other) const { return amplitudes.dot(other.amplitudes); }
};

// --------------------------- Construction ------------------------------------

ComplexMatrix identity(std::size_t n);

// |row><col| on an n-dimensional space.
ComplexMatrix basis_op(std::size_t n, std::size_t row, std::size_t col);

// Truncated bosonic annihilation operator on Fock states 0..levels-1.
ComplexMatrix annihilation(std::size_t levels);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix dagger(const ComplexMatrix& a);

// Lifts a single-factor operator to the full space, identity elsewhere.
ComplexMatrix embed_at(const ComplexMatrix& op, std::size_t site, const TensorSpace& space);

// Traces out every factor not listed in `keep`. Kept factors retain their
// relative order.
ComplexMatrix partial_trace(const ComplexMatrix& rho, const TensorSpace& space,
                            std::span<const std::size_t> keep);
ComplexMatrix partial_trace(const ComplexMatrix& rho, const TensorSpace& space,
                            std::initializer_list<std::size_t> keep);

// --------------------------- Hermitian utilities -----------------------------

// max|A - A†|
double hermiticity_defect(const ComplexMatrix& a);
bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12);
ComplexMatrix hermitian_part(const ComplexMatrix& a);

struct HermitianEigen {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns, orthonormal
};

// Cyclic complex Jacobi. Throws NonHermitianError when max|A - A†| exceeds
// 1e-10 * max(1, max|A|).
HermitianEigen hermitian_eigen(const ComplexMatrix& a);

// --------------------------- Vectorization -----------------------------------
//
// Column stacking: vec(A rho B) = (B^T kron A) vec(rho).

ComplexVector vec_stack(const ComplexMatrix& rho);
ComplexMatrix unvec(const ComplexVector& v);

}  // namespace cascade
