// Lindblad generators in the factor-2 convention
//
//   d(rho)/dt = -i[H, rho] + sum_k (2 c_k rho c_k^† - c_k^† c_k rho - rho c_k^† c_k)
//
// A LiouvillianAction is immutable and cheap to copy (shared state).

#pragma once

#include "cascade/operator_algebra.hpp"

#include <memory>
#include <vector>

namespace cascade {

class LiouvillianAction {
 public:
  // Dimensions up to this size expose a materialized superoperator.
  static constexpr std::size_t kMaterializeLimit = 64;

  LiouvillianAction(TensorSpace space, ComplexMatrix hamiltonian, std::vector<ComplexMatrix> jumps);

  // The zero generator on `space`.
  static LiouvillianAction zero(TensorSpace space);

  const TensorSpace& space() const;
  std::size_t dim() const;
  const ComplexMatrix& hamiltonian() const;
  const std::vector<ComplexMatrix>& jumps() const;

  // K = -iH - sum c^† c, so that d(rho)/dt = K rho + rho K^† + sum 2 c rho c^†.
  ComplexMatrix effective_generator() const;

  // General linear map; accepts any square complex matrix.
  ComplexMatrix apply(const ComplexMatrix& rho) const;
  ComplexMatrix operator()(const ComplexMatrix& rho) const { return apply(rho); }

  // Faster path for hermitian rho. The output is exactly hermitian.
  void apply_hermitian(const ComplexMatrix& rho, ComplexMatrix& out) const;

  // sum_k 2 c_k rho c_k^†
  ComplexMatrix jump_term(const ComplexMatrix& rho) const;

  bool materializable() const { return dim() <= kMaterializeLimit; }

  // Column-stacked superoperator, dim^2 x dim^2. Throws DimensionError above
  // kMaterializeLimit.
  ComplexMatrix superoperator() const;

  // Largest decay rate present, 2 * ||sum c^† c||_inf (at least the largest
  // Hamiltonian entry when there is no dissipation). Used to scale tolerances.
  double rate_scale() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace cascade
