// Two driven qubits coupled through a cascaded reservoir.
//
// Basis of each qubit: index 0 = |1>, index 1 = |0>, so the two-qubit basis is
// {|11>, |10>, |01>, |00>}. sigma^- = |0><1|.
//
// Generator (factor-2 dissipator D[c]rho = 2 c rho c^† - c^†c rho - rho c^†c):
//
//   d(rho)/dt = D[R1]rho + D[R2]rho - 2 sqrt(eps) ([R1 rho, R2^†] + [R2, rho R1^†])
//
// with R_i = (beta_ri sigma_i^- + beta_si sigma_i^+) / sqrt(kappa_i).

#pragma once

#include "cascade/liouvillian.hpp"
#include "cascade/operator_algebra.hpp"

#include <stdexcept>
#include <utility>

namespace cascade {

class DegenerateParams : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ReducedParams {
  Complex beta_r1{0.0}, beta_s1{0.0}, beta_r2{0.0}, beta_s2{0.0};
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double epsilon = 1.0;

  // Throws std::invalid_argument on kappa <= 0, epsilon outside [0,1] or
  // non-finite values.
  void validate() const;
};

// Matched drive: beta_ri = a sqrt(kappa_i), beta_si = b sqrt(kappa_i).
struct MatchedDrive {
  Complex a{1.0};
  Complex b{0.0};
  double epsilon = 1.0;

  ReducedParams to_params(double kappa1 = 1.0, double kappa2 = 1.0) const;
  // Swaps the roles of a and b on qubit 2 (targets the psi-type Bell states).
  ReducedParams to_cross_params(double kappa1 = 1.0, double kappa2 = 1.0) const;
};

TensorSpace qubit_pair_space();

// Single-qubit sigma^- = |0><1| in the {|1>, |0>} ordering.
ComplexMatrix sigma_minus();

std::pair<ComplexMatrix, ComplexMatrix> jump_operators(const ReducedParams& p);

ComplexMatrix liouvillian_apply(const ReducedParams& p, const ComplexMatrix& rho);

// 16 x 16 column-stacked superoperator.
ComplexMatrix liouvillian_matrix(const ReducedParams& p);

// The same generator in Lindblad form (see cascade_decomposition).
LiouvillianAction reduced_liouvillian(const ReducedParams& p);

// Closed-form stationary state of the matched model. Throws DegenerateParams
// when the normalization vanishes (|a| = |b| at eps = 1).
ComplexMatrix analytic_steady_state(const MatchedDrive& m);

// (a|00> + b|11>) / sqrt(|a|^2 + |b|^2)
StateVector dark_state(Complex a, Complex b);

struct BellStates {
  StateVector phi_plus;
  StateVector phi_minus;
  StateVector psi_plus;
  StateVector psi_minus;
};
BellStates bell_states();

// Lindblad form of the cascaded generator:
//   d(rho)/dt = -i[H_c, rho] + D[J]rho + D[residual]rho
// with J = sqrt(eps) R1 - R2, residual = sqrt(1 - eps) R1 and
// H_c = i sqrt(eps) (R2^† R1 - R1^† R2).
struct CascadeDecomposition {
  ComplexMatrix J;
  ComplexMatrix residual_rate_op;
  ComplexMatrix H_c;
};
CascadeDecomposition cascade_decomposition(const ReducedParams& p);

// Output-photon flux operator of the reduced model, 2 J^† J.
ComplexMatrix reduced_flux_operator(const ReducedParams& p);

}  // namespace cascade
