#include "cascade/reduced_model.hpp"

#include <cmath>
#include <string>

namespace cascade {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_qubit_pair(const ComplexMatrix& rho, const char* who) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw DimensionError(std::string(who) + ": expected a 4x4 matrix, got " + std::to_string(rho.rows()) + "x" +
                         std::to_string(rho.cols()));
}

}  // namespace

void ReducedParams::validate() const {
  for (Complex z : {beta_r1, beta_s1, beta_r2, beta_s2})
    if (!finite(z)) throw std::invalid_argument("ReducedParams: non-finite Raman rate");
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0) || !std::isfinite(kappa1) || !std::isfinite(kappa2))
    throw std::invalid_argument("ReducedParams: kappa1 and kappa2 must be positive");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("ReducedParams: epsilon out of [0,1]");
}

ReducedParams MatchedDrive::to_params(double kappa1, double kappa2) const {
  ReducedParams p;
  p.beta_r1 = a * std::sqrt(kappa1);
  p.beta_s1 = b * std::sqrt(kappa1);
  p.beta_r2 = a * std::sqrt(kappa2);
  p.beta_s2 = b * std::sqrt(kappa2);
  p.kappa1 = kappa1;
  p.kappa2 = kappa2;
  p.epsilon = epsilon;
  p.validate();
  return p;
}

ReducedParams MatchedDrive::to_cross_params(double kappa1, double kappa2) const {
  ReducedParams p = to_params(kappa1, kappa2);
  p.beta_r2 = b * std::sqrt(kappa2);
  p.beta_s2 = a * std::sqrt(kappa2);
  return p;
}

TensorSpace qubit_pair_space() { return TensorSpace{2, 2}; }

ComplexMatrix sigma_minus() { return basis_op(2, 1, 0); }

std::pair<ComplexMatrix, ComplexMatrix> jump_operators(const ReducedParams& p) {
  p.validate();
  const TensorSpace space = qubit_pair_space();
  const ComplexMatrix sm = sigma_minus();
  const ComplexMatrix sp = sm.adjoint();
  const ComplexMatrix r1 = (p.beta_r1 * sm + p.beta_s1 * sp) / std::sqrt(p.kappa1);
  const ComplexMatrix r2 = (p.beta_r2 * sm + p.beta_s2 * sp) / std::sqrt(p.kappa2);
  return {embed_at(r1, 0, space), embed_at(r2, 1, space)};
}

ComplexMatrix liouvillian_apply(const ReducedParams& p, const ComplexMatrix& rho) {
  require_qubit_pair(rho, "liouvillian_apply");
  const auto [r1, r2] = jump_operators(p);
  auto dissipate = [&](const ComplexMatrix& c) -> ComplexMatrix {
    const ComplexMatrix cdc = c.adjoint() * c;
    return 2.0 * c * rho * c.adjoint() - cdc * rho - rho * cdc;
  };
  const ComplexMatrix r1d = r1.adjoint(), r2d = r2.adjoint();
  const ComplexMatrix comm1 = r1 * rho * r2d - r2d * r1 * rho;  // [R1 rho, R2^†]
  const ComplexMatrix comm2 = r2 * rho * r1d - rho * r1d * r2;  // [R2, rho R1^†]
  return dissipate(r1) + dissipate(r2) - 2.0 * std::sqrt(p.epsilon) * (comm1 + comm2);
}

ComplexMatrix liouvillian_matrix(const ReducedParams& p) {
  const auto [r1, r2] = jump_operators(p);
  const ComplexMatrix id = identity(4);
  auto dissipator = [&](const ComplexMatrix& c) -> ComplexMatrix {
    const ComplexMatrix cdc = c.adjoint() * c;
    return 2.0 * kron(c.conjugate(), c) - kron(id, cdc) - kron(cdc.transpose(), id);
  };
  const ComplexMatrix cross = kron(r2.conjugate(), r1) - kron(id, r2.adjoint() * r1) + kron(r1.conjugate(), r2) -
                              kron((r1.adjoint() * r2).transpose(), id);
  return dissipator(r1) + dissipator(r2) - 2.0 * std::sqrt(p.epsilon) * cross;
}

CascadeDecomposition cascade_decomposition(const ReducedParams& p) {
  const auto [r1, r2] = jump_operators(p);
  const double se = std::sqrt(p.epsilon);
  CascadeDecomposition d;
  d.J = se * r1 - r2;
  d.residual_rate_op = std::sqrt(1.0 - p.epsilon) * r1;
  d.H_c = kI * se * (r2.adjoint() * r1 - r1.adjoint() * r2);
  return d;
}

LiouvillianAction reduced_liouvillian(const ReducedParams& p) {
  CascadeDecomposition d = cascade_decomposition(p);
  std::vector<ComplexMatrix> jumps{std::move(d.J)};
  if (p.epsilon < 1.0) jumps.push_back(std::move(d.residual_rate_op));
  return LiouvillianAction(qubit_pair_space(), std::move(d.H_c), std::move(jumps));
}

ComplexMatrix reduced_flux_operator(const ReducedParams& p) {
  const CascadeDecomposition d = cascade_decomposition(p);
  return 2.0 * d.J.adjoint() * d.J;
}

ComplexMatrix analytic_steady_state(const MatchedDrive& m) {
  if (!finite(m.a) || !finite(m.b)) throw std::invalid_argument("analytic_steady_state: non-finite drive");
  if (!(m.epsilon >= 0.0 && m.epsilon <= 1.0))
    throw std::invalid_argument("analytic_steady_state: epsilon out of [0,1]");
  const double x = std::norm(m.a), y = std::norm(m.b), e = m.epsilon;
  const double s = x + y;
  if (s <= 0.0) throw std::invalid_argument("analytic_steady_state: |a|^2 + |b|^2 must be positive");

  const double d = (x * x + y * y + 2.0 * (1.0 + 2.0 * e - 4.0 * e * e) * x * y) * s;
  if (std::abs(d) <= 1e-14 * s * s * s)
    throw DegenerateParams("analytic_steady_state: stationary state is not unique (|a| = |b| at epsilon = 1)");

  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho(0, 0) = (y * y * y + (1.0 + e - 4.0 * e * e) * x * y * y + e * y * x * x) / d;
  rho(1, 1) = x * y * (1.0 - e) * (x + (1.0 + 4.0 * e) * y) / d;
  rho(2, 2) = x * y * (1.0 - e) * (y + (1.0 + 4.0 * e) * x) / d;
  rho(3, 3) = (x * x * x + e * x * y * y + (1.0 + e - 4.0 * e * e) * y * x * x) / d;
  const Complex c14 = std::sqrt(e) * std::conj(m.a) * m.b * (x * x + (2.0 - 4.0 * e) * x * y + y * y) / d;
  rho(0, 3) = c14;
  rho(3, 0) = std::conj(c14);
  const double c23 = 2.0 * std::sqrt(e) * (1.0 - e) * x * y * s / d;
  rho(1, 2) = c23;
  rho(2, 1) = c23;
  return rho;
}

StateVector dark_state(Complex a, Complex b) {
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  if (!(n > 0.0)) throw std::invalid_argument("dark_state: a and b are both zero");
  ComplexVector v = ComplexVector::Zero(4);
  v(3) = a / n;  // |00>
  v(0) = b / n;  // |11>
  return StateVector(qubit_pair_space(), std::move(v));
}

BellStates bell_states() {
  const double h = 1.0 / std::sqrt(2.0);
  auto make = [&](Eigen::Index i, Eigen::Index j, double sign) {
    ComplexVector v = ComplexVector::Zero(4);
    v(i) = h;
    v(j) = sign * h;
    return StateVector(qubit_pair_space(), std::move(v));
  };
  // indices: |11>=0, |10>=1, |01>=2, |00>=3
  return BellStates{make(3, 0, 1.0), make(3, 0, -1.0), make(2, 1, 1.0), make(2, 1, -1.0)};
}

}  // namespace cascade
