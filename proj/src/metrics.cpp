#include "cascade/metrics.hpp"

#include "cascade/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace cascade {

namespace {

void require_two_qubit(const ComplexMatrix& rho, const char* who) {
  if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError(std::string(who) + ": expected a 4x4 density matrix");
}

RealVector clipped_eigenvalues(const ComplexMatrix& rho) {
  RealVector ev = hermitian_eigen(hermitian_part(rho)).values;
  return ev.cwiseMax(0.0);
}

// SU(2) element from three angles.
Eigen::Matrix2cd su2(double theta, double psi, double chi) {
  Eigen::Matrix2cd u;
  const double c = std::cos(theta), s = std::sin(theta);
  u(0, 0) = std::polar(c, psi);
  u(0, 1) = std::polar(s, chi);
  u(1, 0) = -std::polar(s, -chi);
  u(1, 1) = std::polar(c, -psi);
  return u;
}

double overlap(const ComplexMatrix& rho, const Eigen::Matrix2cd& u) {
  // (U (x) I)|phi+>, |phi+> = (|00> + |11>)/sqrt2 with |11> = index 0, |00> = index 3.
  // Atom 1 carries the first index bit: state index = 2*i1 + i2.
  ComplexVector phi = ComplexVector::Zero(4);
  const double h = 1.0 / std::numbers::sqrt2;
  for (int i1 = 0; i1 < 2; ++i1) {
    phi(2 * i1 + 0) += h * u(i1, 0);  // from |1>|1> (index 0: i1=0,i2=0)
    phi(2 * i1 + 1) += h * u(i1, 1);  // from |0>|0> (index 3: i1=1,i2=1)
  }
  return std::real(phi.dot(rho * phi));
}

}  // namespace

void check_state(const ComplexMatrix& rho) { require_density_matrix(rho, 1e-8, 1e-8, 1e-7); }

ComplexMatrix magic_basis() {
  // Columns: (|00>+|11>)/√2, i(|00>-|11>)/√2, i(|01>+|10>)/√2, (|01>-|10>)/√2
  const double h = 1.0 / std::numbers::sqrt2;
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(3, 0) = h;
  m(0, 0) = h;
  m(3, 1) = kI * h;
  m(0, 1) = -kI * h;
  m(2, 2) = kI * h;
  m(1, 2) = kI * h;
  m(2, 3) = h;
  m(1, 3) = -h;
  return m;
}

double fef_fidelity(const ComplexMatrix& rho) {
  require_two_qubit(rho, "fef_fidelity");
  check_state(rho);
  const ComplexMatrix m = magic_basis();
  const ComplexMatrix in_magic = m.adjoint() * hermitian_part(rho) * m;
  const ComplexMatrix re = in_magic.real().cast<Complex>();
  return hermitian_eigen(re).values.maxCoeff();
}

double fef_oracle(const ComplexMatrix& rho, std::size_t samples, std::uint64_t seed) {
  require_two_qubit(rho, "fef_oracle");
  if (samples < 1) throw std::invalid_argument("fef_oracle: samples must be >= 1");
  const ComplexMatrix r = hermitian_part(rho);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto angles_of = [](const Eigen::Matrix2cd& u) {
    // u = e^{ia} su2(theta, psi, chi)
    const double theta = std::atan2(std::abs(u(0, 1)), std::abs(u(0, 0)));
    const Complex det = u.determinant();
    const Complex half_phase = std::sqrt(det);  // e^{ia}
    const Eigen::Matrix2cd v = u / half_phase;
    return std::array<double, 3>{theta, std::arg(v(0, 0)), std::arg(v(0, 1))};
  };

  double best = -1.0;
  std::array<double, 3> best_angles{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < samples; ++k) {
    // Haar unitary via QR of a complex Ginibre matrix with phase correction.
    Eigen::Matrix2cd z;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) z(i, j) = Complex(normal(gen), normal(gen)) / std::numbers::sqrt2;
    Eigen::HouseholderQR<Eigen::Matrix2cd> qr(z);
    Eigen::Matrix2cd q = qr.householderQ();
    const Eigen::Matrix2cd rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < 2; ++j) {
      const double a = std::abs(rr(j, j));
      if (a > 0.0) q.col(j) *= rr(j, j) / a;
    }
    const double val = overlap(r, q);
    if (val > best) {
      best = val;
      best_angles = angles_of(q);
    }
  }

  // Coordinate refinement with a shrinking step.
  double step = 0.25;
  auto eval = [&](const std::array<double, 3>& a) { return overlap(r, su2(a[0], a[1], a[2])); };
  best = std::max(best, eval(best_angles));
  while (step > 1e-9) {
    bool improved = false;
    for (std::size_t c = 0; c < 3; ++c) {
      for (double dir : {1.0, -1.0}) {
        auto trial = best_angles;
        trial[c] += dir * step;
        const double v = eval(trial);
        if (v > best) {
          best = v;
          best_angles = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

double concurrence(const ComplexMatrix& rho) {
  require_two_qubit(rho, "concurrence");
  check_state(rho);
  const ComplexMatrix r = hermitian_part(rho);
  Eigen::Matrix2cd sy;
  sy << 0.0, -kI, kI, 0.0;
  const ComplexMatrix yy = kron(sy, sy);
  // With rho = X X^†, the square roots of the eigenvalues of rho rho~ are the
  // singular values of X^T (sy (x) sy) X. This avoids square roots of
  // round-off sized eigenvalues, which would cost half the digits.
  const HermitianEigen e = hermitian_eigen(r);
  const ComplexMatrix x = e.vectors * e.values.cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal();
  const ComplexMatrix tau = x.transpose() * yy * x;
  RealVector lam = Eigen::JacobiSVD<ComplexMatrix>(tau).singularValues();
  std::sort(lam.data(), lam.data() + lam.size(), std::greater<>());
  return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

double vn_entropy(const ComplexMatrix& rho) {
  check_state(rho);
  double s = 0.0;
  for (double l : clipped_eigenvalues(rho))
    if (l > 0.0) s -= l * std::log2(l);
  return std::max(0.0, s);
}

double purity(const ComplexMatrix& rho) {
  check_state(rho);
  // tr(rho^2) = sum |rho_ij|^2 for hermitian rho
  return hermitian_part(rho).squaredNorm();
}

double output_flux(const ComplexMatrix& rho, const ComplexMatrix& flux_operator) {
  if (rho.rows() != flux_operator.rows() || rho.cols() != flux_operator.cols() || rho.rows() != rho.cols())
    throw DimensionError("output_flux: state and flux operator shapes differ");
  return (rho * flux_operator).trace().real();
}

MetricReport metric_report(const ComplexMatrix& rho, std::optional<double> flux_per_us) {
  MetricReport r;
  r.fidelity = fef_fidelity(rho);
  r.concurrence = concurrence(rho);
  r.entropy_bits = vn_entropy(rho);
  r.purity = purity(rho);
  r.flux_per_us = flux_per_us;
  return r;
}

}  // namespace cascade
