// Two-qubit entanglement and state metrics.
//
// Two-qubit inputs use the {|11>, |10>, |01>, |00>} ordering of reduced_model.hpp.

#pragma once

#include "cascade/operator_algebra.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cascade {

// Validity gate shared by every metric: trace within 1e-8 of 1, hermiticity
// within 1e-8, min eigenvalue >= -1e-7. Throws InvalidDensityMatrix.
void check_state(const ComplexMatrix& rho);

// Fully entangled fraction: largest eigenvalue of Re(M^† rho M) with M the
// magic basis.
double fef_fidelity(const ComplexMatrix& rho);

// Lower bound on the fully entangled fraction from seeded random local
// unitaries (U (x) I)|phi+> followed by coordinate refinement of the best one.
double fef_oracle(const ComplexMatrix& rho, std::size_t samples, std::uint64_t seed);

// Wootters concurrence.
double concurrence(const ComplexMatrix& rho);

// Von Neumann entropy in bits (any dimension).
double vn_entropy(const ComplexMatrix& rho);

double purity(const ComplexMatrix& rho);

// tr(rho c^† c); `flux_operator` is c^† c.
double output_flux(const ComplexMatrix& rho, const ComplexMatrix& flux_operator);

struct MetricReport {
  double fidelity = 0.0;
  double concurrence = 0.0;
  double entropy_bits = 0.0;
  double purity = 0.0;
  std::optional<double> flux_per_us;
};

inline constexpr std::string_view kMetricColumns = "fidelity,concurrence,entropy_bits,purity,flux_per_us";

// Metrics of a two-qubit state; `flux_per_us` is passed through since it is
// usually evaluated on the state of a larger model.
MetricReport metric_report(const ComplexMatrix& rho, std::optional<double> flux_per_us = std::nullopt);

// Magic-basis vectors as columns, in the two-qubit ordering above.
ComplexMatrix magic_basis();

}  // namespace cascade
