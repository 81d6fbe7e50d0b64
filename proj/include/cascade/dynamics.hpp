// Time evolution, steady states and spectral analysis.

#pragma once

#include "cascade/liouvillian.hpp"
#include "cascade/operator_algebra.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cascade {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSteadyState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDensityMatrix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws InvalidDensityMatrix unless rho is square, trace 1 within trace_tol,
// hermitian within herm_tol and has no eigenvalue below -neg_tol.
void require_density_matrix(const ComplexMatrix& rho, double trace_tol = 1e-8, double herm_tol = 1e-8,
                            double neg_tol = 1e-7);

// Smallest eigenvalue of a hermitian matrix.
double min_eigenvalue(const ComplexMatrix& rho);

// ----------------------------- Integration -----------------------------------

struct IntegratorOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0.0;       // 0 picks a step from the local derivative
  std::size_t max_steps = 200'000'000;
  bool store_states = true;
  bool check_positivity = true;    // eigenvalue check at every output time
  // Called at every output time with (index, time, state).
  std::function<void(std::size_t, double, const ComplexMatrix&)> on_output;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexMatrix> states;  // empty when store_states is false
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;        // over output states (when checked)
  bool positivity_ok = true;          // min_eigenvalue >= -1e-7
};

// Adaptive Dormand-Prince 5(4). Steps are clipped to land on every requested
// time. The state is re-symmetrized after each accepted step; positivity is
// only reported. Throws IntegrationError on step-size underflow or when the
// step budget is exhausted.
Trajectory integrate(const LiouvillianAction& L, const ComplexMatrix& rho0, const std::vector<double>& times,
                     const IntegratorOptions& options = {});

// ----------------------------- Steady states ---------------------------------

// Null vector of a column-stacked superoperator, normalized to unit trace.
// Throws DegenerateSteadyState when the second-smallest singular value is not
// above 1e-10 * ||L||.
ComplexMatrix steady_state_nullspace(const ComplexMatrix& superop);

struct LongtimeOptions {
  double tol = 1e-9;        // stop when ||L rho||_F <= tol * rate_scale
  double max_time = 1e4;    // model time budget (us)
  double first_chunk = 0.0; // 0 picks 10 / rate_scale
  IntegratorOptions integrator = tight_integrator();

  static IntegratorOptions tight_integrator() {
    IntegratorOptions o;
    o.rel_tol = 1e-10;
    o.abs_tol = 1e-12;
    return o;
  }
};

struct LongtimeResult {
  ComplexMatrix state;
  double elapsed_time = 0.0;
  double residual = 0.0;  // ||L rho||_F / rate_scale
};

// Integrates in growing chunks until the stopping rule holds. Throws
// ConvergenceError after max_time.
LongtimeResult steady_state_longtime(const LiouvillianAction& L, const ComplexMatrix& rho0,
                                     const LongtimeOptions& options = {});

struct RenewalOptions {
  double tol = 1e-11;            // on ||L rho||_F / rate_scale
  std::size_t max_iterations = 5000;      // applications of the renewal map
  std::optional<ComplexMatrix> initial;  // defaults to I / dim
};

struct RenewalResult {
  ComplexMatrix state;
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Fixed point of rho = -(P - s)^{-1} (J + s) rho, where P rho = K rho + rho K^†
// is solved through a Schur factorization of K and J is the jump term. The
// fixed point is found with restarted GMRES, which copes with slow atomic
// relaxation. No superoperator is formed, so this scales to the largest models
// here.
RenewalResult steady_state_renewal(const LiouvillianAction& L, const RenewalOptions& options = {});

enum class SteadyMethod { automatic, nullspace, longtime, renewal };

struct SteadyOptions {
  SteadyMethod method = SteadyMethod::automatic;
  double tol = 1e-11;
  std::optional<ComplexMatrix> rho0;  // longtime start; defaults to I / dim
  LongtimeOptions longtime{};
};

struct SteadyResult {
  ComplexMatrix state;
  SteadyMethod method = SteadyMethod::automatic;
  double residual = 0.0;
  std::size_t iterations = 0;
  double model_time = 0.0;
};

// automatic: nullspace when dim <= 16, renewal otherwise.
SteadyResult steady_state(const LiouvillianAction& L, const SteadyOptions& options = {});

// min |Re lambda| over eigenvalues with |lambda| > 1e-10 * ||L||. Throws
// DegenerateSteadyState when more than one eigenvalue is that close to zero.
double spectral_gap(const ComplexMatrix& superop);

}  // namespace cascade
