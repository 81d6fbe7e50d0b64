// Atoms coupled to two cascaded cavity modes.
//
// Units: every rate and frequency is an angular frequency in rad/us, i.e.
// 2*pi times the value in MHz (see two_pi_MHz). Optical and laser frequencies
// are offsets from a common reference.
//
// Atomic levels (index order): |1>, |0>, |r>, |s>, |t>. The effective model
// keeps only |1>, |0>. Space layout: [atom 1, atom 2, mode 1, mode 2].
//
// Level scheme per atom:
//   |1> <-> |r> laser  (Omega_r, omega_Lr)   |0> <-> |r> cavity (g_r)
//   |0> <-> |s> laser  (Omega_s, omega_Ls)   |1> <-> |s> cavity (g_s)
//   |0> <-> |t> laser  (Omega_t, omega_Lt)
// Detunings are laser minus transition frequency.

#pragma once

#include "cascade/liouvillian.hpp"
#include "cascade/operator_algebra.hpp"
#include "cascade/reduced_model.hpp"

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

constexpr double two_pi_MHz(double mhz) { return 2.0 * std::numbers::pi * mhz; }
constexpr double to_MHz(double angular) { return angular / (2.0 * std::numbers::pi); }

class InfeasibleBalance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnbalancedShifts : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FrameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace level {
inline constexpr std::size_t one = 0;
inline constexpr std::size_t zero = 1;
inline constexpr std::size_t r = 2;
inline constexpr std::size_t s = 3;
inline constexpr std::size_t t = 4;
}  // namespace level

struct PhysicalParams {
  double g_r = 0.0, g_s = 0.0;
  double kappa1 = 0.0, kappa2 = 0.0;
  double gamma_r = 0.0, gamma_s = 0.0, gamma_t = 0.0;
  double Delta_r = 0.0, Delta_s = 0.0, Delta_t = 0.0;
  Complex Omega_r1{0.0}, Omega_s1{0.0}, Omega_t1{0.0};
  Complex Omega_r2{0.0}, Omega_s2{0.0}, Omega_t2{0.0};
  double omega_1 = 0.0;
  double omega_cav = 0.0;
  double omega_Lr = 0.0, omega_Ls = 0.0, omega_Lt = 0.0;
  double epsilon = 1.0;

  // Throws std::invalid_argument on non-finite values, non-positive kappa,
  // negative gamma or epsilon outside [0,1].
  void validate() const;

  // Human-readable notes for every detuning that is not at least 20x the
  // largest of the Rabi frequencies, g, kappa and gamma.
  std::vector<std::string> regime_warnings() const;

  std::array<Complex, 2> Omega_r() const { return {Omega_r1, Omega_r2}; }
  std::array<Complex, 2> Omega_s() const { return {Omega_s1, Omega_s2}; }
  std::array<Complex, 2> Omega_t() const { return {Omega_t1, Omega_t2}; }
};

// Convenience constructor: identical atoms and cavities, Delta_r = Delta_s =
// Delta_t = Delta, Omega_r = a_over_b * Omega_s, Omega_t = 0, all optical
// offsets zero. Rates are angular (rad/us).
struct SymmetricSetup {
  double g = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double Delta = 0.0;
  double Omega_s = 0.0;
  double a_over_b = 1.0;
  double epsilon = 1.0;
};
PhysicalParams make_symmetric_params(const SymmetricSetup& s);

struct DerivedParams {
  std::array<Complex, 2> beta_r{}, beta_s{};
  std::array<double, 2> alpha_r{}, alpha_s{}, alpha_t{};
  double eta_r = 0.0;
  double eta_s = 0.0;
  double Y = 0.0;  // g_r g_s / (sqrt(kappa1 kappa2) gamma_r); +inf when gamma_r = 0
};

DerivedParams derive_params(const PhysicalParams& p);

// Reduced-model parameters implied by the derived Raman rates.
ReducedParams effective_reduced_params(const PhysicalParams& p);

enum class StarkMode { raman_resonant, compensated };

// Chooses Omega_t (real, non-negative) for each atom so that the ground-state
// light shifts balance. raman_resonant requires omega_1 at the two-photon
// resonance and sets alpha_t = alpha_r - alpha_s. compensated requires
// eta_r = eta_s, moves omega_cav down by eta and absorbs any residual
// ground-state detuning into alpha_t.
PhysicalParams stark_balance(const PhysicalParams& p, StarkMode mode);

// Frame in which the Hamiltonian is time independent:
//   |1> rotates at nu_1 = (omega_Ls - omega_Lr)/2, photons at nu_c = (omega_Ls + omega_Lr)/2,
//   |r> at nu_1 + omega_Lr, |s> at omega_Ls, |t> at omega_Lt.
struct RotatingFrame {
  double nu_1 = 0.0;
  double nu_c = 0.0;
  double delta_1 = 0.0;  // omega_1 - nu_1
  double delta_c = 0.0;  // omega_cav - nu_c
};
RotatingFrame rotating_frame(const PhysicalParams& p);

struct ModelSpace {
  std::size_t atom_levels = 2;  // 2 (effective) or 5 (full)
  std::size_t fock_cutoff = 2;  // photon states 0..fock_cutoff per mode

  TensorSpace tensor_space() const;
  std::size_t total_dim() const { return tensor_space().total_dim(); }
};

struct FullModelOptions {
  // When false, |t> decays only to |0>, the level it is driven from.
  bool t_decays_to_both_grounds = true;
};

LiouvillianAction build_effective_liouvillian(const PhysicalParams& p, const ModelSpace& space);
LiouvillianAction build_full_liouvillian(const PhysicalParams& p, const ModelSpace& space,
                                         const FullModelOptions& options = {});

// c^† c with c = sqrt(2 eps kappa1) a1 + sqrt(2 kappa2) a2.
ComplexMatrix output_flux_operator(const PhysicalParams& p, const ModelSpace& space);

// Two-qubit atomic state: traces out both modes, projects each atom onto
// {|1>, |0>} and renormalizes. Throws if the ground-state weight vanishes.
ComplexMatrix atomic_marginal(const ComplexMatrix& rho, const ModelSpace& space);

// |0_1 0_2> (x) vacuum.
ComplexMatrix ground_vacuum_state(const ModelSpace& space);

// Total population in the top Fock state of either mode.
double top_fock_population(const ComplexMatrix& rho, const ModelSpace& space);

}  // namespace cascade
