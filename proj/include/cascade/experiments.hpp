// Configuration-driven runs: time series, sweeps, steady
// states and metrics of stored density matrices.

#pragma once

#include "cascade/cavity_model.hpp"
#include "cascade/config.hpp"
#include "cascade/dynamics.hpp"
#include "cascade/liouvillian.hpp"
#include "cascade/metrics.hpp"
#include "cascade/reduced_model.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cascade {

// One fully specified model instance.
struct ModelPoint {
  Tier tier = Tier::reduced;
  ReducedParams reduced;                // reduced tier
  std::optional<MatchedDrive> matched;  // reduced tier with identical atoms
  PhysicalParams physical;              // effective and full tiers
  ModelSpace space;
  FullModelOptions full_options;
};

// Builds the model for one grid point. `Y`, when given, sets g = sqrt(Y kappa
// gamma) and rescales Omega_s by g0/g so the Raman rates stay fixed.
ModelPoint make_point(const ExperimentConfig& cfg, Tier tier, double a_over_b, double epsilon,
                      std::optional<double> Y = std::nullopt);

// Balanced physical parameters behind a point (requires a physical section).
PhysicalParams physical_params(const ExperimentConfig& cfg, double a_over_b, double epsilon,
                               std::optional<double> Y = std::nullopt);

LiouvillianAction generator(const ModelPoint& point);
ComplexMatrix initial_state(const ModelPoint& point);  // |0_1 0_2> (x) vacuum
ComplexMatrix flux_operator(const ModelPoint& point);
ComplexMatrix qubit_state(const ModelPoint& point, const ComplexMatrix& rho);

struct SteadyControls {
  double tol = 1e-11;
  bool escalate = true;
  std::size_t max_fock_cutoff = 4;
  // Cutoff n is accepted when going to n+1 moves the fidelity by at most
  // fock_tol and the top Fock population at n is at most fock_tol.
  double fock_tol = 1e-6;
};

struct SteadyPoint {
  ComplexMatrix state;        // full model state
  ComplexMatrix qubits;       // two-qubit marginal
  double fidelity = 0.0;
  double flux_per_us = 0.0;
  double residual = 0.0;
  std::size_t fock_cutoff = 0;  // accepted cutoff (0 for the reduced tier)
  double top_fock = 0.0;
  bool converged = true;
};

// Numerical steady state, with cutoff escalation for the cavity tiers.
SteadyPoint solve_steady(const ModelPoint& point, const SteadyControls& controls = {});

struct PointRecord {
  std::string label;
  bool ok = true;
  bool converged = true;
  std::string error;
  std::vector<std::pair<std::string, double>> details;
};

struct RunResult {
  std::vector<std::filesystem::path> artifacts;
  std::filesystem::path manifest;
  std::vector<PointRecord> points;
  std::string console;  // text for stdout
  bool ok() const;
};

// Runs fn(0..n-1) on up to `workers` threads. Exceptions escape per index
// into the returned messages (empty string on success).
std::vector<std::string> parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

RunResult run_timeseries(const ExperimentConfig& cfg);
RunResult run_sweep(const ExperimentConfig& cfg);
RunResult run_steady(const ExperimentConfig& cfg);
RunResult run_metrics(const ExperimentConfig& cfg);
RunResult run_experiment(const ExperimentConfig& cfg);

std::string artifact_version();

}  // namespace cascade
