// Experiment configuration files.
//
// Grammar: one `key = value` per line, `#` starts a comment, keys are dotted
// identifiers. Values are numbers, booleans (true/false), bare or quoted
// strings, or lists. A list is comma separated (optionally in brackets) and
// may contain ranges `start:stop:step` or `log:start:stop:count`.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigValidationError : public ConfigError {
 public:
  ConfigValidationError(std::string key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class ExperimentKind { evolve, sweep_eps, sweep_coop, steady, metrics };
enum class Tier { reduced, effective, full };

std::string to_string(ExperimentKind kind);
std::string to_string(Tier tier);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& s);

// Raw key/value table with line numbers, before validation.
struct ConfigTable {
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::map<std::string, Entry> entries;
};

ConfigTable parse_config_text(const std::string& text);

// Expands a list value, including ranges.
std::vector<double> parse_number_list(const std::string& key, const std::string& value);

struct PhysicalSection {
  double g_2pi_MHz = 0.0;
  double kappa1_2pi_MHz = 0.0;
  double kappa2_2pi_MHz = 0.0;
  double gamma_2pi_MHz = 0.0;
  double delta_2pi_MHz = 0.0;
  double omega_s_2pi_MHz = 0.0;
  bool compensate = true;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::evolve;
  std::vector<Tier> tiers{Tier::reduced};
  std::size_t fock_cutoff = 2;
  std::size_t max_fock_cutoff = 4;
  bool fock_escalate = true;
  bool t_decays_to_both_grounds = true;

  std::optional<PhysicalSection> physical;

  std::vector<double> a_over_b{2.0};
  double epsilon = 1.0;
  double b = 1.0;  // drive amplitude when no physical section is given

  double t_max_us = 20.0;
  std::size_t n_points = 201;

  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double steady_tol = 1e-11;

  std::vector<double> sweep_a_over_b;
  std::vector<double> sweep_epsilon;
  std::vector<double> sweep_Y;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  std::filesystem::path density_matrix;
  std::size_t oracle_samples = 10000;

  std::filesystem::path source_path;
  std::string source_text;
};

// Defaults used when the sweep keys are absent.
std::vector<double> default_sweep_a_over_b();  // 1.1 .. 4.0 step 0.1
std::vector<double> default_sweep_epsilon();   // 0.7 .. 1.0 step 0.01
std::vector<double> default_sweep_Y();         // 1 .. 300, 30 log-spaced points

// Validates a parsed table. The experiment comes from `kind` when given (the
// CLI subcommand), otherwise from the `experiment` key; when both are present
// they must agree.
ExperimentConfig build_config(const ConfigTable& table, std::optional<ExperimentKind> kind = std::nullopt);

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> kind = std::nullopt);

// Text shown by `--help`.
std::string config_reference();

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace cascade
