#include "cascade/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cascade {

ConfigParseError::ConfigParseError(std::size_t line, const std::string& what)
    : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}

ConfigValidationError::ConfigValidationError(std::string key, const std::string& what)
    : ConfigError(key + ": " + what), key_(std::move(key)) {}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::evolve: return "evolve";
    case ExperimentKind::sweep_eps: return "sweep-eps";
    case ExperimentKind::sweep_coop: return "sweep-coop";
    case ExperimentKind::steady: return "steady";
    case ExperimentKind::metrics: return "metrics";
  }
  return "?";
}

std::string to_string(Tier tier) {
  switch (tier) {
    case Tier::reduced: return "reduced";
    case Tier::effective: return "effective";
    case Tier::full: return "full";
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::evolve, ExperimentKind::sweep_eps, ExperimentKind::sweep_coop, ExperimentKind::steady,
                 ExperimentKind::metrics})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

std::optional<double> to_number(std::string s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Rounds to 12 significant digits so that range grids print cleanly.
double snap(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

std::string strip_brackets(const std::string& v) {
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') return trim(v.substr(1, v.size() - 2));
  return v;
}

class Reader {
 public:
  explicit Reader(const ConfigTable& t) : table_(t) {}

  bool has(const std::string& key) const { return table_.entries.count(key) > 0; }

  std::optional<std::string> raw(const std::string& key) {
    auto it = table_.entries.find(key);
    if (it == table_.entries.end()) return std::nullopt;
    used_.insert(key);
    return it->second.value;
  }

  std::optional<double> number(const std::string& key) {
    auto v = raw(key);
    if (!v) return std::nullopt;
    auto x = to_number(*v);
    if (!x || !std::isfinite(*x)) throw ConfigValidationError(key, "expected a finite number, got '" + *v + "'");
    return x;
  }

  double required_number(const std::string& key) {
    auto x = number(key);
    if (!x) throw ConfigValidationError(key, "missing required key '" + key + "'");
    return *x;
  }

  std::optional<std::size_t> count(const std::string& key) {
    auto x = number(key);
    if (!x) return std::nullopt;
    if (*x < 0 || std::floor(*x) != *x || *x > 1e15)
      throw ConfigValidationError(key, "expected a non-negative integer");
    return static_cast<std::size_t>(*x);
  }

  std::optional<bool> boolean(const std::string& key) {
    auto v = raw(key);
    if (!v) return std::nullopt;
    const std::string s = unquote(*v);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigValidationError(key, "expected true or false, got '" + *v + "'");
  }

  std::optional<std::string> string(const std::string& key) {
    auto v = raw(key);
    if (!v) return std::nullopt;
    return unquote(*v);
  }

  std::optional<std::vector<double>> list(const std::string& key) {
    auto v = raw(key);
    if (!v) return std::nullopt;
    return parse_number_list(key, *v);
  }

  void reject_unused() const {
    for (const auto& [key, entry] : table_.entries)
      if (!used_.count(key))
        throw ConfigValidationError(key, "unknown key (line " + std::to_string(entry.line) + ")");
  }

 private:
  const ConfigTable& table_;
  std::set<std::string> used_;
};

void require_epsilon(const std::string& key, double e) {
  if (!(e >= 0.0 && e <= 1.0)) throw ConfigValidationError(key, "epsilon out of [0,1]");
}

void require_nonempty_finite(const std::string& key, const std::vector<double>& xs) {
  if (xs.empty()) throw ConfigValidationError(key, "list is empty");
  for (double x : xs)
    if (!std::isfinite(x)) throw ConfigValidationError(key, "list contains a non-finite value");
}

std::vector<double> arithmetic_range(double a, double b, double step) {
  std::vector<double> out;
  const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9)) + 1;
  for (long long k = 0; k < n; ++k) out.push_back(snap(a + static_cast<double>(k) * step));
  return out;
}

std::vector<double> log_range(double a, double b, std::size_t n) {
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k)
    out.push_back(snap(a * std::pow(b / a, static_cast<double>(k) / static_cast<double>(n - 1))));
  return out;
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == quote) quoted = false;
      } else if (c == '"' || c == '\'') {
        quoted = true;
        quote = c;
      } else if (c == '#') {
        line.erase(i);
        break;
      }
    }
    if (quoted) throw ConfigParseError(lineno, "unterminated quote");
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigParseError(lineno, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!valid_key(key)) throw ConfigParseError(lineno, "invalid key '" + key + "'");
    if (value.empty()) throw ConfigParseError(lineno, "missing value for '" + key + "'");
    if (table.entries.count(key))
      throw ConfigParseError(lineno, "duplicate key '" + key + "' (first set on line " +
                                         std::to_string(table.entries[key].line) + ")");
    table.entries[key] = {value, lineno};
  }
  return table;
}

std::vector<double> parse_number_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  const std::string body = strip_brackets(trim(value));
  if (body.empty()) throw ConfigValidationError(key, "list is empty");
  for (const std::string& item : split(body, ',')) {
    if (item.empty()) throw ConfigValidationError(key, "empty list element");
    if (item.find(':') == std::string::npos) {
      auto x = to_number(item);
      if (!x) throw ConfigValidationError(key, "not a number: '" + item + "'");
      out.push_back(*x);
      continue;
    }
    const auto parts = split(item, ':');
    if (parts.size() == 4 && parts[0] == "log") {
      auto a = to_number(parts[1]), b = to_number(parts[2]), n = to_number(parts[3]);
      if (!a || !b || !n || !(*a > 0.0) || !(*b > 0.0) || *n < 2 || std::floor(*n) != *n)
        throw ConfigValidationError(key, "log range must be log:start:stop:count with positive ends, count >= 2");
      auto r = log_range(*a, *b, static_cast<std::size_t>(*n));
      out.insert(out.end(), r.begin(), r.end());
    } else if (parts.size() == 3) {
      auto a = to_number(parts[0]), b = to_number(parts[1]), step = to_number(parts[2]);
      if (!a || !b || !step || !(*step > 0.0) || *b < *a)
        throw ConfigValidationError(key, "range must be start:stop:step with step > 0 and stop >= start");
      auto r = arithmetic_range(*a, *b, *step);
      out.insert(out.end(), r.begin(), r.end());
    } else {
      throw ConfigValidationError(key, "malformed range '" + item + "'");
    }
  }
  require_nonempty_finite(key, out);
  return out;
}

std::vector<double> default_sweep_a_over_b() { return arithmetic_range(1.1, 4.0, 0.1); }
std::vector<double> default_sweep_epsilon() { return arithmetic_range(0.7, 1.0, 0.01); }
std::vector<double> default_sweep_Y() { return log_range(1.0, 300.0, 30); }

ExperimentConfig build_config(const ConfigTable& table, std::optional<ExperimentKind> kind) {
  Reader r(table);
  ExperimentConfig cfg;

  if (auto e = r.string("experiment")) {
    auto k = parse_experiment_kind(*e);
    if (!k) throw ConfigValidationError("experiment", "unknown experiment '" + *e + "'");
    if (kind && *kind != *k)
      throw ConfigValidationError("experiment", "config is for '" + *e + "' but '" + to_string(*kind) + "' was requested");
    cfg.kind = *k;
  } else if (kind) {
    cfg.kind = *kind;
  } else {
    throw ConfigValidationError("experiment", "missing required key 'experiment'");
  }

  // model
  if (auto v = r.string("model.tiers")) {
    cfg.tiers.clear();
    for (const auto& item : split(strip_brackets(*v), ',')) {
      if (item == "reduced") cfg.tiers.push_back(Tier::reduced);
      else if (item == "effective") cfg.tiers.push_back(Tier::effective);
      else if (item == "full") cfg.tiers.push_back(Tier::full);
      else throw ConfigValidationError("model.tiers", "unknown tier '" + item + "' (reduced, effective, full)");
    }
    std::set<Tier> uniq(cfg.tiers.begin(), cfg.tiers.end());
    if (uniq.size() != cfg.tiers.size()) throw ConfigValidationError("model.tiers", "duplicate tier");
  }
  if (auto n = r.count("model.fock_cutoff")) cfg.fock_cutoff = *n;
  if (auto n = r.count("model.max_fock_cutoff")) cfg.max_fock_cutoff = *n;
  if (auto b = r.boolean("model.fock_escalate")) cfg.fock_escalate = *b;
  if (auto b = r.boolean("model.t_decays_to_both_grounds")) cfg.t_decays_to_both_grounds = *b;
  if (cfg.fock_cutoff < 1) throw ConfigValidationError("model.fock_cutoff", "must be >= 1");
  if (cfg.max_fock_cutoff < cfg.fock_cutoff)
    throw ConfigValidationError("model.max_fock_cutoff", "must be >= model.fock_cutoff");

  // physical
  const bool any_physical = std::any_of(table.entries.begin(), table.entries.end(),
                                        [](const auto& kv) { return kv.first.rfind("physical.", 0) == 0; });
  const bool needs_physical = cfg.kind == ExperimentKind::sweep_coop ||
                              std::any_of(cfg.tiers.begin(), cfg.tiers.end(), [](Tier t) { return t != Tier::reduced; });
  if (any_physical || needs_physical) {
    PhysicalSection p;
    p.g_2pi_MHz = r.required_number("physical.g_2pi_MHz");
    p.kappa1_2pi_MHz = r.required_number("physical.kappa1_2pi_MHz");
    p.kappa2_2pi_MHz = r.number("physical.kappa2_2pi_MHz").value_or(p.kappa1_2pi_MHz);
    p.gamma_2pi_MHz = r.required_number("physical.gamma_2pi_MHz");
    p.delta_2pi_MHz = r.required_number("physical.delta_2pi_MHz");
    p.omega_s_2pi_MHz = r.required_number("physical.omega_s_2pi_MHz");
    if (auto c = r.boolean("physical.compensate")) p.compensate = *c;
    if (!(p.kappa1_2pi_MHz > 0.0)) throw ConfigValidationError("physical.kappa1_2pi_MHz", "must be positive");
    if (!(p.kappa2_2pi_MHz > 0.0)) throw ConfigValidationError("physical.kappa2_2pi_MHz", "must be positive");
    if (p.kappa2_2pi_MHz != p.kappa1_2pi_MHz)
      throw ConfigValidationError("physical.kappa2_2pi_MHz", "unequal cavity decay rates are not supported by the experiments");
    if (p.g_2pi_MHz < 0.0) throw ConfigValidationError("physical.g_2pi_MHz", "must be non-negative");
    if (p.gamma_2pi_MHz < 0.0) throw ConfigValidationError("physical.gamma_2pi_MHz", "must be non-negative");
    if (p.delta_2pi_MHz == 0.0) throw ConfigValidationError("physical.delta_2pi_MHz", "must be nonzero");
    if (!(p.omega_s_2pi_MHz > 0.0)) throw ConfigValidationError("physical.omega_s_2pi_MHz", "must be positive");
    if (cfg.kind == ExperimentKind::sweep_coop && !(p.gamma_2pi_MHz > 0.0))
      throw ConfigValidationError("physical.gamma_2pi_MHz", "a cooperativity sweep needs gamma > 0");
    cfg.physical = p;
  }

  // drive
  if (auto v = r.list("drive.a_over_b")) cfg.a_over_b = *v;
  for (double x : cfg.a_over_b)
    if (!(x > 0.0)) throw ConfigValidationError("drive.a_over_b", "ratios must be positive");
  if (auto e = r.number("drive.epsilon")) cfg.epsilon = *e;
  require_epsilon("drive.epsilon", cfg.epsilon);
  if (auto b = r.number("drive.b")) {
    if (cfg.physical) throw ConfigValidationError("drive.b", "not used when physical.* parameters are given");
    if (!(*b > 0.0)) throw ConfigValidationError("drive.b", "must be positive");
    cfg.b = *b;
  }

  // time and tolerances
  if (auto t = r.number("time.t_max_us")) cfg.t_max_us = *t;
  if (auto n = r.count("time.n_points")) cfg.n_points = *n;
  if (!(cfg.t_max_us > 0.0)) throw ConfigValidationError("time.t_max_us", "must be positive");
  if (cfg.n_points < 2) throw ConfigValidationError("time.n_points", "must be >= 2");
  if (auto t = r.number("tolerance.rel")) cfg.rel_tol = *t;
  if (auto t = r.number("tolerance.abs")) cfg.abs_tol = *t;
  if (auto t = r.number("tolerance.steady")) cfg.steady_tol = *t;
  if (!(cfg.rel_tol > 0.0)) throw ConfigValidationError("tolerance.rel", "must be positive");
  if (!(cfg.abs_tol > 0.0)) throw ConfigValidationError("tolerance.abs", "must be positive");
  if (!(cfg.steady_tol > 0.0)) throw ConfigValidationError("tolerance.steady", "must be positive");

  // sweeps
  cfg.sweep_a_over_b = r.list("sweep.a_over_b").value_or(default_sweep_a_over_b());
  cfg.sweep_epsilon = r.list("sweep.epsilon").value_or(default_sweep_epsilon());
  cfg.sweep_Y = r.list("sweep.Y").value_or(default_sweep_Y());
  for (double x : cfg.sweep_a_over_b)
    if (!(x > 0.0)) throw ConfigValidationError("sweep.a_over_b", "ratios must be positive");
  for (double e : cfg.sweep_epsilon) require_epsilon("sweep.epsilon", e);
  for (double y : cfg.sweep_Y)
    if (!(y > 0.0)) throw ConfigValidationError("sweep.Y", "cooperativities must be positive");
  if ((cfg.kind == ExperimentKind::sweep_eps || cfg.kind == ExperimentKind::sweep_coop) && cfg.tiers.size() != 1)
    throw ConfigValidationError("model.tiers", "sweeps take exactly one tier");

  // output and run
  if (auto d = r.string("output.dir")) cfg.output_dir = *d;
  if (auto s = r.number("run.seed")) {
    if (*s < 0 || std::floor(*s) != *s || *s > 1.8e19) throw ConfigValidationError("run.seed", "expected a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(*s);
  }
  if (auto w = r.count("run.workers")) cfg.workers = *w;
  if (cfg.workers < 1) throw ConfigValidationError("run.workers", "must be >= 1");

  // metrics
  if (auto p = r.string("metrics.density_matrix")) cfg.density_matrix = *p;
  if (auto n = r.count("metrics.oracle_samples")) cfg.oracle_samples = *n;
  if (cfg.oracle_samples < 1) throw ConfigValidationError("metrics.oracle_samples", "must be >= 1");
  if (cfg.kind == ExperimentKind::metrics && cfg.density_matrix.empty())
    throw ConfigValidationError("metrics.density_matrix", "missing required key 'metrics.density_matrix'");

  r.reject_unused();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = build_config(parse_config_text(buf.str()), kind);
  cfg.source_path = path;
  cfg.source_text = buf.str();
  if (!cfg.density_matrix.empty() && cfg.density_matrix.is_relative())
    cfg.density_matrix = path.parent_path() / cfg.density_matrix;
  return cfg;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_reference() {
  return R"(Configuration keys (one `key = value` per line, `#` comments):
  experiment                 evolve | sweep-eps | sweep-coop | steady | metrics (optional; the subcommand decides)
  model.tiers                list of reduced, effective, full            [reduced]
  model.fock_cutoff          photons per mode kept, >= 1                 [2]
  model.max_fock_cutoff      escalation limit                            [4]
  model.fock_escalate        raise the cutoff until fidelity moves < 1e-6 [true]
  model.t_decays_to_both_grounds   |t> decays to |0> and |1> equally    [true]
  physical.g_2pi_MHz         atom-cavity coupling g/2pi (MHz)            required with physical.*
  physical.kappa1_2pi_MHz    cavity field decay kappa/2pi (MHz)          required with physical.*
  physical.kappa2_2pi_MHz    second cavity decay                         [kappa1]
  physical.gamma_2pi_MHz     excited-state linewidth gamma/2pi (MHz)     required with physical.*
  physical.delta_2pi_MHz     common detuning Delta/2pi (MHz)             required with physical.*
  physical.omega_s_2pi_MHz   Omega_s/2pi (MHz); Omega_r = a_over_b * Omega_s
  physical.compensate        compensate cavity-induced shifts            [true]
  drive.a_over_b             list of drive ratios                        [2]
  drive.epsilon              cascade coupling efficiency in [0,1]        [1]
  drive.b                    drive amplitude b without physical.*        [1]
  time.t_max_us              evolution time (us)                         [20]
  time.n_points              output points including t = 0               [201]
  tolerance.rel, tolerance.abs   integrator tolerances                   [1e-8, 1e-10]
  tolerance.steady           steady-state residual tolerance             [1e-11]
  sweep.a_over_b             sweep grid                                  [1.1:4.0:0.1]
  sweep.epsilon              sweep grid                                  [0.7:1.0:0.01]
  sweep.Y                    cooperativity grid                          [log:1:300:30]
  output.dir                 output directory                            [out]
  run.seed                   seed recorded in the manifest and used by the fidelity oracle [0]
  run.workers                concurrent sweep points                     [1]
  metrics.density_matrix     input file for `metrics` (relative to the config file)
  metrics.oracle_samples     random unitaries for the fidelity oracle    [10000]
Lists are comma separated and accept ranges start:stop:step and log:start:stop:count.
)";
}

}  // namespace cascade
