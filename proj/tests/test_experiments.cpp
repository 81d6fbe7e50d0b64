#include "cascade/density_io.hpp"
#include "cascade/experiments.hpp"
#include "cascade/reduced_model.hpp"

#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

using namespace cascade;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cascade_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

using Row = std::map<std::string, std::string>;

std::vector<Row> read_csv(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::string line;
  std::vector<std::string> header;
  std::vector<Row> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split(line);
      continue;
    }
    const auto cells = split(line);
    REQUIRE(cells.size() == header.size());
    Row r;
    for (std::size_t i = 0; i < cells.size(); ++i) r[header[i]] = cells[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

ExperimentConfig config(const std::string& text, const fs::path& out) {
  auto cfg = build_config(parse_config_text(text));
  cfg.output_dir = out;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CASCADE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("reduced time series reaches the dark-state fidelity") {
  const fs::path out = fresh_dir("evolve");
  const auto res = run_experiment(config(
      "experiment = evolve\ndrive.a_over_b = 2\ndrive.epsilon = 1\ntime.t_max_us = 20\ntime.n_points = 41\n", out));
  REQUIRE(res.ok());
  const auto rows = read_csv(out / "evolve_ab2.csv");
  REQUIRE(rows.size() == 41);
  CHECK(std::stod(rows.front().at("time_us")) == 0.0);
  CHECK(std::stod(rows.back().at("time_us")) == 20.0);
  CHECK(std::abs(std::stod(rows.back().at("fidelity")) - 0.9) <= 1e-3);
  CHECK(std::stod(rows.front().at("fidelity")) == Approx(0.5));  // |00> overlaps phi+ by 1/2
  CHECK(fs::exists(out / "evolve_ab2.svg"));
  CHECK(fs::exists(res.manifest));
  CHECK(read_file(out / "evolve_ab2.csv").find("# manifest: evolve_manifest.json") != std::string::npos);
}

TEST_CASE("epsilon sweep uses the closed form") {
  const fs::path out = fresh_dir("sweep_eps");
  const auto res = run_experiment(config(
      "experiment = sweep-eps\nsweep.a_over_b = 2, 3\nsweep.epsilon = 0, 0.5, 1\n", out));
  REQUIRE(res.ok());
  const auto rows = read_csv(out / "sweep_eps.csv");
  REQUIRE(rows.size() == 6);
  auto at = [&](const std::string& ab, const std::string& eps) {
    for (const auto& r : rows)
      if (r.at("a_over_b") == ab && r.at("epsilon") == eps) return std::stod(r.at("fidelity"));
    FAIL("missing grid point");
    return 0.0;
  };
  CHECK(at("2", "1") == Approx(0.9).epsilon(1e-12));
  CHECK(at("3", "1") == Approx(0.8).epsilon(1e-12));
  // Product state diag(.04, .16, .16, .64): (0.04 + 0.64) / 2.
  CHECK(at("2", "0") == Approx(0.34).epsilon(1e-12));
  CHECK(fs::exists(out / "sweep_eps.svg"));
}

TEST_CASE("cooperativity sweep plumbing") {
  // The effective tier has no spontaneous emission, so Y only enters through
  // g; with Raman rates held fixed the fidelity barely moves.
  const fs::path out = fresh_dir("sweep_coop");
  const auto res = run_experiment(config(
      "experiment = sweep-coop\nmodel.tiers = effective\nphysical.g_2pi_MHz = 110\n"
      "physical.kappa1_2pi_MHz = 14.2\nphysical.gamma_2pi_MHz = 5.2\nphysical.delta_2pi_MHz = 8000\n"
      "physical.omega_s_2pi_MHz = 100\nsweep.a_over_b = 3\ndrive.epsilon = 1\nsweep.Y = 50, 150\nrun.workers = 2\n",
      out));
  REQUIRE(res.ok());
  const auto rows = read_csv(out / "sweep_coop.csv");
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[0].at("g_2pi_MHz")) == Approx(std::sqrt(50.0 * 14.2 * 5.2)));
  CHECK(std::abs(std::stod(rows[0].at("fidelity")) - std::stod(rows[1].at("fidelity"))) <= 5e-3);
  CHECK(std::stod(rows[1].at("fidelity")) == Approx(0.8).epsilon(0.05));
}

TEST_CASE("steady runner compares analytic and numeric states") {
  const fs::path out = fresh_dir("steady");
  const auto res = run_experiment(config("experiment = steady\ndrive.a_over_b = 2\ndrive.epsilon = 0.98\n", out));
  REQUIRE(res.ok());
  const auto rows = read_csv(out / "steady.csv");
  REQUIRE(rows.size() == 1);
  CHECK(std::stod(rows[0].at("frobenius_diff")) <= 1e-8);
  const ComplexMatrix numeric = load_density_matrix(out / "steady_ab2_reduced.dm");
  const ComplexMatrix analytic = load_density_matrix(out / "steady_ab2_analytic.dm");
  CHECK((numeric - analytic).norm() <= 1e-8);
  CHECK(res.console.find("frobenius difference") != std::string::npos);
}

TEST_CASE("metrics runner") {
  const fs::path out = fresh_dir("metrics");
  save_density_matrix(out / "w.dm", 0.5 * bell_states().phi_plus.projector() + 0.5 * identity(4) / 4.0);
  const auto res = run_experiment(config(
      "experiment = metrics\nmetrics.density_matrix = " + (out / "w.dm").string() + "\nmetrics.oracle_samples = 5000\n",
      out));
  REQUIRE(res.ok());
  const auto rows = read_csv(out / "metrics.csv");
  REQUIRE(rows.size() == 1);
  CHECK(std::stod(rows[0].at("fidelity")) == Approx(0.625).epsilon(1e-12));
  CHECK(std::stod(rows[0].at("concurrence")) == Approx(0.25).epsilon(1e-12));
  CHECK(res.console.rfind("fidelity,concurrence,entropy_bits,purity,flux_per_us\n", 0) == 0);

  const auto manifest = nlohmann::json::parse(read_file(res.manifest));
  CHECK(manifest.at("experiment") == "metrics");
  CHECK(manifest.at("all_ok") == true);
  const double oracle = manifest.at("points").at(0).at("fef_oracle");
  CHECK(std::abs(oracle - 0.625) <= 1e-3);
}

TEST_CASE("parallel_for runs every index and captures errors") {
  std::vector<int> hit(50, 0);
  const auto errors = parallel_for(50, 4, [&](std::size_t i) {
    hit[i] += 1;
    if (i == 7) throw std::runtime_error("boom");
  });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 50);
  CHECK(errors[7] == "boom");
  CHECK(std::count(errors.begin(), errors.end(), std::string()) == 49);
}

TEST_CASE("points from configuration") {
  const auto cfg = build_config(parse_config_text(
      "experiment = steady\nmodel.tiers = reduced, effective, full\nphysical.g_2pi_MHz = 110\n"
      "physical.kappa1_2pi_MHz = 14.2\nphysical.gamma_2pi_MHz = 5.2\nphysical.delta_2pi_MHz = 8000\n"
      "physical.omega_s_2pi_MHz = 100\n"));
  const auto red = make_point(cfg, Tier::reduced, 3.0, 0.98);
  REQUIRE(red.matched.has_value());
  // Matched amplitudes absorb the cavity decay: a = beta_r / sqrt(kappa).
  CHECK(std::abs(red.matched->a) == Approx(3.0 * two_pi_MHz(0.6875) / std::sqrt(two_pi_MHz(14.2))));
  const auto full = make_point(cfg, Tier::full, 3.0, 0.98, 50.0);
  CHECK(full.physical.g_r == Approx(std::sqrt(50.0 * two_pi_MHz(14.2) * two_pi_MHz(5.2))));
  // Raman rates are held fixed while g changes.
  CHECK(std::abs(derive_params(full.physical).beta_s[0]) == Approx(two_pi_MHz(0.6875)));
  CHECK(initial_state(full).rows() == 225);
}

TEST_CASE("command line") {
  const fs::path dir = fresh_dir("cli");
  const fs::path good = dir / "good.conf";
  std::ofstream(good) << "experiment = sweep-eps\nsweep.a_over_b = 1.5, 2\nsweep.epsilon = 0.9, 1\n";
  const fs::path bad = dir / "bad.conf";
  std::ofstream(bad) << "experiment = sweep-eps\ndrive.epsilon = 1.5\n";

  CHECK(run_cli("sweep-eps --config " + good.string() + " --out " + (dir / "a").string()) == 0);
  CHECK(run_cli("sweep-eps --config " + good.string() + " --out " + (dir / "b").string()) == 0);
  CHECK(read_file(dir / "a" / "sweep_eps.csv") == read_file(dir / "b" / "sweep_eps.csv"));
  CHECK(read_file(dir / "a" / "sweep_eps.svg") == read_file(dir / "b" / "sweep_eps.svg"));

  CHECK(run_cli("sweep-eps --config " + bad.string()) == 2);
  CHECK(run_cli("sweep-eps --config " + (dir / "missing.conf").string()) == 2);
  CHECK(run_cli("steady --config " + good.string()) == 2);  // subcommand disagrees with the file
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("metrics --config " + std::string(CASCADE_CONFIGS) + "/metrics.conf --out " +
                (dir / "m").string()) == 0);
}
