// End-to-end checks, one PASS/FAIL line per criterion.

#include "cascade/experiments.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace cascade;
using cascade::testing::max_abs;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << n << ": " << detail << std::endl;
}

template <class F>
void guarded(int n, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(n, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

const char* kReference =
    "physical.g_2pi_MHz = 110\n"
    "physical.kappa1_2pi_MHz = 14.2\n"
    "physical.gamma_2pi_MHz = 5.2\n"
    "physical.delta_2pi_MHz = 8000\n"
    "physical.omega_s_2pi_MHz = 100\n";

ExperimentConfig reference_config(const std::string& tiers, double kappa_scale = 1.0, double gamma_2pi_MHz = 5.2) {
  auto cfg = build_config(parse_config_text("experiment = steady\nmodel.tiers = " + tiers + "\n" + kReference));
  cfg.physical->kappa1_2pi_MHz *= kappa_scale;
  cfg.physical->kappa2_2pi_MHz *= kappa_scale;
  cfg.physical->gamma_2pi_MHz = gamma_2pi_MHz;
  return cfg;
}

SteadyControls fixed_cutoff() {
  SteadyControls c;
  c.escalate = false;
  return c;
}

ComplexMatrix ground() { return basis_op(4, 3, 3); }

// Entries that vanish for every drive: coherences between the {|11>,|00>}
// and {|10>,|01>} sectors.
bool structural_zero(Eigen::Index i, Eigen::Index j) { return ((i == 0 || i == 3) != (j == 0 || j == 3)); }

void stationarity() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> mag(0.05, 3.0), phase(0.0, 2.0 * std::numbers::pi), eps(0.0, 1.0);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int done = 0;
  while (done < 200) {
    const MatchedDrive m{std::polar(mag(rng), phase(rng)), std::polar(mag(rng), phase(rng)), eps(rng)};
    const double x = std::norm(m.a), y = std::norm(m.b), e = m.epsilon, s = x + y;
    const double d = (x * x + y * y + 2.0 * (1.0 + 2.0 * e - 4.0 * e * e) * x * y) / (s * s);
    if (std::abs(d) <= 1e-6) continue;
    const ComplexMatrix rho = analytic_steady_state(m);
    worst = std::max(worst, liouvillian_apply(m.to_params(), rho).norm() / s);
    ++done;
  }
  const double elapsed = seconds_since(t0);
  report(1, worst <= 1e-11 && elapsed < 1.0,
         "max |L rho|/(|a|^2+|b|^2) = " + fmt(worst) + ", " + fmt(elapsed, 3) + " s for 200 draws");
}

void nullspace_agreement() {
  double worst = 0.0, worst_zero = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double ab = 1.2 + 0.3 * i;
      const double eps = 0.1 * (j + 1);
      const MatchedDrive m{ab, 1.0, eps};
      const ComplexMatrix num = steady_state_nullspace(liouvillian_matrix(m.to_params()));
      worst = std::max(worst, max_abs(num - analytic_steady_state(m)));
      for (Eigen::Index r = 0; r < 4; ++r)
        for (Eigen::Index c = 0; c < 4; ++c)
          if (structural_zero(r, c)) worst_zero = std::max(worst_zero, std::abs(num(r, c)));
    }
  }
  report(2, worst <= 1e-8 && worst_zero <= 1e-10,
         "max elementwise deviation " + fmt(worst) + ", max structural zero " + fmt(worst_zero));
}

void ideal_coupling() {
  double min_purity = 1.0, max_flux = 0.0, max_dev = 0.0;
  for (double ab : {1.5, 2.0, 3.0}) {
    const MatchedDrive m{ab, 1.0, 1.0};
    const auto p = m.to_params();
    const ComplexMatrix num = steady_state_nullspace(liouvillian_matrix(p));
    const ComplexMatrix dark = dark_state(m.a, m.b).projector();
    min_purity = std::min(min_purity, purity(num));
    max_flux = std::max(max_flux, std::abs(output_flux(num, reduced_flux_operator(p))));
    max_dev = std::max({max_dev, max_abs(num - dark), max_abs(analytic_steady_state(m) - dark)});
  }
  report(3, min_purity >= 1.0 - 1e-9 && max_flux <= 1e-12 && max_dev <= 1e-9,
         "min purity " + fmt(min_purity, 15) + ", max flux " + fmt(max_flux) + ", max deviation from dark state " +
             fmt(max_dev));
}

void dark_fidelities() {
  bool pass = true;
  std::string detail;
  for (auto [ab, expected] : {std::pair{3.0, 0.8}, std::pair{2.0, 0.9}, std::pair{1.5, 0.96153846153846156}}) {
    const MatchedDrive m{ab, 1.0, 1.0};
    const ComplexMatrix num = steady_state_nullspace(liouvillian_matrix(m.to_params()));
    const double f = fef_fidelity(num);
    const double oracle = fef_oracle(num, 20000, 11);
    pass = pass && std::abs(f - expected) <= 1e-6 && std::abs(oracle - f) <= 1e-3;
    detail += "a/b=" + fmt(ab) + ": " + fmt(f, 10) + " (oracle " + fmt(oracle, 6) + ") ";
  }
  report(4, pass, detail);
}

void ordering_and_monotonicity() {
  const auto cfg = reference_config("reduced");
  std::string detail;
  double fid_15 = 0.0, fid_2 = 0.0;
  bool monotone = true;
  for (double ab : {1.5, 2.0, 3.0}) {
    const auto pt = make_point(cfg, Tier::reduced, ab, 0.98);
    const double steady = fef_fidelity(analytic_steady_state(*pt.matched));
    if (ab == 1.5) fid_15 = steady;
    if (ab == 2.0) fid_2 = steady;
    const double gap_time = 1.0 / spectral_gap(liouvillian_matrix(pt.reduced));
    std::vector<double> times(801);
    for (std::size_t k = 0; k < times.size(); ++k) times[k] = 20.0 * gap_time * double(k) / 800.0;
    const auto traj = integrate(generator(pt), ground(), times);
    double drop = 0.0, prev = -1.0, peak = 0.0, peak_t = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double f = fef_fidelity(traj.states[k]);
      if (f > peak) peak = f, peak_t = times[k];
      if (times[k] < gap_time) continue;
      if (prev >= 0.0) drop = std::max(drop, prev - f);
      prev = f;
    }
    monotone = monotone && drop <= 1e-4;
    detail += "a/b=" + fmt(ab) + ": steady " + fmt(steady) + ", largest drop " + fmt(drop, 3) + " (peak " +
              fmt(peak) + " at " + fmt(peak_t, 3) + " us); ";
  }
  report(5, fid_15 < fid_2 && monotone, detail);
}

void spontaneous_emission() {
  const auto t0 = Clock::now();
  const auto cfg = reference_config("reduced, full");
  const auto red = make_point(cfg, Tier::reduced, 3.0, 0.98);
  const auto full = make_point(cfg, Tier::full, 3.0, 0.98);

  // The full tier resolves the optical frequencies, so only a short window is
  // affordable.
  std::vector<double> times(11);
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = 0.01 * double(k);
  IntegratorOptions opt;
  opt.rel_tol = 1e-6;
  opt.abs_tol = 1e-8;
  const auto tr = integrate(generator(red), initial_state(red), times, opt);
  const auto tf = integrate(generator(full), initial_state(full), times, opt);
  double excess = -1.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double fr = fef_fidelity(qubit_state(red, tr.states[k]));
    const double ff = fef_fidelity(qubit_state(full, tf.states[k]));
    excess = std::max(excess, ff - fr);
  }

  const double steady_red = solve_steady(red).fidelity;
  const double steady_full = solve_steady(full, fixed_cutoff()).fidelity;
  const double gap = steady_red - steady_full;
  const double elapsed = seconds_since(t0);
  report(6, excess <= 1e-4 && gap > 0.0 && elapsed <= 1800.0,
         "window 0-" + fmt(times.back()) + " us: max(full - reduced) " + fmt(excess, 3) + "; steady reduced " +
             fmt(steady_red) + ", full " + fmt(steady_full) + ", gap " + fmt(gap, 4) + "; " + fmt(elapsed, 4) + " s");
}

void cooperativity() {
  auto cfg = reference_config("full");
  std::vector<double> ys = parse_number_list("Y", "log:10:200:8");
  const double y_ref = 110.0 * 110.0 / (14.2 * 5.2);
  std::vector<double> fids;
  for (double y : ys) fids.push_back(solve_steady(make_point(cfg, Tier::full, 3.0, 1.0, y), fixed_cutoff()).fidelity);
  double worst_drop = 0.0;
  for (std::size_t k = 1; k < fids.size(); ++k) worst_drop = std::max(worst_drop, fids[k - 1] - fids[k]);

  const double at_ref = solve_steady(make_point(cfg, Tier::full, 3.0, 1.0, y_ref), fixed_cutoff()).fidelity;
  const double lossless =
      solve_steady(make_point(reference_config("full", 1.0, 0.0), Tier::full, 3.0, 1.0), fixed_cutoff()).fidelity;
  std::string curve;
  for (std::size_t k = 0; k < ys.size(); ++k) curve += fmt(ys[k], 4) + ":" + fmt(fids[k], 5) + " ";
  report(7, worst_drop <= 5e-3 && std::abs(at_ref - lossless) <= 0.05,
         "F(Y) " + curve + "; largest drop " + fmt(worst_drop, 3) + "; F(" + fmt(y_ref, 5) + ") = " + fmt(at_ref) +
             " vs " + fmt(lossless) + " without emission");
}

void optimum_ratio() {
  const auto cfg = reference_config("reduced");
  const auto ratios = parse_number_list("a_over_b", "1.05:4:0.01");
  std::size_t best = 0;
  double best_f = -1.0;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const double f = fef_fidelity(analytic_steady_state(*make_point(cfg, Tier::reduced, ratios[k], 0.98).matched));
    if (f > best_f) best_f = f, best = k;
  }
  const bool interior = best > 0 && best + 1 < ratios.size();
  report(8, interior && ratios[best] > 1.0,
         "max fidelity " + fmt(best_f) + " at a/b = " + fmt(ratios[best], 4) + " on [" + fmt(ratios.front(), 3) + ", " +
             fmt(ratios.back(), 3) + "]");
}

void gap_scaling() {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::vector<double> ratios{1.05, 1.1, 1.2, 1.4};
  for (double r : ratios) {
    const double b = 1.0 / std::sqrt(1.0 + r * r);
    const double lx = std::log(r - 1.0);
    const double ly = std::log(spectral_gap(liouvillian_matrix(MatchedDrive{r * b, b, 1.0}.to_params())));
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double n = double(ratios.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  report(9, std::abs(slope - 2.0) <= 0.2, "log-log slope " + fmt(slope, 8));
}

void elimination_chain() {
  std::vector<double> spread;
  std::string detail;
  for (double scale : {1.0, 2.0, 4.0}) {
    const auto lossless = reference_config("reduced, effective, full", scale, 0.0);
    const double fr = solve_steady(make_point(lossless, Tier::reduced, 3.0, 0.98)).fidelity;
    const double fe = solve_steady(make_point(lossless, Tier::effective, 3.0, 0.98)).fidelity;
    const double ff = solve_steady(make_point(lossless, Tier::full, 3.0, 0.98), fixed_cutoff()).fidelity;
    spread.push_back(std::max({fr, fe, ff}) - std::min({fr, fe, ff}));
    detail += "kappa x" + fmt(scale) + ": full " + fmt(ff) + ", effective " + fmt(fe) + ", reduced " + fmt(fr) +
              " (spread " + fmt(spread.back(), 3) + "); ";
  }
  report(10, spread[0] <= 0.02 && spread[1] < spread[0] && spread[2] < spread[1], detail);
}

void metric_identities() {
  std::mt19937_64 rng(202);
  double worst_lu = 0.0, worst_pure = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ComplexMatrix rho = testing::random_density(rng, 4);
    const ComplexMatrix u = kron(testing::random_unitary(rng, 2), testing::random_unitary(rng, 2));
    const ComplexMatrix moved = u * rho * u.adjoint();
    worst_lu = std::max({worst_lu, std::abs(concurrence(moved) - concurrence(rho)),
                         std::abs(fef_fidelity(moved) - fef_fidelity(rho)),
                         std::abs(vn_entropy(moved) - vn_entropy(rho)), std::abs(purity(moved) - purity(rho))});

    ComplexVector v = testing::random_matrix(rng, 4, 1).col(0);
    v.normalize();
    const ComplexMatrix pure = testing::pure(v);
    // psi = sum c_ij |ij>: C = 2 |c_11 c_00 - c_10 c_01|, FEF = (1 + C) / 2.
    const double c = 2.0 * std::abs(v(0) * v(3) - v(1) * v(2));
    worst_pure = std::max({worst_pure, std::abs(concurrence(pure) - c), std::abs(fef_fidelity(pure) - (1.0 + c) / 2.0),
                           std::abs(vn_entropy(pure)), std::abs(purity(pure) - 1.0)});
  }
  report(11, worst_lu <= 1e-10 && worst_pure <= 1e-10,
         "local-unitary deviation " + fmt(worst_lu) + ", pure-state deviation " + fmt(worst_pure));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "cascade_acceptance";
  fs::remove_all(root);
  const fs::path configs = fs::path(CASCADE_CONFIGS);
  std::size_t compared = 0;
  bool same = true, ran = true;
  const std::pair<const char*, const char*> runs[] = {
      {"sweep-eps", "sweep_eps"}, {"steady", "steady"}, {"metrics", "metrics"}, {"evolve", "evolve_reduced"}};
  for (const auto& [sub, name] : runs) {
    std::vector<fs::path> outs;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (std::string(name) + std::to_string(rep));
      const std::string cmd = std::string(CASCADE_CLI) + " " + sub + " --config " + (configs / (std::string(name) + ".conf")).string() +
                              " --out " + out.string() + " > /dev/null 2>&1";
      ran = ran && std::system(cmd.c_str()) == 0;
      outs.push_back(out);
    }
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      if (entry.path().extension() != ".csv") continue;
      same = same && read_file(entry.path()) == read_file(outs[1] / entry.path().filename());
      ++compared;
    }
  }
  report(12, ran && same && compared >= 4,
         std::to_string(compared) + " CSV files compared across repeated runs, " + (same ? "identical" : "different"));
}

}  // namespace

int main() {
  guarded(1, stationarity);
  guarded(2, nullspace_agreement);
  guarded(3, ideal_coupling);
  guarded(4, dark_fidelities);
  guarded(5, ordering_and_monotonicity);
  guarded(6, spontaneous_emission);
  guarded(7, cooperativity);
  guarded(8, optimum_ratio);
  guarded(9, gap_scaling);
  guarded(10, elimination_chain);
  guarded(11, metric_identities);
  guarded(12, determinism);
  std::cout << failures << " of 12 criteria failed" << std::endl;
  return failures == 0 ? 0 : 1;
}
