#include "cascade/cavity_model.hpp"
#include "cascade/dynamics.hpp"
#include "cascade/metrics.hpp"
#include "cascade/reduced_model.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace cascade;
using cascade::testing::max_abs;
using doctest::Approx;

namespace {

constexpr Eigen::Index k11 = 0, k00 = 3;

ComplexMatrix ground() { return basis_op(4, k00, k00); }

ReducedParams matched(Complex a, Complex b, double eps) { return MatchedDrive{a, b, eps}.to_params(); }

LiouvillianAction reduced(Complex a, Complex b, double eps) { return reduced_liouvillian(matched(a, b, eps)); }

// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("zero generator leaves the state unchanged") {
  std::mt19937_64 rng(41);
  const auto rho = testing::random_density(rng, 4);
  const auto traj = integrate(LiouvillianAction::zero(qubit_pair_space()), rho, {0.0, 1.0, 5.0});
  REQUIRE(traj.states.size() == 3);
  for (const auto& s : traj.states) CHECK(max_abs(s - rho) <= 1e-15);
}

TEST_CASE("independent decay follows the exact exponential") {
  // Each atom's excited population decays as exp(-2 |a|^2 t) in the factor-2 convention.
  const auto traj = integrate(reduced(1.0, 0.0, 0.0), basis_op(4, k11, k11), {0.0, 0.1, 0.5, 1.0, 2.0});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    CHECK(std::abs(traj.states[i](k11, k11).real() - std::exp(-4.0 * t)) <= 1e-8);
    const double p1 = std::exp(-2.0 * t);
    CHECK(std::abs(traj.states[i](k00, k00).real() - (1.0 - p1) * (1.0 - p1)) <= 1e-8);
  }
}

TEST_CASE("trajectory invariants") {
  const auto L = reduced(2.0, 1.0, 0.98);
  std::vector<double> times(41);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = 0.25 * double(i);
  const auto traj = integrate(L, ground(), times);
  CHECK(traj.times == times);
  CHECK(traj.max_trace_drift <= 1e-12);
  CHECK(traj.positivity_ok);
  CHECK(traj.min_eigenvalue >= -1e-7);
  for (const auto& s : traj.states) CHECK(hermiticity_defect(s) == 0.0);
  CHECK(traj.accepted_steps > 0);
}

TEST_CASE("ideal coupling drives |00> to the dark state") {
  const auto traj = integrate(reduced(2.0, 1.0, 1.0), ground(), {0.0, 20.0, 40.0});
  CHECK(fef_fidelity(traj.states.back()) == Approx(0.9).epsilon(1e-7));
  CHECK(max_abs(traj.states.back() - dark_state(2.0, 1.0).projector()) <= 1e-7);
}

TEST_CASE("halving the tolerance barely moves the final state") {
  const auto L = reduced(3.0, 1.0, 0.98);
  IntegratorOptions loose;
  loose.rel_tol = 1e-8;
  loose.abs_tol = 1e-10;
  IntegratorOptions tight = loose;
  tight.rel_tol /= 2.0;
  tight.abs_tol /= 2.0;
  const auto a = integrate(L, ground(), {0.0, 5.0}, loose);
  const auto b = integrate(L, ground(), {0.0, 5.0}, tight);
  CHECK(max_abs(a.states.back() - b.states.back()) <= 10.0 * tight.abs_tol);
}

TEST_CASE("output callback and storage switch") {
  IntegratorOptions opt;
  opt.store_states = false;
  std::vector<double> seen;
  opt.on_output = [&](std::size_t i, double t, const ComplexMatrix& rho) {
    CHECK(i == seen.size());
    CHECK(std::abs(rho.trace() - 1.0) <= 1e-12);
    seen.push_back(t);
  };
  const auto traj = integrate(reduced(2.0, 1.0, 0.5), ground(), {0.0, 0.5, 0.5, 2.0}, opt);
  CHECK(traj.states.empty());
  CHECK(seen == std::vector<double>{0.0, 0.5, 0.5, 2.0});
}

TEST_CASE("integration errors") {
  const auto L = reduced(2.0, 1.0, 0.5);
  CHECK_THROWS_AS(integrate(L, identity(3) / 3.0, {0.0, 1.0}), DimensionError);
  CHECK_THROWS_AS(integrate(L, ground(), {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(integrate(L, ground(), {}), std::invalid_argument);
  IntegratorOptions few;
  few.max_steps = 3;
  CHECK_THROWS_AS(integrate(L, ground(), {0.0, 100.0}, few), IntegrationError);
  CHECK_THROWS_AS(require_density_matrix(identity(4)), InvalidDensityMatrix);
}

TEST_CASE("linearity of the generator") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto L = reduced(2.0, Complex(0.5, 0.3), 0.9);
  for (int i = 0; i < 20; ++i) {
    const auto x = testing::random_matrix(rng, 4, 4);
    const auto y = testing::random_matrix(rng, 4, 4);
    const Complex a(u(rng), u(rng)), b(u(rng), u(rng));
    CHECK(max_abs(L.apply(a * x + b * y) - (a * L.apply(x) + b * L.apply(y))) <= 1e-12);
  }
}

TEST_CASE("nullspace steady state") {
  const auto p = matched(2.0, 1.0, 0.98);
  const ComplexMatrix ss = steady_state_nullspace(liouvillian_matrix(p));
  CHECK(max_abs(ss - analytic_steady_state({2.0, 1.0, 0.98})) <= 1e-8);
  CHECK_THROWS_AS(steady_state_nullspace(liouvillian_matrix(matched(1.0, 1.0, 1.0))), DegenerateSteadyState);
  CHECK_THROWS_AS(steady_state_nullspace(ComplexMatrix::Zero(5, 5)), DimensionError);

  const auto automatic = steady_state(reduced(2.0, 1.0, 0.98));
  CHECK(automatic.method == SteadyMethod::nullspace);
  CHECK(max_abs(automatic.state - ss) <= 1e-12);
}

TEST_CASE("long-time steady state") {
  SUBCASE("dark state from |00>") {
    const auto r = steady_state_longtime(reduced(2.0, 1.0, 1.0), ground());
    CHECK(max_abs(r.state - dark_state(2.0, 1.0).projector()) <= 1e-6);
    CHECK(r.elapsed_time > 0.0);
    CHECK(r.residual <= 1e-9);
  }
  SUBCASE("product state without coupling") {
    const auto r = steady_state_longtime(reduced(2.0, 1.0, 0.0), ground());
    CHECK(max_abs(r.state - analytic_steady_state({2.0, 1.0, 0.0})) <= 1e-6);
  }
  SUBCASE("agrees with the nullspace solver") {
    for (double eps : {0.3, 0.9, 0.98}) {
      const auto L = reduced(3.0, 1.0, eps);
      const auto a = steady_state_longtime(L, ground()).state;
      const auto b = steady_state_nullspace(L.superoperator());
      CHECK((a - b).norm() <= 1e-6);
    }
  }
  SUBCASE("slow convergence near a/b = 1") {
    // Elapsed model time grows roughly as (a/b - 1)^-2.
    const double near = steady_state_longtime(reduced(1.1, 1.0, 1.0), ground()).elapsed_time;
    const double far = steady_state_longtime(reduced(1.4, 1.0, 1.0), ground()).elapsed_time;
    CHECK(near > 4.0 * far);
  }
  SUBCASE("budget exhaustion") {
    LongtimeOptions opt;
    opt.max_time = 0.01;
    CHECK_THROWS_AS(steady_state_longtime(reduced(1.1, 1.0, 1.0), ground(), opt), ConvergenceError);
  }
}

TEST_CASE("renewal steady state") {
  SUBCASE("reduced model") {
    const auto L = reduced(2.0, 1.0, 0.98);
    const auto r = steady_state_renewal(L);
    CHECK(max_abs(r.state - analytic_steady_state({2.0, 1.0, 0.98})) <= 1e-9);
    CHECK(r.residual <= 1e-11);
  }
  SUBCASE("cavity model against the nullspace") {
    SymmetricSetup s;
    s.g = two_pi_MHz(110);
    s.kappa = two_pi_MHz(14.2);
    s.Delta = two_pi_MHz(8000);
    s.Omega_s = two_pi_MHz(100);
    s.a_over_b = 2.0;
    s.epsilon = 0.98;
    const auto p = stark_balance(make_symmetric_params(s), StarkMode::compensated);
    const ModelSpace space{2, 2};
    const auto L = build_effective_liouvillian(p, space);
    REQUIRE(L.materializable());
    const auto a = steady_state_renewal(L).state;
    const auto b = steady_state_nullspace(L.superoperator());
    CHECK(max_abs(a - b) <= 1e-8);
    CHECK(steady_state(L).method == SteadyMethod::renewal);
  }
}

TEST_CASE("spectral gap") {
  SUBCASE("single decay channel") {
    // Coherences decay at |a|^2, populations at 2|a|^2.
    for (double eps : {0.0, 0.5, 1.0}) CHECK(spectral_gap(liouvillian_matrix(matched(1.0, 0.0, eps))) == Approx(1.0));
  }
  SUBCASE("quadratic scaling with the drive") {
    const double g1 = spectral_gap(liouvillian_matrix(matched(2.0, 1.0, 0.98)));
    const double g3 = spectral_gap(liouvillian_matrix(matched(6.0, 3.0, 0.98)));
    CHECK(g3 == Approx(9.0 * g1).epsilon(1e-9));
    const double gc = spectral_gap(liouvillian_matrix(matched(Complex(0, 2.0), Complex(0, 1.0), 0.98)));
    CHECK(gc == Approx(g1).epsilon(1e-9));
  }
  SUBCASE("gap closes as (|a| - |b|)^2") {
    // With |a|^2 + |b|^2 = 1 the gap is (r - 1)^2 / (1 + r^2), so the
    // log-log slope against r - 1 sits below 2 by the normalization.
    auto fit = [](std::initializer_list<double> ratios) {
      std::vector<double> x, y;
      for (double r : ratios) {
        const double b = 1.0 / std::sqrt(1.0 + r * r);
        const double gap = spectral_gap(liouvillian_matrix(matched(r * b, b, 1.0)));
        CHECK(gap == Approx((r - 1.0) * (r - 1.0) / (1.0 + r * r)).epsilon(1e-9));
        x.push_back(r - 1.0);
        y.push_back(gap);
      }
      return log_log_slope(x, y);
    };
    CHECK(fit({1.1, 1.2, 1.4}) == Approx(1.7892246).epsilon(1e-6));
    const double slope = fit({1.05, 1.1, 1.2, 1.4});
    CHECK(slope == Approx(1.8376691).epsilon(1e-6));
    CHECK(std::abs(slope - 2.0) <= 0.2);
  }
  CHECK_THROWS_AS(spectral_gap(liouvillian_matrix(matched(1.0, 1.0, 1.0))), DegenerateSteadyState);
}
