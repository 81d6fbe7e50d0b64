#include "cascade/cavity_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cascade {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double rel_scale(std::initializer_list<double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

// Operator factory bound to one model space.
class Ops {
 public:
  explicit Ops(const ModelSpace& ms) : ms_(ms), space_(ms.tensor_space()) {
    const ComplexMatrix a = annihilation(ms.fock_cutoff + 1);
    modes_[0] = embed_at(a, 2, space_);
    modes_[1] = embed_at(a, 3, space_);
  }

  const TensorSpace& space() const { return space_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(space_.total_dim()); }

  // |x><y| on atom i
  ComplexMatrix atom(std::size_t i, std::size_t x, std::size_t y) const {
    return embed_at(basis_op(ms_.atom_levels, x, y), i, space_);
  }
  const ComplexMatrix& mode(std::size_t i) const { return modes_[i]; }
  ComplexMatrix number(std::size_t i) const { return modes_[i].adjoint() * modes_[i]; }

 private:
  ModelSpace ms_;
  TensorSpace space_;
  std::array<ComplexMatrix, 2> modes_;
};

void check_space(const ModelSpace& ms, std::size_t levels, const char* who) {
  if (ms.fock_cutoff < 1) throw std::invalid_argument(std::string(who) + ": fock_cutoff must be >= 1");
  if (ms.atom_levels != levels)
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(levels) + " atomic levels");
}

// Cavity damping with the cascaded cross term, in Lindblad form. Adds the
// coherent part to `h` and returns the collapse operators.
std::vector<ComplexMatrix> cavity_channels(const PhysicalParams& p, const Ops& ops, ComplexMatrix& h) {
  const ComplexMatrix& a1 = ops.mode(0);
  const ComplexMatrix& a2 = ops.mode(1);
  const double e = p.epsilon;
  std::vector<ComplexMatrix> jumps;
  jumps.push_back(std::sqrt(e * p.kappa1) * a1 + std::sqrt(p.kappa2) * a2);
  if (e < 1.0) jumps.push_back(std::sqrt((1.0 - e) * p.kappa1) * a1);
  const ComplexMatrix cross = a1.adjoint() * a2;
  h += kI * std::sqrt(e * p.kappa1 * p.kappa2) * (cross - cross.adjoint());
  return jumps;
}

}  // namespace

// --------------------------- Parameters --------------------------------------

void PhysicalParams::validate() const {
  for (double x : {g_r, g_s, kappa1, kappa2, gamma_r, gamma_s, gamma_t, Delta_r, Delta_s, Delta_t, omega_1,
                   omega_cav, omega_Lr, omega_Ls, omega_Lt, epsilon})
    if (!std::isfinite(x)) throw std::invalid_argument("PhysicalParams: non-finite value");
  for (Complex z : {Omega_r1, Omega_s1, Omega_t1, Omega_r2, Omega_s2, Omega_t2})
    if (!finite(z)) throw std::invalid_argument("PhysicalParams: non-finite Rabi frequency");
  if (!(kappa1 > 0.0)) throw std::invalid_argument("PhysicalParams: kappa1 must be positive");
  if (!(kappa2 > 0.0)) throw std::invalid_argument("PhysicalParams: kappa2 must be positive");
  if (gamma_r < 0.0 || gamma_s < 0.0 || gamma_t < 0.0)
    throw std::invalid_argument("PhysicalParams: gamma must be non-negative");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("PhysicalParams: epsilon out of [0,1]");
}

std::vector<std::string> PhysicalParams::regime_warnings() const {
  std::vector<std::string> out;
  auto check = [&](const char* name, double delta, std::initializer_list<double> rates) {
    double worst = rel_scale({g_r, g_s, kappa1, kappa2, gamma_r, gamma_s, gamma_t});
    for (double r : rates) worst = std::max(worst, r);
    if (worst > 0.0 && std::abs(delta) < 20.0 * worst) {
      std::ostringstream s;
      s << name << " = " << delta << " is less than 20x the largest coupling/decay rate " << worst;
      out.push_back(s.str());
    }
  };
  check("Delta_r", Delta_r, {std::abs(Omega_r1), std::abs(Omega_r2)});
  check("Delta_s", Delta_s, {std::abs(Omega_s1), std::abs(Omega_s2)});
  check("Delta_t", Delta_t, {std::abs(Omega_t1), std::abs(Omega_t2)});
  return out;
}

PhysicalParams make_symmetric_params(const SymmetricSetup& s) {
  PhysicalParams p;
  p.g_r = p.g_s = s.g;
  p.kappa1 = p.kappa2 = s.kappa;
  p.gamma_r = p.gamma_s = p.gamma_t = s.gamma;
  p.Delta_r = p.Delta_s = p.Delta_t = s.Delta;
  p.Omega_s1 = p.Omega_s2 = s.Omega_s;
  p.Omega_r1 = p.Omega_r2 = s.a_over_b * s.Omega_s;
  p.epsilon = s.epsilon;
  p.validate();
  return p;
}

DerivedParams derive_params(const PhysicalParams& p) {
  p.validate();
  if (p.Delta_r == 0.0 || p.Delta_s == 0.0 || p.Delta_t == 0.0)
    throw std::invalid_argument("derive_params: detunings must be nonzero");
  DerivedParams d;
  const auto om_r = p.Omega_r(), om_s = p.Omega_s(), om_t = p.Omega_t();
  for (std::size_t i = 0; i < 2; ++i) {
    d.beta_r[i] = p.g_r * om_r[i] / (2.0 * p.Delta_r);
    d.beta_s[i] = p.g_s * om_s[i] / (2.0 * p.Delta_s);
    d.alpha_r[i] = std::norm(om_r[i]) / (4.0 * p.Delta_r);
    d.alpha_s[i] = std::norm(om_s[i]) / (4.0 * p.Delta_s);
    d.alpha_t[i] = std::norm(om_t[i]) / (4.0 * p.Delta_t);
  }
  d.eta_r = p.g_r * p.g_r / p.Delta_r;
  d.eta_s = p.g_s * p.g_s / p.Delta_s;
  d.Y = p.gamma_r > 0.0 ? p.g_r * p.g_s / (std::sqrt(p.kappa1 * p.kappa2) * p.gamma_r)
                        : std::numeric_limits<double>::infinity();
  return d;
}

ReducedParams effective_reduced_params(const PhysicalParams& p) {
  const DerivedParams d = derive_params(p);
  ReducedParams r;
  r.beta_r1 = d.beta_r[0];
  r.beta_s1 = d.beta_s[0];
  r.beta_r2 = d.beta_r[1];
  r.beta_s2 = d.beta_s[1];
  r.kappa1 = p.kappa1;
  r.kappa2 = p.kappa2;
  r.epsilon = p.epsilon;
  r.validate();
  return r;
}

RotatingFrame rotating_frame(const PhysicalParams& p) {
  for (double x : {p.omega_1, p.omega_cav, p.omega_Lr, p.omega_Ls, p.omega_Lt})
    if (!std::isfinite(x)) throw FrameError("rotating_frame: optical frequencies must be finite");
  RotatingFrame f;
  f.nu_1 = 0.5 * (p.omega_Ls - p.omega_Lr);
  f.nu_c = 0.5 * (p.omega_Ls + p.omega_Lr);
  f.delta_1 = p.omega_1 - f.nu_1;
  f.delta_c = p.omega_cav - f.nu_c;
  return f;
}

PhysicalParams stark_balance(const PhysicalParams& p, StarkMode mode) {
  p.validate();
  if (p.Delta_t == 0.0) throw std::invalid_argument("stark_balance: Delta_t must be nonzero");
  const DerivedParams d = derive_params(p);
  const RotatingFrame f = rotating_frame(p);
  PhysicalParams out = p;

  double offset = 0.0;  // required alpha_r - alpha_s - alpha_t
  if (mode == StarkMode::raman_resonant) {
    if (std::abs(f.delta_1) > 1e-12 * std::max(1.0, rel_scale({p.omega_1, f.nu_1})))
      throw InfeasibleBalance("stark_balance: omega_1 must equal (omega_Ls - omega_Lr)/2 for Raman resonance");
  } else {
    if (std::abs(d.eta_r - d.eta_s) > 1e-12 * rel_scale({d.eta_r, d.eta_s}))
      throw UnbalancedShifts("stark_balance: compensation requires eta_r == eta_s");
    out.omega_cav = f.nu_c - d.eta_r;
    offset = f.nu_1 - p.omega_1;
  }

  std::array<Complex, 2> omega_t{};
  for (std::size_t i = 0; i < 2; ++i) {
    const double alpha_t = d.alpha_r[i] - d.alpha_s[i] - offset;
    if (alpha_t == 0.0) continue;
    if ((alpha_t > 0.0) != (p.Delta_t > 0.0))
      throw InfeasibleBalance("stark_balance: required alpha_t has the opposite sign to Delta_t");
    omega_t[i] = std::sqrt(4.0 * p.Delta_t * alpha_t);
  }
  out.Omega_t1 = omega_t[0];
  out.Omega_t2 = omega_t[1];
  return out;
}

TensorSpace ModelSpace::tensor_space() const {
  if (atom_levels != 2 && atom_levels != 5) throw std::invalid_argument("ModelSpace: atom_levels must be 2 or 5");
  if (fock_cutoff < 1) throw std::invalid_argument("ModelSpace: fock_cutoff must be >= 1");
  return TensorSpace{atom_levels, atom_levels, fock_cutoff + 1, fock_cutoff + 1};
}

// --------------------------- Builders ----------------------------------------

LiouvillianAction build_effective_liouvillian(const PhysicalParams& p, const ModelSpace& ms) {
  check_space(ms, 2, "build_effective_liouvillian");
  const DerivedParams d = derive_params(p);
  const RotatingFrame f = rotating_frame(p);

  for (std::size_t i = 0; i < 2; ++i) {
    const double detune = f.nu_1 - p.omega_1;
    const double resid = d.alpha_r[i] - d.alpha_s[i] - d.alpha_t[i] - detune;
    const double scale = rel_scale({d.alpha_r[i], d.alpha_s[i], d.alpha_t[i], detune});
    if (std::abs(resid) > 1e-9 * scale) {
      std::ostringstream s;
      s << "build_effective_liouvillian: ground-state shifts of atom " << i + 1 << " are unbalanced by " << resid;
      throw UnbalancedShifts(s.str());
    }
  }

  const Ops ops(ms);
  ComplexMatrix h = ComplexMatrix::Zero(ops.dim(), ops.dim());
  for (std::size_t i = 0; i < 2; ++i) {
    const ComplexMatrix& a = ops.mode(i);
    const ComplexMatrix n = ops.number(i);
    const ComplexMatrix p1 = ops.atom(i, level::one, level::one);
    const ComplexMatrix p0 = ops.atom(i, level::zero, level::zero);
    const ComplexMatrix lower = ops.atom(i, level::zero, level::one);  // sigma^-
    h += f.delta_c * n + d.eta_r * n * p0 + d.eta_s * n * p1;
    h += (f.delta_1 + d.alpha_r[i]) * p1 + (d.alpha_s[i] + d.alpha_t[i]) * p0;
    const ComplexMatrix v = d.beta_r[i] * a.adjoint() * lower + d.beta_s[i] * a.adjoint() * lower.adjoint();
    h += v + v.adjoint();
  }
  auto jumps = cavity_channels(p, ops, h);
  return LiouvillianAction(ops.space(), std::move(h), std::move(jumps));
}

LiouvillianAction build_full_liouvillian(const PhysicalParams& p, const ModelSpace& ms,
                                         const FullModelOptions& options) {
  check_space(ms, 5, "build_full_liouvillian");
  p.validate();
  const RotatingFrame f = rotating_frame(p);

  const Ops ops(ms);
  ComplexMatrix h = ComplexMatrix::Zero(ops.dim(), ops.dim());
  std::vector<ComplexMatrix> jumps;
  const auto om_r = p.Omega_r(), om_s = p.Omega_s(), om_t = p.Omega_t();

  for (std::size_t i = 0; i < 2; ++i) {
    const ComplexMatrix& a = ops.mode(i);
    h += f.delta_1 * ops.atom(i, level::one, level::one);
    h += (f.delta_1 - p.Delta_r) * ops.atom(i, level::r, level::r);
    h += -p.Delta_s * ops.atom(i, level::s, level::s);
    h += -p.Delta_t * ops.atom(i, level::t, level::t);
    h += f.delta_c * ops.number(i);

    ComplexMatrix v = 0.5 * om_r[i] * ops.atom(i, level::r, level::one);
    v += 0.5 * om_s[i] * ops.atom(i, level::s, level::zero);
    v += 0.5 * om_t[i] * ops.atom(i, level::t, level::zero);
    v += p.g_r * ops.atom(i, level::r, level::zero) * a;
    v += p.g_s * ops.atom(i, level::s, level::one) * a;
    h += v + v.adjoint();

    // Equal branching: population leaves each excited level at gamma and
    // arrives at each ground level at gamma/2.
    const std::array<std::pair<std::size_t, double>, 3> excited{
        {{level::r, p.gamma_r}, {level::s, p.gamma_s}, {level::t, p.gamma_t}}};
    for (const auto& [e, gamma] : excited) {
      if (gamma == 0.0) continue;
      if (e == level::t && !options.t_decays_to_both_grounds) {
        jumps.push_back(std::sqrt(gamma / 2.0) * ops.atom(i, level::zero, e));
        continue;
      }
      jumps.push_back(std::sqrt(gamma / 4.0) * ops.atom(i, level::zero, e));
      jumps.push_back(std::sqrt(gamma / 4.0) * ops.atom(i, level::one, e));
    }
  }
  auto cav = cavity_channels(p, ops, h);
  for (auto& c : cav) jumps.push_back(std::move(c));
  return LiouvillianAction(ops.space(), std::move(h), std::move(jumps));
}

ComplexMatrix output_flux_operator(const PhysicalParams& p, const ModelSpace& ms) {
  p.validate();
  const Ops ops(ms);
  const ComplexMatrix c =
      std::sqrt(2.0 * p.epsilon * p.kappa1) * ops.mode(0) + std::sqrt(2.0 * p.kappa2) * ops.mode(1);
  return c.adjoint() * c;
}

// --------------------------- State helpers -----------------------------------

ComplexMatrix atomic_marginal(const ComplexMatrix& rho, const ModelSpace& ms) {
  const TensorSpace space = ms.tensor_space();
  const ComplexMatrix atoms = partial_trace(rho, space, {0, 1});
  const auto levels = static_cast<Eigen::Index>(ms.atom_levels);
  const std::array<Eigen::Index, 4> idx{0, 1, levels, levels + 1};
  ComplexMatrix out(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = atoms(idx[r], idx[c]);
  const double tr = out.trace().real();
  if (!(tr > 1e-300)) throw std::domain_error("atomic_marginal: no ground-state population");
  return out / tr;
}

ComplexMatrix ground_vacuum_state(const ModelSpace& ms) {
  const auto levels = ms.atom_levels;
  const auto photons = ms.fock_cutoff + 1;
  const auto n = static_cast<Eigen::Index>(ms.total_dim());
  const auto index = static_cast<Eigen::Index>((level::zero * levels + level::zero) * photons * photons);
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);
  rho(index, index) = 1.0;
  return rho;
}

double top_fock_population(const ComplexMatrix& rho, const ModelSpace& ms) {
  const TensorSpace space = ms.tensor_space();
  const auto top = static_cast<Eigen::Index>(ms.fock_cutoff);
  const double p1 = partial_trace(rho, space, {2})(top, top).real();
  const double p2 = partial_trace(rho, space, {3})(top, top).real();
  return p1 + p2;
}

}  // namespace cascade
