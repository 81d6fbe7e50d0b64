#include "cascade/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace cascade {

namespace {

// Copies the upper triangle onto the lower one and zeroes imaginary diagonal parts.
void resymmetrize(ComplexMatrix& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
    m(j, j) = m(j, j).real();
  }
}

double scaled_rms(const ComplexMatrix& e, const ComplexMatrix& y0, const ComplexMatrix& y1, double atol, double rtol) {
  double sum = 0.0;
  const Eigen::Index size = e.size();
  const Complex* pe = e.data();
  const Complex* p0 = y0.data();
  const Complex* p1 = y1.data();
  for (Eigen::Index k = 0; k < size; ++k) {
    const double sc = atol + rtol * std::max(std::abs(p0[k]), std::abs(p1[k]));
    sum += std::norm(pe[k]) / (sc * sc);
  }
  return std::sqrt(sum / static_cast<double>(size));
}

double inf_norm(const ComplexMatrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

}  // namespace

// ----------------------------- Validity --------------------------------------

double min_eigenvalue(const ComplexMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void require_density_matrix(const ComplexMatrix& rho, double trace_tol, double herm_tol, double neg_tol) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw InvalidDensityMatrix("density matrix must be square");
  if (!rho.allFinite()) throw InvalidDensityMatrix("density matrix has non-finite entries");
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > trace_tol) {
    std::ostringstream s;
    s << "density matrix trace " << tr.real() << (tr.imag() >= 0 ? "+" : "") << tr.imag() << "i is not 1";
    throw InvalidDensityMatrix(s.str());
  }
  if (hermiticity_defect(rho) > herm_tol) throw InvalidDensityMatrix("density matrix is not hermitian");
  const double lo = min_eigenvalue(rho);
  if (lo < -neg_tol) {
    std::ostringstream s;
    s << "density matrix has negative eigenvalue " << lo;
    throw InvalidDensityMatrix(s.str());
  }
}

// ----------------------------- Integration -----------------------------------

namespace {

// Bookkeeping shared by both schemes.
struct Recorder {
  const IntegratorOptions& opt;
  Trajectory& traj;
  double trace0;

  void operator()(std::size_t idx, double t, const ComplexMatrix& y) const {
    traj.times.push_back(t);
    traj.max_trace_drift = std::max(traj.max_trace_drift, std::abs(y.trace().real() - trace0));
    if (opt.check_positivity) {
      const double lo = min_eigenvalue(y);
      traj.min_eigenvalue = traj.times.size() == 1 ? lo : std::min(traj.min_eigenvalue, lo);
      if (lo < -1e-7) traj.positivity_ok = false;
    }
    if (opt.on_output) opt.on_output(idx, t, y);
    if (opt.store_states) traj.states.push_back(y);
  }
};

[[noreturn]] void underflow(double h, double t) {
  std::ostringstream s;
  s << "integrate: step size underflow (h = " << h << ") at t = " << t << "; the problem may be stiff";
  throw IntegrationError(s.str());
}

}  // namespace

Trajectory integrate(const LiouvillianAction& L, const ComplexMatrix& rho0, const std::vector<double>& times,
                     const IntegratorOptions& opt) {
  const auto n = static_cast<Eigen::Index>(L.dim());
  if (rho0.rows() != n || rho0.cols() != n) throw DimensionError("integrate: initial state dimension mismatch");
  require_density_matrix(rho0);
  if (times.empty()) throw std::invalid_argument("integrate: no output times");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] >= times[k - 1])) throw std::invalid_argument("integrate: output times must be ascending");
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0)) throw std::invalid_argument("integrate: tolerances must be positive");

  Trajectory traj;
  ComplexMatrix y = hermitian_part(rho0);
  const double trace0 = y.trace().real();
  double t = times.front();

  auto rhs = [&](const ComplexMatrix& state, ComplexMatrix& out) {
    L.apply_hermitian(state, out);
    ++traj.rhs_evaluations;
  };
  const Recorder recorder{opt, traj, trace0};
  auto record = [&](std::size_t idx) { recorder(idx, t, y); };

  std::array<ComplexMatrix, 7> k;
  for (auto& m : k) m.resize(n, n);
  ComplexMatrix stage(n, n), y5(n, n), err(n, n);
  rhs(y, k[0]);

  // Starting step (Hairer & Wanner, II.4).
  double h = opt.initial_step;
  const double span = times.back() - times.front();
  if (!(h > 0.0)) {
    const double d0 = scaled_rms(y, y, y, opt.abs_tol, opt.rel_tol);
    const double d1 = scaled_rms(k[0], y, y, opt.abs_tol, opt.rel_tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    if (span > 0.0) h0 = std::min(h0, span);
    stage = y + h0 * k[0];
    rhs(stage, k[1]);
    const double d2 = scaled_rms(k[1] - k[0], y, y, opt.abs_tol, opt.rel_tol) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100.0 * h0, h1);
  }

  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double fac_min = 1.0 / 10.0, fac_max = 1.0 / 0.2;  // inverse growth / shrink limits
  double facold = 1e-4;
  std::size_t steps = 0;

  record(0);
  for (std::size_t out_idx = 1; out_idx < times.size(); ++out_idx) {
    const double t_out = times[out_idx];
    while (t < t_out) {
      if (++steps > opt.max_steps) {
        std::ostringstream s;
        s << "integrate: step budget of " << opt.max_steps << " exhausted at t = " << t;
        throw IntegrationError(s.str());
      }
      if (t + 0.1 * h == t || !(h > 0.0) || !std::isfinite(h)) underflow(h, t);
      bool clipped = false;
      const double h_wanted = h;
      if (t + h >= t_out - 1e-12 * std::abs(t_out)) {
        h = t_out - t;
        clipped = true;
      }

      stage = y + h * a21 * k[0];
      rhs(stage, k[1]);
      stage = y + h * (a31 * k[0] + a32 * k[1]);
      rhs(stage, k[2]);
      stage = y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]);
      rhs(stage, k[3]);
      stage = y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]);
      rhs(stage, k[4]);
      stage = y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]);
      rhs(stage, k[5]);
      y5 = y + h * (a71 * k[0] + a73 * k[2] + a74 * k[3] + a75 * k[4] + a76 * k[5]);
      rhs(y5, k[6]);
      err = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);
      const double en = scaled_rms(err, y, y5, opt.abs_tol, opt.rel_tol);

      if (!std::isfinite(en)) {
        h *= 0.1;
        ++traj.rejected_steps;
        continue;
      }
      const double fac11 = std::pow(std::max(en, 1e-300), expo1);
      if (en <= 1.0) {
        double fac = fac11 / std::pow(facold, beta);
        fac = std::clamp(fac / safe, fac_min, fac_max);
        facold = std::max(en, 1e-4);
        t = clipped ? t_out : t + h;
        y.swap(y5);
        resymmetrize(y);
        std::swap(k[0], k[6]);
        ++traj.accepted_steps;
        const double h_new = h / fac;
        h = clipped ? std::max(h_new, h_wanted) : h_new;
      } else {
        h /= std::min(fac_max, fac11 / safe);
        ++traj.rejected_steps;
      }
    }
    record(out_idx);
  }
  return traj;
}

// ----------------------------- Steady states ---------------------------------

ComplexMatrix steady_state_nullspace(const ComplexMatrix& superop) {
  const Eigen::Index m = superop.rows();
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(m))));
  if (superop.cols() != m || n * n != m || m == 0)
    throw DimensionError("steady_state_nullspace: superoperator must be square with a perfect-square size");

  Eigen::BDCSVD<ComplexMatrix> svd(superop, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();  // descending
  const double norm = sv(0);
  if (m > 1 && sv(m - 2) <= 1e-10 * norm) {
    std::ostringstream s;
    s << "steady_state_nullspace: null space is not one-dimensional (second-smallest singular value "
      << sv(m - 2) << " vs norm " << norm << ")";
    throw DegenerateSteadyState(s.str());
  }
  ComplexMatrix rho = unvec(svd.matrixV().col(m - 1));
  const Complex tr = rho.trace();
  if (std::abs(tr) <= 1e-12 * rho.norm())
    throw DegenerateSteadyState("steady_state_nullspace: null vector is traceless");
  rho /= tr;
  return hermitian_part(rho);
}

LongtimeResult steady_state_longtime(const LiouvillianAction& L, const ComplexMatrix& rho0,
                                     const LongtimeOptions& opt) {
  require_density_matrix(rho0);
  const double scale = L.rate_scale();
  double chunk = opt.first_chunk > 0.0 ? opt.first_chunk : 10.0 / scale;
  LongtimeResult res;
  res.state = hermitian_part(rho0);
  ComplexMatrix deriv;
  IntegratorOptions io = opt.integrator;
  io.store_states = true;
  io.check_positivity = false;
  io.on_output = nullptr;

  while (true) {
    L.apply_hermitian(res.state, deriv);
    res.residual = deriv.norm() / scale;
    if (res.residual <= opt.tol) return res;
    if (res.elapsed_time >= opt.max_time) {
      std::ostringstream s;
      s << "steady_state_longtime: residual " << res.residual << " still above " << opt.tol << " after model time "
        << res.elapsed_time << " us; relaxation slows like (a/b - 1)^-2 as |a| approaches |b|";
      throw ConvergenceError(s.str());
    }
    chunk = std::min(chunk, opt.max_time - res.elapsed_time);
    Trajectory tr = integrate(L, res.state, {0.0, chunk}, io);
    res.state = std::move(tr.states.back());
    res.elapsed_time += chunk;
    chunk *= 1.5;
  }
}

namespace {

// rho -> -(P - s)^{-1} (J + s) rho with P rho = K rho + rho K^†. The map is
// trace preserving and its fixed points are the steady states.
class RenewalMap {
 public:
  explicit RenewalMap(const LiouvillianAction& L) : L_(L), n_(static_cast<Eigen::Index>(L.dim())) {
    Eigen::ComplexSchur<ComplexMatrix> schur(L.effective_generator());
    if (schur.info() != Eigen::Success) throw ConvergenceError("steady_state_renewal: Schur factorization failed");
    t_ = schur.matrixT();
    q_ = schur.matrixU();
    // A shift keeps P - s invertible when K has non-decaying eigenvalues.
    double max_re = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n_; ++j) max_re = std::max(max_re, t_(j, j).real());
    shift_ = max_re > -1e-6 * L.rate_scale() ? 0.01 * L.rate_scale() : 0.0;
    t_.diagonal().array() -= 0.5 * shift_;
    y_.resize(n_, n_);
    rhs_.resize(n_);
  }

  ComplexMatrix operator()(const ComplexMatrix& x) {
    ComplexMatrix r = L_.jump_term(x);
    if (shift_ != 0.0) r += shift_ * x;
    const ComplexMatrix rt = q_.adjoint() * r * q_;
    // Solve T Y + Y T^† = -rt column by column, last column first.
    for (Eigen::Index j = n_ - 1; j >= 0; --j) {
      rhs_ = -rt.col(j);
      const Eigen::Index tail = n_ - 1 - j;
      if (tail > 0) rhs_.noalias() -= y_.rightCols(tail) * t_.row(j).tail(tail).adjoint();
      const Complex dj = std::conj(t_(j, j));
      for (Eigen::Index i = n_ - 1; i >= 0; --i) {
        const Complex yi = rhs_(i) / (t_(i, i) + dj);
        y_(i, j) = yi;
        if (i > 0) rhs_.head(i) -= yi * t_.col(i).head(i);
      }
    }
    return q_ * y_ * q_.adjoint();
  }

 private:
  const LiouvillianAction& L_;
  Eigen::Index n_;
  ComplexMatrix t_, q_, y_;
  ComplexVector rhs_;
  double shift_ = 0.0;
};

// Unit-trace hermitian representative of a (complex-scaled) state.
ComplexMatrix normalize_state(const ComplexMatrix& x) {
  const Complex tr = x.trace();
  if (!(std::abs(tr) > 0.0) || !std::isfinite(std::abs(tr)))
    throw ConvergenceError("steady_state_renewal: iterate lost its trace");
  ComplexMatrix h = hermitian_part(x / tr);
  return h / h.trace().real();
}

// One restarted-GMRES cycle for (I - M) z = b, starting from z = 0.
ComplexMatrix gmres_cycle(RenewalMap& map, const ComplexMatrix& b, std::size_t m, std::size_t& applications) {
  const double beta = b.norm();
  std::vector<ComplexMatrix> v{b / beta};
  ComplexMatrix h = ComplexMatrix::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m));
  std::vector<double> cs;
  std::vector<Complex> sn;
  ComplexVector g = ComplexVector::Zero(static_cast<Eigen::Index>(m + 1));
  g(0) = beta;
  std::size_t k = 0;
  for (; k < m; ++k) {
    ComplexMatrix w = v[k] - map(v[k]);
    ++applications;
    const auto kk = static_cast<Eigen::Index>(k);
    for (std::size_t i = 0; i <= k; ++i) {
      const Complex hik = (v[i].conjugate().cwiseProduct(w)).sum();
      h(static_cast<Eigen::Index>(i), kk) = hik;
      w -= hik * v[i];
    }
    const double wn = w.norm();
    h(kk + 1, kk) = wn;
    for (std::size_t i = 0; i < k; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const Complex a = h(ii, kk), c = h(ii + 1, kk);
      h(ii, kk) = cs[i] * a + sn[i] * c;
      h(ii + 1, kk) = -std::conj(sn[i]) * a + cs[i] * c;
    }
    const Complex a = h(kk, kk);
    const double denom = std::hypot(std::abs(a), wn);
    const double c = denom > 0.0 ? std::abs(a) / denom : 1.0;
    const Complex phase = std::abs(a) > 0.0 ? a / std::abs(a) : Complex(1.0);
    const Complex s = denom > 0.0 ? std::conj(phase) * wn / denom : Complex(0.0);
    cs.push_back(c);
    sn.push_back(std::conj(s));
    h(kk, kk) = c * a + std::conj(s) * wn;
    h(kk + 1, kk) = 0.0;
    g(kk + 1) = -s * g(kk);
    g(kk) = c * g(kk);
    if (!(wn > 1e-14 * beta)) {
      ++k;
      break;
    }
    v.push_back(w / wn);
  }
  const auto kk = static_cast<Eigen::Index>(k);
  const ComplexVector coef =
      h.topLeftCorner(kk, kk).triangularView<Eigen::Upper>().solve(g.head(kk));
  ComplexMatrix z = ComplexMatrix::Zero(b.rows(), b.cols());
  for (Eigen::Index i = 0; i < kk; ++i) z += coef(i) * v[static_cast<std::size_t>(i)];
  return z;
}

}  // namespace

RenewalResult steady_state_renewal(const LiouvillianAction& L, const RenewalOptions& opt) {
  const auto n = static_cast<Eigen::Index>(L.dim());
  const double scale = L.rate_scale();
  RenewalMap map(L);

  RenewalResult res;
  if (opt.initial) {
    require_density_matrix(*opt.initial);
    res.state = hermitian_part(*opt.initial);
  } else {
    res.state = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
  }

  // A few plain fixed-point sweeps damp the fast components, then restarted
  // GMRES on (I - M) z = M x - x removes the slow ones. The right-hand side is
  // traceless, so the singular system is consistent.
  constexpr std::size_t kWarmup = 10;
  constexpr std::size_t kKrylov = 40;
  ComplexMatrix deriv;
  res.iterations = 0;
  while (true) {
    L.apply_hermitian(res.state, deriv);
    res.residual = deriv.norm() / scale;
    if (res.residual <= opt.tol) return res;
    if (res.iterations >= opt.max_iterations) break;
    ComplexMatrix mx = map(res.state);
    ++res.iterations;
    if (res.iterations <= kWarmup) {
      res.state = normalize_state(mx);
      continue;
    }
    const ComplexMatrix b = mx - res.state;
    res.state = normalize_state(res.state + gmres_cycle(map, b, kKrylov, res.iterations));
  }
  std::ostringstream s;
  s << "steady_state_renewal: residual " << res.residual << " above " << opt.tol << " after " << res.iterations
    << " map applications";
  throw ConvergenceError(s.str());
}

SteadyResult steady_state(const LiouvillianAction& L, const SteadyOptions& opt) {
  SteadyMethod method = opt.method;
  if (method == SteadyMethod::automatic) method = L.dim() <= 16 ? SteadyMethod::nullspace : SteadyMethod::renewal;
  SteadyResult res;
  res.method = method;
  switch (method) {
    case SteadyMethod::nullspace:
      res.state = steady_state_nullspace(L.superoperator());
      break;
    case SteadyMethod::longtime: {
      LongtimeOptions lo = opt.longtime;
      const auto n = static_cast<Eigen::Index>(L.dim());
      const ComplexMatrix start = opt.rho0 ? *opt.rho0 : ComplexMatrix(ComplexMatrix::Identity(n, n) / double(n));
      LongtimeResult lr = steady_state_longtime(L, start, lo);
      res.state = std::move(lr.state);
      res.model_time = lr.elapsed_time;
      break;
    }
    case SteadyMethod::renewal:
    case SteadyMethod::automatic: {
      RenewalOptions ro;
      ro.tol = opt.tol;
      RenewalResult rr = steady_state_renewal(L, ro);
      res.state = std::move(rr.state);
      res.iterations = rr.iterations;
      break;
    }
  }
  ComplexMatrix deriv;
  L.apply_hermitian(res.state, deriv);
  res.residual = deriv.norm() / L.rate_scale();
  return res;
}

double spectral_gap(const ComplexMatrix& superop) {
  if (superop.rows() != superop.cols() || superop.rows() == 0)
    throw DimensionError("spectral_gap: superoperator must be square");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(superop, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("spectral_gap: eigensolver failed");
  const ComplexVector& ev = es.eigenvalues();
  const double tol = 1e-10 * inf_norm(superop);
  int zeros = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k)) <= tol) {
      ++zeros;
    } else {
      gap = std::min(gap, std::abs(ev(k).real()));
    }
  }
  if (zeros > 1) throw DegenerateSteadyState("spectral_gap: zero eigenvalue is degenerate");
  return gap;
}

}  // namespace cascade
