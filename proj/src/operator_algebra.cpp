#include "cascade/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cascade {

namespace {

std::string dims_string(std::span<const std::size_t> dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

}  // namespace

// --------------------------- TensorSpace / StateVector -----------------------

TensorSpace::TensorSpace(std::initializer_list<std::size_t> dims)
    : TensorSpace(std::vector<std::size_t>(dims)) {}

TensorSpace::TensorSpace(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("TensorSpace: no factors");
  for (auto d : dims_) {
    if (d < 1) throw DimensionError("TensorSpace: factor dimension must be >= 1");
    total_ *= d;
  }
}

StateVector::StateVector(TensorSpace s, ComplexVector amps)
    : space(std::move(s)), amplitudes(std::move(amps)) {
  if (static_cast<std::size_t>(amplitudes.size()) != space.total_dim())
    throw DimensionError("StateVector: amplitude count does not match space " +
                         dims_string(space.factor_dims()));
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::invalid_argument("StateVector: cannot normalize the zero vector");
  return StateVector(space, amplitudes / n);
}

// --------------------------- Construction ------------------------------------

ComplexMatrix identity(std::size_t n) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

ComplexMatrix basis_op(std::size_t n, std::size_t row, std::size_t col) {
  if (row >= n || col >= n) throw DimensionError("basis_op: index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = 1.0;
  return m;
}

ComplexMatrix annihilation(std::size_t levels) {
  if (levels < 1) throw DimensionError("annihilation: need at least one level");
  const auto n = static_cast<Eigen::Index>(levels);
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index br = b.rows(), bc = b.cols();
  ComplexMatrix out(a.rows() * br, a.cols() * bc);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.block(i * br, j * bc, br, bc) = a(i, j) * b;
  return out;
}

ComplexMatrix dagger(const ComplexMatrix& a) { return a.adjoint(); }

ComplexMatrix embed_at(const ComplexMatrix& op, std::size_t site, const TensorSpace& space) {
  if (site >= space.num_factors())
    throw DimensionError("embed_at: site " + std::to_string(site) + " outside space " +
                         dims_string(space.factor_dims()));
  const auto d = static_cast<Eigen::Index>(space.factor(site));
  if (op.rows() != d || op.cols() != d)
    throw DimensionError("embed_at: operator is " + std::to_string(op.rows()) + "x" +
                         std::to_string(op.cols()) + " but factor " + std::to_string(site) +
                         " has dimension " + std::to_string(d));
  std::size_t left = 1, right = 1;
  for (std::size_t k = 0; k < site; ++k) left *= space.factor(k);
  for (std::size_t k = site + 1; k < space.num_factors(); ++k) right *= space.factor(k);
  return kron(kron(identity(left), op), identity(right));
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, const TensorSpace& space,
                            std::span<const std::size_t> keep) {
  const std::size_t n = space.total_dim();
  if (rho.rows() != rho.cols() || static_cast<std::size_t>(rho.rows()) != n)
    throw DimensionError("partial_trace: matrix does not match space " +
                         dims_string(space.factor_dims()));
  if (keep.empty()) throw DimensionError("partial_trace: empty keep set");

  const std::size_t nf = space.num_factors();
  std::vector<bool> kept(nf, false);
  for (auto k : keep) {
    if (k >= nf) throw DimensionError("partial_trace: keep index out of range");
    if (kept[k]) throw DimensionError("partial_trace: duplicate keep index");
    kept[k] = true;
  }
  std::vector<std::size_t> keep_sorted(keep.begin(), keep.end());
  std::sort(keep_sorted.begin(), keep_sorted.end());

  // Strides of the full space and of the kept subspace.
  std::vector<std::size_t> stride(nf, 1);
  for (std::size_t k = nf - 1; k-- > 0;) stride[k] = stride[k + 1] * space.factor(k + 1);
  std::vector<std::size_t> kept_stride(nf, 0);
  std::size_t kept_dim = 1;
  for (std::size_t idx = keep_sorted.size(); idx-- > 0;) {
    kept_stride[keep_sorted[idx]] = kept_dim;
    kept_dim *= space.factor(keep_sorted[idx]);
  }

  // For each full index: its kept-space index and its traced-space index.
  std::vector<std::size_t> kept_index(n), traced_index(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i, ki = 0, ti = 0;
    for (std::size_t k = 0; k < nf; ++k) {
      const std::size_t digit = rem / stride[k];
      rem %= stride[k];
      if (kept[k]) {
        ki += digit * kept_stride[k];
      } else {
        ti = ti * space.factor(k) + digit;
      }
    }
    kept_index[i] = ki;
    traced_index[i] = ti;
  }

  const auto kd = static_cast<Eigen::Index>(kept_dim);
  ComplexMatrix out = ComplexMatrix::Zero(kd, kd);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (traced_index[i] == traced_index[j])
        out(static_cast<Eigen::Index>(kept_index[i]), static_cast<Eigen::Index>(kept_index[j])) +=
            rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, const TensorSpace& space,
                            std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, space, std::span<const std::size_t>(keep.begin(), keep.size()));
}

// --------------------------- Hermitian utilities -----------------------------

double hermiticity_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("hermiticity_defect: matrix not square");
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return hermiticity_defect(a) <= rel_tol * a.cwiseAbs().maxCoeff();
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

HermitianEigen hermitian_eigen(const ComplexMatrix& input) {
  if (input.rows() != input.cols()) throw DimensionError("hermitian_eigen: matrix not square");
  const Eigen::Index n = input.rows();
  if (n == 0) return {};
  const double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
  if (hermiticity_defect(input) > 1e-10 * scale)
    throw NonHermitianError("hermitian_eigen: input is not hermitian within 1e-10");

  ComplexMatrix a = hermitian_part(input);
  ComplexMatrix v = ComplexMatrix::Identity(n, n);

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };
  const double fro = a.norm();
  constexpr int kMaxSweeps = 100;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_norm() <= 1e-15 * fro) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real(), aqq = a(q, q).real();
        // Skip entries that are already negligible next to both diagonals.
        if (sweep > 3 && mag < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        // Phase-strip the off-diagonal, then a real symmetric rotation.
        const Complex phase = apq / mag;  // e^{i phi}
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] acting on columns (p, q).
        const Complex gpp = c, gpq = s;
        const Complex gqp = -s * std::conj(phase), gqq = c * std::conj(phase);

        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x).real() < a(y, y).real(); });
  HermitianEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

// --------------------------- Vectorization -----------------------------------

ComplexVector vec_stack(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols()) throw DimensionError("vec_stack: matrix not square");
  // Eigen's default storage is column-major, so this is a straight copy.
  return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

ComplexMatrix unvec(const ComplexVector& v) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (n * n != v.size()) throw DimensionError("unvec: length is not a perfect square");
  return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

}  // namespace cascade
