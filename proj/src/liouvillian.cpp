#include "cascade/liouvillian.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>

namespace cascade {

namespace {

struct Entry {
  Eigen::Index row;
  Eigen::Index col;
  Complex value;
};

std::vector<Entry> nonzeros(const ComplexMatrix& m) {
  std::vector<Entry> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != Complex(0.0)) out.push_back({i, j, m(i, j)});
  return out;
}

}  // namespace

struct LiouvillianAction::Impl {
  TensorSpace space;
  ComplexMatrix h;
  std::vector<ComplexMatrix> jumps;
  ComplexMatrix k_dense;
  Eigen::SparseMatrix<Complex> k_sparse;
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> k_rows;  // fast K * rho
  std::vector<std::vector<Entry>> jump_entries;
  double rate_scale = 1.0;

  Impl(TensorSpace s, ComplexMatrix hh, std::vector<ComplexMatrix> cs)
      : space(std::move(s)), h(std::move(hh)), jumps(std::move(cs)) {}
};

LiouvillianAction::LiouvillianAction(TensorSpace space, ComplexMatrix hamiltonian,
                                     std::vector<ComplexMatrix> jumps) {
  const auto n = static_cast<Eigen::Index>(space.total_dim());
  if (hamiltonian.rows() != n || hamiltonian.cols() != n)
    throw DimensionError("LiouvillianAction: Hamiltonian does not match the space dimension");
  if (!is_hermitian(hamiltonian, 1e-12) && hamiltonian.cwiseAbs().maxCoeff() > 0.0)
    throw NonHermitianError("LiouvillianAction: Hamiltonian is not hermitian");
  for (const auto& c : jumps)
    if (c.rows() != n || c.cols() != n)
      throw DimensionError("LiouvillianAction: jump operator does not match the space dimension");

  auto impl = std::make_shared<Impl>(std::move(space), hermitian_part(hamiltonian), std::move(jumps));
  ComplexMatrix decay = ComplexMatrix::Zero(n, n);
  for (const auto& c : impl->jumps) decay.noalias() += c.adjoint() * c;
  impl->k_dense = -kI * impl->h - decay;
  impl->k_sparse = impl->k_dense.sparseView(0.0, 0.0);
  impl->k_sparse.makeCompressed();
  impl->k_rows = impl->k_sparse;
  for (const auto& c : impl->jumps) {
    auto e = nonzeros(c);
    if (!e.empty()) impl->jump_entries.push_back(std::move(e));
  }

  const double decay_norm = decay.cwiseAbs().rowwise().sum().maxCoeff();
  const double h_norm = impl->h.cwiseAbs().rowwise().sum().maxCoeff();
  impl->rate_scale = decay_norm > 0.0 ? 2.0 * decay_norm : (h_norm > 0.0 ? h_norm : 1.0);
  impl_ = std::move(impl);
}

LiouvillianAction LiouvillianAction::zero(TensorSpace space) {
  const auto n = static_cast<Eigen::Index>(space.total_dim());
  return LiouvillianAction(std::move(space), ComplexMatrix::Zero(n, n), {});
}

const TensorSpace& LiouvillianAction::space() const { return impl_->space; }
std::size_t LiouvillianAction::dim() const { return impl_->space.total_dim(); }
const ComplexMatrix& LiouvillianAction::hamiltonian() const { return impl_->h; }
const std::vector<ComplexMatrix>& LiouvillianAction::jumps() const { return impl_->jumps; }
ComplexMatrix LiouvillianAction::effective_generator() const { return impl_->k_dense; }
double LiouvillianAction::rate_scale() const { return impl_->rate_scale; }

ComplexMatrix LiouvillianAction::jump_term(const ComplexMatrix& rho) const {
  const auto n = static_cast<Eigen::Index>(dim());
  if (rho.rows() != n || rho.cols() != n) throw DimensionError("jump_term: state dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  // c rho c^† entrywise: (i,k,v) x (j,l,w) -> out(i,j) += v conj(w) rho(k,l).
  for (const auto& entries : impl_->jump_entries) {
    for (const auto& right : entries) {
      const Complex wc = 2.0 * std::conj(right.value);
      for (const auto& left : entries) out(left.row, right.row) += left.value * wc * rho(left.col, right.col);
    }
  }
  return out;
}

ComplexMatrix LiouvillianAction::apply(const ComplexMatrix& rho) const {
  const auto n = static_cast<Eigen::Index>(dim());
  if (rho.rows() != n || rho.cols() != n) throw DimensionError("apply: state dimension mismatch");
  ComplexMatrix out = jump_term(rho);
  out.noalias() += impl_->k_rows * rho;
  out.noalias() += rho * impl_->k_sparse.adjoint();
  return out;
}

void LiouvillianAction::apply_hermitian(const ComplexMatrix& rho, ComplexMatrix& out) const {
  const auto n = static_cast<Eigen::Index>(dim());
  if (rho.rows() != n || rho.cols() != n) throw DimensionError("apply: state dimension mismatch");
  // With rho hermitian, rho K^† = (K rho)^†, so one sparse product suffices.
  ComplexMatrix m(n, n);
  m.noalias() = impl_->k_rows * rho;
  m += 0.5 * jump_term(rho);
  out = m + m.adjoint();
}

ComplexMatrix LiouvillianAction::superoperator() const {
  if (!materializable())
    throw DimensionError("superoperator: dimension " + std::to_string(dim()) + " exceeds materialization limit " +
                         std::to_string(kMaterializeLimit));
  const auto n = static_cast<Eigen::Index>(dim());
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix& k = impl_->k_dense;
  ComplexMatrix l = kron(id, k) + kron(k.conjugate(), id);
  for (const auto& c : impl_->jumps) l += 2.0 * kron(c.conjugate(), c);
  return l;
}

}  // namespace cascade
