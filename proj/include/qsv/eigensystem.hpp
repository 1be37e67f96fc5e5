#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsv/types.hpp"

namespace qsv {

/// Cyclic Jacobi eigensolver for small dense Hermitian matrices.
///
/// Mirrors the interface of Eigen::SelfAdjointEigenSolver, but eigenvalues are
/// sorted in *descending* order. The input is split into the connected
/// components of its off-diagonal sparsity pattern first, so block-diagonal
/// operators (common for verification strategies) are diagonalized block by
/// block. Sweeps stop once the off-diagonal Frobenius norm of every block drops
/// below `tolerance * ||M||_F`.
///
/// Eigenvectors belonging to a degenerate cluster form an orthonormal basis of
/// that cluster with no canonical order.
template <typename MatrixType_>
class HermitianJacobi {
 public:
  using MatrixType = MatrixType_;
  using Scalar = typename MatrixType::Scalar;
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  using Index = Eigen::Index;
  using RealVectorType = Eigen::Matrix<RealScalar, Eigen::Dynamic, 1>;
  using EigenvectorsType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static constexpr int kMaxSweeps = 100;

  HermitianJacobi() = default;
  explicit HermitianJacobi(const MatrixType& m, RealScalar tolerance = RealScalar(1e-12)) {
    compute(m, tolerance);
  }

  HermitianJacobi& compute(const MatrixType& m, RealScalar tolerance = RealScalar(1e-12));

  const RealVectorType& eigenvalues() const { return values_; }
  const EigenvectorsType& eigenvectors() const { return vectors_; }
  /// Largest number of sweeps used by any block.
  int sweeps() const { return sweeps_; }
  bool converged() const { return converged_; }

 private:
  void diagonalize_block(EigenvectorsType& a, EigenvectorsType& v, RealScalar threshold);

  RealVectorType values_;
  EigenvectorsType vectors_;
  int sweeps_ = 0;
  bool converged_ = false;
};

template <typename MatrixType_>
void HermitianJacobi<MatrixType_>::diagonalize_block(EigenvectorsType& a, EigenvectorsType& v,
                                                      RealScalar threshold) {
  using std::abs;
  using std::conj;
  using std::sqrt;
  const Index n = a.rows();
  v.setIdentity(n, n);
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    RealScalar off = 0;
    for (Index q = 0; q < n; ++q)
      for (Index p = 0; p < n; ++p)
        if (p != q) off += Eigen::numext::abs2(a(p, q));
    if (sqrt(off) <= threshold) break;

    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        const RealScalar b = abs(apq);
        if (b == RealScalar(0)) continue;
        const Scalar phase = apq / b;
        const RealScalar app = Eigen::numext::real(a(p, p));
        const RealScalar aqq = Eigen::numext::real(a(q, q));
        const RealScalar tau = (aqq - app) / (2 * b);
        const RealScalar t = (tau >= 0 ? RealScalar(1) : RealScalar(-1)) /
                             (abs(tau) + sqrt(RealScalar(1) + tau * tau));
        const RealScalar c = RealScalar(1) / sqrt(RealScalar(1) + t * t);
        const RealScalar s = t * c;
        // J = diag(1, conj(phase)) * [[c, s], [-s, c]] restricted to (p, q).
        const Scalar jqp = -s * conj(phase);
        const Scalar jqq = c * conj(phase);

        for (Index r = 0; r < n; ++r) {  // A <- A J
          const Scalar arp = a(r, p);
          const Scalar arq = a(r, q);
          a(r, p) = c * arp + arq * jqp;
          a(r, q) = s * arp + arq * jqq;
        }
        for (Index r = 0; r < n; ++r) {  // A <- J^H A
          const Scalar apr = a(p, r);
          const Scalar aqr = a(q, r);
          a(p, r) = c * apr + conj(jqp) * aqr;
          a(q, r) = s * apr + conj(jqq) * aqr;
        }
        for (Index r = 0; r < n; ++r) {  // V <- V J
          const Scalar vrp = v(r, p);
          const Scalar vrq = v(r, q);
          v(r, p) = c * vrp + vrq * jqp;
          v(r, q) = s * vrp + vrq * jqq;
        }
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
        a(p, p) = Scalar(Eigen::numext::real(a(p, p)));
        a(q, q) = Scalar(Eigen::numext::real(a(q, q)));
      }
    }
  }
  sweeps_ = std::max(sweeps_, sweep);
  if (sweep == kMaxSweeps) converged_ = false;
}

template <typename MatrixType_>
HermitianJacobi<MatrixType_>& HermitianJacobi<MatrixType_>::compute(const MatrixType& m,
                                                                     RealScalar tolerance) {
  if (m.rows() != m.cols()) throw ValidationError("hermitian_eigensystem: matrix is not square");
  const Index n = m.rows();
  const EigenvectorsType h = (m + m.adjoint()) / RealScalar(2);
  const RealScalar threshold = tolerance * h.norm();
  sweeps_ = 0;
  converged_ = true;

  // Connected components of the off-diagonal sparsity graph (union-find).
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index(0));
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Index q = 0; q < n; ++q)
    for (Index p = 0; p < q; ++p)
      if (h(p, q) != Scalar(0)) {
        const Index rp = find(p), rq = find(q);
        if (rp != rq) parent[std::max(rp, rq)] = std::min(rp, rq);
      }
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) blocks[find(i)].push_back(i);

  RealVectorType raw_values(n);
  EigenvectorsType raw_vectors = EigenvectorsType::Zero(n, n);
  Index column = 0;
  for (const auto& block : blocks) {
    if (block.empty()) continue;
    const auto size = static_cast<Index>(block.size());
    EigenvectorsType a(size, size);
    for (Index i = 0; i < size; ++i)
      for (Index j = 0; j < size; ++j) a(i, j) = h(block[i], block[j]);
    EigenvectorsType v;
    diagonalize_block(a, v, threshold);
    for (Index k = 0; k < size; ++k, ++column) {
      raw_values(column) = Eigen::numext::real(a(k, k));
      for (Index i = 0; i < size; ++i) raw_vectors(block[i], column) = v(i, k);
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return raw_values(x) > raw_values(y); });
  values_.resize(n);
  vectors_.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    values_(k) = raw_values(order[k]);
    vectors_.col(k) = raw_vectors.col(order[k]);
  }
  return *this;
}

}  // namespace qsv
