#include "qsv/linalg.hpp"

#include <bit>
#include <string>

namespace qsv {

namespace pauli {

Matrix2c identity() { return Matrix2c::Identity(); }

Matrix2c x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}

Matrix2c y() {
  Matrix2c m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix2c z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix2c from_char(char label) {
  switch (label) {
    case 'I': return identity();
    case 'X': return x();
    case 'Y': return y();
    case 'Z': return z();
    default: throw ValidationError(std::string("unknown Pauli label '") + label + "'");
  }
}

Matrix2c eigenprojector(char label, int sign) {
  const double s = sign > 0 ? 1.0 : -1.0;
  return (identity() + s * from_char(label)) / 2.0;
}

}  // namespace pauli

ComplexMatrix pauli_string(std::string_view labels) {
  std::vector<Matrix2c> factors;
  factors.reserve(labels.size());
  for (char c : labels) factors.push_back(pauli::from_char(c));
  return tensor_product(factors);
}

ComplexMatrix tensor_product(std::span<const Matrix2c> factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

int qubit_count_for_dimension(Eigen::Index dim) {
  if (dim < 1 || !std::has_single_bit(static_cast<std::uint64_t>(dim)))
    throw ValidationError("dimension " + std::to_string(dim) + " is not a power of two");
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

namespace {

struct LocalLayout {
  std::uint64_t local_dim;
  std::vector<int> shifts;  // bit shift of each listed qubit in the full index
  std::uint64_t mask;       // full-index bits occupied by the listed qubits
};

LocalLayout layout_for(const LocalOperator& op, int n_qubits) {
  const auto k = op.qubits.size();
  LocalLayout layout{std::uint64_t{1} << k, {}, 0};
  if (op.matrix.rows() != static_cast<Eigen::Index>(layout.local_dim) ||
      op.matrix.cols() != op.matrix.rows())
    throw ValidationError("local operator matrix does not match its qubit list");
  for (int q : op.qubits) {
    if (q < 0 || q >= n_qubits) throw ValidationError("local operator qubit out of range");
    const int shift = n_qubits - 1 - q;
    if (layout.mask & (std::uint64_t{1} << shift))
      throw ValidationError("local operator lists a qubit twice");
    layout.shifts.push_back(shift);
    layout.mask |= std::uint64_t{1} << shift;
  }
  return layout;
}

std::uint64_t local_index(std::uint64_t full, const LocalLayout& layout) {
  std::uint64_t out = 0;
  for (int shift : layout.shifts) out = (out << 1) | ((full >> shift) & 1U);
  return out;
}

std::uint64_t scatter(std::uint64_t base, std::uint64_t local, const LocalLayout& layout) {
  std::uint64_t out = base & ~layout.mask;
  const auto k = layout.shifts.size();
  for (std::size_t i = 0; i < k; ++i)
    if ((local >> (k - 1 - i)) & 1U) out |= std::uint64_t{1} << layout.shifts[i];
  return out;
}

}  // namespace

SparseComplexMatrix expand_sparse(const LocalOperator& op, int n_qubits) {
  const auto layout = layout_for(op, n_qubits);
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::uint64_t row = 0; row < dim; ++row) {
    const auto lr = local_index(row, layout);
    for (std::uint64_t lc = 0; lc < layout.local_dim; ++lc) {
      const Complex v = op.matrix(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v != Complex(0)) triplets.emplace_back(row, scatter(row, lc, layout), v);
    }
  }
  SparseComplexMatrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

ComplexMatrix expand_dense(const LocalOperator& op, int n_qubits) {
  return ComplexMatrix(expand_sparse(op, n_qubits));
}

Complex local_expectation(const ComplexMatrix& rho, const LocalOperator& op, int n_qubits) {
  const auto layout = layout_for(op, n_qubits);
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  if (rho.rows() != static_cast<Eigen::Index>(dim))
    throw ValidationError("local_expectation: state dimension mismatch");
  // Tr(O rho) = sum_{r,c} O(r,c) rho(c,r)
  Complex acc = 0;
  for (std::uint64_t row = 0; row < dim; ++row) {
    const auto lr = local_index(row, layout);
    for (std::uint64_t lc = 0; lc < layout.local_dim; ++lc) {
      const Complex v = op.matrix(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v == Complex(0)) continue;
      const auto col = scatter(row, lc, layout);
      acc += v * rho(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(row));
    }
  }
  return acc;
}

bool is_hermitian(const ComplexMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

bool is_projector(const ComplexMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  if ((m - m.adjoint()).norm() > tolerance) return false;
  if (m.isDiagonal(0.0)) {
    const auto d = m.diagonal().eval();
    return (d.cwiseProduct(d) - d).norm() <= tolerance;
  }
  return (m * m - m).norm() <= tolerance;
}

EigenSystem hermitian_eigensystem(const ComplexMatrix& m, double hermitian_tolerance) {
  if (m.rows() != m.cols()) throw ValidationError("hermitian_eigensystem: matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!is_hermitian(m, hermitian_tolerance * scale))
    throw ValidationError("hermitian_eigensystem: matrix is not Hermitian (max |M - M^H| = " +
                          std::to_string((m - m.adjoint()).cwiseAbs().maxCoeff()) + ")");
  HermitianJacobi<ComplexMatrix> solver(m);
  if (!solver.converged())
    throw std::runtime_error("hermitian_eigensystem: Jacobi sweeps did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace qsv
