#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "qsv/eigensystem.hpp"
#include "qsv/types.hpp"

namespace qsv {

/// Kronecker product. Qubit 1 is the leftmost factor.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Result = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Result out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace pauli {
Matrix2c identity();
Matrix2c x();
Matrix2c y();
Matrix2c z();
/// 'I', 'X', 'Y' or 'Z'.
Matrix2c from_char(char label);
/// Projector onto the +1 (sign > 0) or -1 eigenspace of a single-qubit Pauli.
Matrix2c eigenprojector(char label, int sign);
}  // namespace pauli

/// Dense operator for a Pauli string such as "XIZ".
ComplexMatrix pauli_string(std::string_view labels);

/// Tensor product of single-qubit factors, first factor leftmost.
ComplexMatrix tensor_product(std::span<const Matrix2c> factors);

int qubit_count_for_dimension(Eigen::Index dim);

/// Bit of qubit `q` (0-based, qubit 0 most significant) in basis index `index`.
inline unsigned qubit_bit(std::uint64_t index, int q, int n_qubits) {
  return static_cast<unsigned>((index >> (n_qubits - 1 - q)) & 1U);
}

/// An operator acting on a subset of qubits. `matrix` is expressed in the
/// basis of `qubits` taken in the listed order (first listed = most
/// significant). Acts as the identity elsewhere.
struct LocalOperator {
  std::vector<int> qubits;
  ComplexMatrix matrix;
};

/// Embeds a local operator in an n-qubit register as a sparse matrix.
SparseComplexMatrix expand_sparse(const LocalOperator& op, int n_qubits);
ComplexMatrix expand_dense(const LocalOperator& op, int n_qubits);

/// Tr((op ⊗ 1) rho) without forming the full operator.
Complex local_expectation(const ComplexMatrix& rho, const LocalOperator& op, int n_qubits);

bool is_hermitian(const ComplexMatrix& m, double tolerance = 1e-12);
/// P = P^H and P^2 = P in Frobenius norm.
bool is_projector(const ComplexMatrix& m, double tolerance = 1e-10);

struct EigenSystem {
  RealVector values;       // descending
  ComplexMatrix vectors;   // column k belongs to values(k)
};

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Throws ValidationError if `m` is not Hermitian within `hermitian_tolerance`.
EigenSystem hermitian_eigensystem(const ComplexMatrix& m, double hermitian_tolerance = 1e-10);

}  // namespace qsv
