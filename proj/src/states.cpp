#include "qsv/states.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qsv/linalg.hpp"

namespace qsv {

PureState::PureState(ComplexVector amplitudes)
    : amplitudes_(std::move(amplitudes)), n_qubits_(qubit_count_for_dimension(amplitudes_.size())) {
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-12)
    throw ValidationError("PureState: squared amplitudes sum to " + std::to_string(norm2));
}

PureState PureState::normalized(const ComplexVector& v) {
  const double norm = v.norm();
  if (norm == 0.0) throw ValidationError("PureState: zero vector");
  return PureState(v / norm);
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix)
    : matrix_(std::move(matrix)), n_qubits_(qubit_count_for_dimension(matrix_.rows())) {
  if (matrix_.rows() != matrix_.cols()) throw ValidationError("DensityMatrix: not square");
  if (!is_hermitian(matrix_, 1e-10)) throw ValidationError("DensityMatrix: not Hermitian");
  matrix_ = (matrix_ + matrix_.adjoint()) / 2.0;
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTolerance)
    throw ValidationError("DensityMatrix: trace is " + std::to_string(tr));
  const double lmin = min_eigenvalue();
  if (lmin < -kEigenTolerance)
    throw ValidationError("DensityMatrix: negative eigenvalue " + std::to_string(lmin));
}

DensityMatrix::DensityMatrix(const PureState& psi)
    : matrix_(psi.projector()), n_qubits_(psi.n_qubits()) {}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, Unchecked)
    : matrix_(std::move(matrix)), n_qubits_(qubit_count_for_dimension(matrix_.rows())) {
  matrix_ = (matrix_ + matrix_.adjoint()) / 2.0;
}

DensityMatrix make_density_unchecked(ComplexMatrix matrix) {
  return DensityMatrix(std::move(matrix), DensityMatrix::Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  const auto dim = Eigen::Index{1} << n_qubits;
  return make_density_unchecked(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::min_eigenvalue() const {
  if (dim() <= 64) return hermitian_eigensystem(matrix_).values.minCoeff();
  // Cyclic Jacobi is O(n^3) per sweep; tridiagonal QR is much faster here.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

PureState make_w_state(int n) {
  if (n < 2 || n > 10) throw ValidationError("make_w_state: n must be in [2, 10]");
  const auto dim = Eigen::Index{1} << n;
  ComplexVector amps = ComplexVector::Zero(dim);
  const double a = 1.0 / std::sqrt(static_cast<double>(n));
  for (int q = 0; q < n; ++q) amps(Eigen::Index{1} << (n - 1 - q)) = a;
  return PureState(amps);
}

PureState make_theta_state(double theta) {
  if (theta < 0.0 || theta > std::numbers::pi / 2)
    throw ValidationError("make_theta_state: theta must lie in [0, pi/2]");
  ComplexVector amps = ComplexVector::Zero(4);
  amps(1) = std::sin(theta);
  amps(2) = std::cos(theta);
  return PureState::normalized(amps);
}

PureState make_basis_state(int n_qubits, std::uint64_t index) {
  const auto dim = Eigen::Index{1} << n_qubits;
  if (static_cast<Eigen::Index>(index) >= dim) throw ValidationError("basis index out of range");
  ComplexVector amps = ComplexVector::Zero(dim);
  amps(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(amps);
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dim() != psi.dim()) throw ValidationError("fidelity: dimension mismatch");
  const double f = (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0).real();
  constexpr double kSlack = 1e-10;
  if (f < 0.0 && f > -kSlack) return 0.0;
  if (f > 1.0 && f < 1.0 + kSlack) return 1.0;
  return f;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw ValidationError("trace_distance: dimension mismatch");
  const auto eig = hermitian_eigensystem(a.matrix() - b.matrix());
  return 0.5 * eig.values.cwiseAbs().sum();
}

}  // namespace qsv
