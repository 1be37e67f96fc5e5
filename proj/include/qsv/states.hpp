#pragma once

#include "qsv/types.hpp"

namespace qsv {

/// Unit-norm amplitude vector over n qubits (qubit 1 = most significant bit).
class PureState {
 public:
  /// Throws ValidationError unless the squared amplitudes sum to 1 within 1e-12.
  explicit PureState(ComplexVector amplitudes);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

  /// Normalizes `v` before wrapping it.
  static PureState normalized(const ComplexVector& v);

 private:
  ComplexVector amplitudes_;
  int n_qubits_;
};

/// Trace-one positive semidefinite Hermitian matrix.
class DensityMatrix {
 public:
  static constexpr double kTraceTolerance = 1e-10;
  static constexpr double kEigenTolerance = 1e-10;

  /// Validates trace, hermiticity and positivity; throws ValidationError.
  explicit DensityMatrix(ComplexMatrix matrix);
  explicit DensityMatrix(const PureState& psi);

  static DensityMatrix maximally_mixed(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

  /// Minimum eigenvalue; used by validation and tests.
  double min_eigenvalue() const;

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix matrix, Unchecked);
  friend DensityMatrix make_density_unchecked(ComplexMatrix matrix);

  ComplexMatrix matrix_;
  int n_qubits_;
};

/// Wraps a matrix that is valid by construction (e.g. a channel output or a
/// Born-rule collapse of a valid state). Only symmetrizes; no spectral check.
DensityMatrix make_density_unchecked(ComplexMatrix matrix);

/// (|10..0> + |01..0> + ... + |0..01>)/sqrt(n), 2 <= n <= 10.
PureState make_w_state(int n);

/// sin(theta)|01> + cos(theta)|10>, theta in [0, pi/2].
PureState make_theta_state(double theta);

/// Computational basis state |bits> on n qubits.
PureState make_basis_state(int n_qubits, std::uint64_t index);

/// <psi|rho|psi>, clamped to [0,1] only within 1e-10 of the boundary.
double fidelity(const DensityMatrix& rho, const PureState& psi);

/// Trace distance 0.5 * ||a - b||_1.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace qsv
