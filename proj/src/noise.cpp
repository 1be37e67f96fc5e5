#include "qsv/noise.hpp"

#include <cmath>
#include <sstream>

#include "qsv/linalg.hpp"

namespace qsv {

namespace {

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError(std::string(what) + " strength must lie in [0, 1]");
}

ComplexMatrix apply_local_kraus(const ComplexMatrix& rho, std::span<const Matrix2c> kraus, int qubit,
                                int n_qubits) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : kraus) {
    const SparseComplexMatrix full = expand_sparse({{qubit}, k}, n_qubits);
    const ComplexMatrix left = full * rho;
    out.noalias() += left * full.adjoint();
  }
  return out;
}

ComplexMatrix apply_on_every_qubit(ComplexMatrix rho, std::span<const Matrix2c> kraus,
                                   int n_qubits) {
  for (int q = 0; q < n_qubits; ++q) rho = apply_local_kraus(rho, kraus, q, n_qubits);
  return rho;
}

Matrix2c rotation(char axis, double angle) {
  // exp(-i a P/2) = cos(a/2) I - i sin(a/2) P for a Pauli P.
  return std::cos(angle / 2) * pauli::identity() -
         Complex(0, 1) * std::sin(angle / 2) * pauli::from_char(axis);
}

}  // namespace

void validate(const NoiseModel& model, int n_qubits) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, noise::Depolarizing>) {
          require_probability(m.p, "depolarizing");
        } else if constexpr (std::is_same_v<T, noise::Dephasing>) {
          require_probability(m.p, "dephasing");
        } else if constexpr (std::is_same_v<T, noise::AmplitudeDamping>) {
          require_probability(m.gamma, "amplitude-damping");
        } else if constexpr (std::is_same_v<T, noise::CoherentRotation>) {
          if (m.axis != 'X' && m.axis != 'Y' && m.axis != 'Z')
            throw ValidationError("coherent rotation axis must be X, Y or Z");
          if (m.qubit >= n_qubits) throw ValidationError("coherent rotation qubit out of range");
          if (!std::isfinite(m.angle)) throw ValidationError("coherent rotation angle not finite");
        } else {
          require_probability(m.weight, "convex-mixture");
          if (m.other.rows() != (Eigen::Index{1} << n_qubits))
            throw ValidationError("convex-mixture partner has the wrong dimension");
          DensityMatrix check(m.other);
          (void)check;
        }
      },
      model);
}

DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseModel& model) {
  const int n = rho.n_qubits();
  validate(model, n);
  const ComplexMatrix& r = rho.matrix();
  ComplexMatrix out = std::visit(
      [&](const auto& m) -> ComplexMatrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, noise::Depolarizing>) {
          const auto dim = r.rows();
          return (1.0 - m.p) * r +
                 m.p * ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim);
        } else if constexpr (std::is_same_v<T, noise::Dephasing>) {
          const Matrix2c kraus[] = {std::sqrt(1.0 - m.p) * pauli::identity(),
                                    std::sqrt(m.p) * pauli::z()};
          return apply_on_every_qubit(r, kraus, n);
        } else if constexpr (std::is_same_v<T, noise::AmplitudeDamping>) {
          Matrix2c k0, k1;
          k0 << 1, 0, 0, std::sqrt(1.0 - m.gamma);
          k1 << 0, std::sqrt(m.gamma), 0, 0;
          const Matrix2c kraus[] = {k0, k1};
          return apply_on_every_qubit(r, kraus, n);
        } else if constexpr (std::is_same_v<T, noise::CoherentRotation>) {
          const Matrix2c kraus[] = {rotation(m.axis, m.angle)};
          if (m.qubit >= 0) return apply_local_kraus(r, kraus, m.qubit, n);
          return apply_on_every_qubit(r, kraus, n);
        } else {
          return (1.0 - m.weight) * r + m.weight * m.other;
        }
      },
      model);
  return make_density_unchecked(std::move(out));
}

DensityMatrix apply_noise(const DensityMatrix& rho, std::span<const NoiseModel> models) {
  DensityMatrix out = rho;
  for (const auto& m : models) out = apply_noise(out, m);
  return out;
}

std::string describe(const NoiseModel& model) {
  std::ostringstream os;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, noise::Depolarizing>) {
          os << "depolarizing(p=" << m.p << ")";
        } else if constexpr (std::is_same_v<T, noise::Dephasing>) {
          os << "dephasing(p=" << m.p << ")";
        } else if constexpr (std::is_same_v<T, noise::AmplitudeDamping>) {
          os << "amplitude-damping(gamma=" << m.gamma << ")";
        } else if constexpr (std::is_same_v<T, noise::CoherentRotation>) {
          os << "coherent-rotation(qubit=" << m.qubit << ", axis=" << m.axis
             << ", angle=" << m.angle << ")";
        } else {
          os << "convex-mixture(weight=" << m.weight << ")";
        }
      },
      model);
  return os.str();
}

}  // namespace qsv
