#include "qsv/measurement.hpp"

#include <string>

#include "qsv/linalg.hpp"

namespace qsv {

void validate_projective_measurement(std::span<const ComplexMatrix> projectors, double tolerance) {
  if (projectors.empty()) throw ValidationError("projective measurement: no projectors");
  const auto dim = projectors.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    const auto& p = projectors[k];
    if (p.rows() != dim || p.cols() != dim)
      throw ValidationError("projective measurement: projector " + std::to_string(k) +
                            " has the wrong dimension");
    if (!is_projector(p, tolerance))
      throw ValidationError("projective measurement: element " + std::to_string(k) +
                            " is not a projector");
    for (std::size_t j = 0; j < k; ++j)
      if ((projectors[j] * p).norm() > tolerance)
        throw ValidationError("projective measurement: projectors " + std::to_string(j) + " and " +
                              std::to_string(k) + " are not orthogonal");
    sum += p;
  }
  if ((sum - ComplexMatrix::Identity(dim, dim)).norm() > tolerance)
    throw ValidationError("projective measurement: projectors do not sum to the identity");
}

std::vector<double> born_probabilities(const DensityMatrix& rho,
                                       std::span<const ComplexMatrix> projectors) {
  std::vector<double> probs;
  probs.reserve(projectors.size());
  for (const auto& p : projectors)
    probs.push_back(std::max(0.0, (p * rho.matrix()).trace().real()));
  return probs;
}

namespace {

std::size_t sample_index(std::span<const double> probs, RngStream& rng) {
  double total = 0;
  for (double p : probs) total += p;
  const double u = rng.uniform() * total;
  double acc = 0;
  std::size_t last_nonzero = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0) continue;
    last_nonzero = k;
    acc += probs[k];
    if (u < acc) return k;
  }
  return last_nonzero;
}

}  // namespace

MeasurementOutcome measure_projective(const DensityMatrix& rho,
                                      std::span<const ComplexMatrix> projectors, RngStream& rng) {
  validate_projective_measurement(projectors);
  if (projectors.front().rows() != rho.dim())
    throw ValidationError("measure_projective: dimension mismatch");
  const auto probs = born_probabilities(rho, projectors);
  const auto k = sample_index(probs, rng);
  const auto& p = projectors[k];
  ComplexMatrix collapsed = p * rho.matrix() * p / probs[k];
  return {k, probs[k], make_density_unchecked(std::move(collapsed))};
}

std::vector<double> computational_probabilities(const ComplexMatrix& rho,
                                                std::span<const int> qubits) {
  const int n = qubit_count_for_dimension(rho.rows());
  std::vector<double> probs(std::size_t{1} << qubits.size(), 0.0);
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    std::uint64_t bits = 0;
    for (int q : qubits) bits = (bits << 1) | qubit_bit(static_cast<std::uint64_t>(i), q, n);
    probs[bits] += rho(i, i).real();
  }
  for (auto& p : probs) p = std::max(0.0, p);
  return probs;
}

ComputationalOutcome measure_computational(const DensityMatrix& rho, std::span<const int> qubits,
                                           RngStream& rng) {
  const int n = rho.n_qubits();
  for (int q : qubits)
    if (q < 0 || q >= n) throw ValidationError("measure_computational: qubit out of range");
  if (qubits.empty()) return {0, 1.0, rho};
  const auto probs = computational_probabilities(rho.matrix(), qubits);
  const auto bits = static_cast<std::uint64_t>(sample_index(probs, rng));
  const auto dim = rho.dim();
  Eigen::VectorXd mask(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    std::uint64_t b = 0;
    for (int q : qubits) b = (b << 1) | qubit_bit(static_cast<std::uint64_t>(i), q, n);
    mask(i) = b == bits ? 1.0 : 0.0;
  }
  ComplexMatrix collapsed = mask.asDiagonal() * rho.matrix() * mask.asDiagonal();
  collapsed /= probs[bits];
  return {bits, probs[bits], make_density_unchecked(std::move(collapsed))};
}

}  // namespace qsv
