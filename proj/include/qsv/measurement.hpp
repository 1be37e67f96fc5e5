#pragma once

#include <span>
#include <vector>

#include "qsv/random.hpp"
#include "qsv/states.hpp"

namespace qsv {

struct MeasurementOutcome {
  std::size_t index;
  double probability;
  DensityMatrix collapsed;
};

/// Checks that `projectors` form a complete set of orthogonal projectors
/// within `tolerance`; throws ValidationError naming the first violation.
void validate_projective_measurement(std::span<const ComplexMatrix> projectors,
                                     double tolerance = 1e-9);

/// Born probabilities Tr(P_k rho).
std::vector<double> born_probabilities(const DensityMatrix& rho,
                                       std::span<const ComplexMatrix> projectors);

/// Samples outcome k with probability Tr(P_k rho) and returns the collapsed
/// state P_k rho P_k / Tr(P_k rho).
MeasurementOutcome measure_projective(const DensityMatrix& rho,
                                      std::span<const ComplexMatrix> projectors, RngStream& rng);

struct ComputationalOutcome {
  std::uint64_t bits;  // outcome bits of `qubits`, first listed = most significant
  double probability;
  DensityMatrix collapsed;
};

/// Z-basis measurement of a subset of qubits (all qubits measured
/// individually). An empty subset is the trivial measurement.
ComputationalOutcome measure_computational(const DensityMatrix& rho, std::span<const int> qubits,
                                           RngStream& rng);

/// Marginal outcome distribution of a Z-basis measurement of `qubits`.
std::vector<double> computational_probabilities(const ComplexMatrix& rho,
                                                std::span<const int> qubits);

}  // namespace qsv
