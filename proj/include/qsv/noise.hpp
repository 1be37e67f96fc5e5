#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qsv/states.hpp"

namespace qsv {

namespace noise {

/// Global depolarizing: rho -> (1 - p) rho + p 1/d.
struct Depolarizing {
  double p = 0.0;
};

/// Independent phase flips on every qubit: Kraus {sqrt(1-p) I, sqrt(p) Z}.
struct Dephasing {
  double p = 0.0;
};

/// Independent amplitude damping on every qubit.
struct AmplitudeDamping {
  double gamma = 0.0;
};

/// Unitary exp(-i angle P / 2) on one qubit (qubit < 0: every qubit).
struct CoherentRotation {
  int qubit = -1;
  char axis = 'Z';
  double angle = 0.0;
};

/// rho -> (1 - weight) rho + weight * other.
struct ConvexMixture {
  double weight = 0.0;
  ComplexMatrix other;
};

}  // namespace noise

using NoiseModel = std::variant<noise::Depolarizing, noise::Dephasing, noise::AmplitudeDamping,
                                noise::CoherentRotation, noise::ConvexMixture>;

/// Throws ValidationError for strengths outside their physical range.
void validate(const NoiseModel& model, int n_qubits);

DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseModel& model);
/// Applies the channels left to right.
DensityMatrix apply_noise(const DensityMatrix& rho, std::span<const NoiseModel> models);

std::string describe(const NoiseModel& model);

}  // namespace qsv
