#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qsv/linalg.hpp"
#include "qsv/states.hpp"

namespace qsv {

namespace leaf {
/// Pass regardless of the remaining qubits.
struct Accept {};
/// Fail regardless of the remaining qubits.
struct Reject {};
/// Two-outcome projective test {Pi, 1 - Pi}; passes on Pi.
struct Project {
  LocalOperator accept;
  std::string basis;  // local Pauli configuration used, e.g. "X2X3"
};
/// Classical coin: pass unconditionally with `accept_probability`,
/// otherwise run the projective test.
struct Coin {
  double accept_probability = 0.5;
  LocalOperator accept;
  std::string basis;
};
}  // namespace leaf

using Leaf = std::variant<leaf::Accept, leaf::Reject, leaf::Project, leaf::Coin>;

/// First-stage outcomes (bitstrings over the first-stage qubits) that route to `leaf`.
struct Branch {
  std::string label;
  std::vector<std::uint64_t> outcomes;
  Leaf leaf;
};

enum class SettingKind { static_test, adaptive };

/// One two-outcome test {Omega_l, 1 - Omega_l}, stored as a measurement tree:
/// a Z-basis measurement of `first_stage_qubits` followed by the leaf test of
/// the branch the observed outcome falls in. Static settings have no
/// first-stage qubits and a single branch.
struct MeasurementSetting {
  std::string label;
  SettingKind kind = SettingKind::static_test;
  std::vector<int> first_stage_qubits;
  std::vector<Branch> branches;
  /// Effective operator Omega_l implemented by the tree.
  SparseComplexMatrix effective;

  /// Branch taken for a first-stage outcome.
  const Branch& branch_for(std::uint64_t outcome) const;
};

MeasurementSetting make_static_setting(std::string label, LocalOperator accept, std::string basis,
                                       int n_qubits);
MeasurementSetting make_adaptive_setting(std::string label, std::vector<int> first_stage_qubits,
                                         std::vector<Branch> branches, int n_qubits);

/// Omega_l of a measurement tree: sum over branches of M_b L_b M_b, with M_b the
/// first-stage mask of the branch and L_b the leaf's accept operator.
SparseComplexMatrix effective_operator(const MeasurementSetting& setting, int n_qubits);

/// Distinct physical configurations (first-stage basis, second-stage basis)
/// used by a setting, e.g. "Z1>X2X3".
std::vector<std::string> physical_configurations(const MeasurementSetting& setting);

/// Omega = sum_l p_l Omega_l together with its cached spectrum.
class VerificationStrategy {
 public:
  /// Validates probabilities, target acceptance, 0 <= Omega_l <= 1 and the
  /// top eigenvalue; throws ValidationError on violation.
  VerificationStrategy(std::string name, PureState target, std::vector<MeasurementSetting> settings,
                       std::vector<double> probabilities);

  const std::string& name() const { return name_; }
  const PureState& target() const { return target_; }
  int n_qubits() const { return target_.n_qubits(); }
  const std::vector<MeasurementSetting>& settings() const { return settings_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  const ComplexMatrix& omega() const { return omega_; }
  /// Descending.
  const RealVector& eigenvalues() const { return eigenvalues_; }
  const ComplexMatrix& eigenvectors() const { return eigenvectors_; }
  double lambda2() const { return eigenvalues_.size() > 1 ? eigenvalues_(1) : 0.0; }
  double nu() const { return 1.0 - lambda2(); }
  /// True when Omega has a single eigenvalue on the target's complement.
  bool homogeneous(double tolerance = 1e-9) const;
  /// Number of distinct physical measurement configurations.
  std::size_t physical_setting_count() const;

 private:
  std::string name_;
  PureState target_;
  std::vector<MeasurementSetting> settings_;
  std::vector<double> probabilities_;
  ComplexMatrix omega_;
  RealVector eigenvalues_;
  ComplexMatrix eigenvectors_;
};

/// How the permutation sum of the homogeneous W3 strategy is read: as the
/// choice of control qubit with the other two in ascending order, or as the
/// three cyclic shifts of (1, 2, 3).
enum class PermutationReading { control_qubit, cyclic };

/// Homogeneous adaptive strategy for W3 (spectral gap 1/2).
VerificationStrategy build_omega_hom_w3(PermutationReading reading = PermutationReading::control_qubit);

/// Pairwise one-way adaptive strategy for W_n, 3 <= n <= 10.
VerificationStrategy build_omega_adaptive_wn(int n);

/// Optimal non-adaptive strategy for sin(theta)|01> + cos(theta)|10>.
VerificationStrategy build_omega_opt_2q(double theta);

/// alpha(theta) = (2 - sin 2theta) / (4 + sin 2theta).
double omega_opt_alpha(double theta);

/// The three product states whose complements are tested by the optimal
/// two-qubit strategy.
std::vector<ComplexVector> omega_opt_bases(double theta);

/// Exact number of tests ceil(ln(1/delta) / ln(1/(1 - epsilon nu))).
std::int64_t sample_complexity(double nu, double epsilon, double delta);

/// (1 - epsilon)|psi><psi| + epsilon |v2><v2| with v2 an eigenvector of the
/// second-largest eigenvalue of Omega orthogonal to the target. When that
/// eigenvalue is degenerate any member of the cluster may be returned.
DensityMatrix worst_case_state(const VerificationStrategy& strategy, double epsilon);

/// Tr(Omega_l rho) for a single setting.
double pass_probability(const MeasurementSetting& setting, const ComplexMatrix& rho);
/// Tr(Omega rho).
double pass_probability(const VerificationStrategy& strategy, const ComplexMatrix& rho);

}  // namespace qsv
