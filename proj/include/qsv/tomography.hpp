#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qsv/random.hpp"
#include "qsv/states.hpp"

namespace qsv {

/// Outcome counts of one Pauli setting. counts[k] is the number of shots whose
/// outcome bitstring is k (qubit 1 = most significant bit; bit 0 = +1
/// eigenvalue).
struct TomographySettingData {
  std::string label;  // e.g. "XZY"
  std::vector<std::int64_t> counts;

  std::int64_t shots() const;
};

/// All 3^n Pauli strings over {X, Y, Z}, lexicographic.
std::vector<std::string> pauli_settings(int n_qubits);

/// Columns are the joint eigenvectors of a Pauli setting, ordered by outcome
/// bitstring.
ComplexMatrix setting_eigenbasis(const std::string& label);

/// Born probabilities of every outcome of a setting.
std::vector<double> setting_probabilities(const DensityMatrix& rho, const std::string& label);

/// Per-setting shot counts for a total budget split evenly over 3^n settings;
/// the remainder goes to the lexicographically first settings.
std::vector<std::int64_t> split_budget(std::int64_t total, std::size_t n_settings);

/// Multinomial counts for every 3^n Pauli setting. n <= 5.
std::vector<TomographySettingData> simulate_tomography_data(const DensityMatrix& rho,
                                                            std::int64_t shots_per_setting, RngStream& rng);
std::vector<TomographySettingData> simulate_tomography_data(const DensityMatrix& rho,
                                                            const std::vector<std::int64_t>& shots,
                                                            RngStream& rng);

/// Outcome weights of one setting; counts or exact probabilities.
struct SettingWeights {
  std::string label;
  std::vector<double> weights;
};

std::vector<SettingWeights> to_weights(const std::vector<TomographySettingData>& data);
/// Noise-free data: Born probabilities scaled to expected counts at a
/// nominal number of shots per setting.
std::vector<SettingWeights> exact_weights(const DensityMatrix& rho, const std::vector<std::string>& labels,
                                          double shots_per_setting = 1e6);

/// Throws ValidationError naming a Pauli operator no measured setting
/// determines, if any.
void check_informationally_complete(const std::vector<SettingWeights>& data);

struct MleOptions {
  int max_iterations = 5000;
  double tolerance = 1e-10;  // stop when the accepted log-likelihood gain drops below
  /// Called after every accepted iteration with (iteration, rho, log-likelihood).
  std::function<void(int, const ComplexMatrix&, double)> observer;
};

struct TomographyResult {
  DensityMatrix state;
  double fidelity = 0.0;  // to the target passed in, or NaN
  std::int64_t total_samples = 0;
  int iterations = 0;
  double log_likelihood = 0.0;  // sum over outcomes of count * ln p
};

/// Iterative R rho R maximum-likelihood reconstruction from the maximally
/// mixed state, with R replaced by 1 + mu (R - 1) and mu chosen per step so
/// that the likelihood never decreases.
TomographyResult reconstruct_mle(const std::vector<SettingWeights>& data, const PureState* target = nullptr,
                                 const MleOptions& options = {});
TomographyResult reconstruct_mle(const std::vector<TomographySettingData>& data, const PureState* target = nullptr,
                                 const MleOptions& options = {});

struct ConvergencePoint {
  std::int64_t total_samples = 0;
  double mean_fidelity = 0.0;
  double std_fidelity = 0.0;
  std::vector<double> fidelities;
};

/// For every total budget, `repetitions` independent simulate+reconstruct
/// rounds; round (g, r) uses stream_id(master_seed, g, r).
std::vector<ConvergencePoint> fidelity_convergence_study(const DensityMatrix& rho, const PureState& target,
                                                         const std::vector<std::int64_t>& budgets, int repetitions,
                                                         std::uint64_t master_seed);

/// setting,outcome,count with outcome written as a bitstring.
void write_tomography_csv(std::ostream& out, const std::vector<TomographySettingData>& data);
std::vector<TomographySettingData> read_tomography_csv(std::istream& in);

}  // namespace qsv
