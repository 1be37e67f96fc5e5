#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsv/feedback.hpp"
#include "qsv/noise.hpp"
#include "qsv/sampler.hpp"
#include "qsv/strategies.hpp"

namespace qsv {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Bad configuration. `field` is a JSON pointer ("/source/noise/0/p") or
/// empty for syntax errors; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Channel description as written in a config. Convex mixtures name their
/// partner state instead of carrying a matrix.
struct NoiseSpec {
  std::string type;  // depolarizing, dephasing, amplitude_damping, rotation, mixture
  double strength = 0.0;  // p, gamma, angle or weight
  int qubit = 0;          // rotation only; 1-based, 0 = every qubit
  char axis = 'Z';
  std::string partner = "maximally_mixed";  // mixture only: maximally_mixed or basis
  std::uint64_t partner_index = 0;
};

NoiseModel to_noise_model(const NoiseSpec& spec, int n_qubits);

struct StrategySpec {
  std::string name = "hom_w3";  // hom_w3, adaptive_wn, opt_2q
  int n = 3;
  double theta = 0.7853981633974483;
  PermutationReading reading = PermutationReading::control_qubit;
};

VerificationStrategy build_strategy(const StrategySpec& spec);

/// The state a verification run is fed. `target` is the strategy's target;
/// `fixed_fidelity` is the target depolarized to the given fidelity;
/// `worst_case` is worst_case_state at `epsilon`.
struct SourceSpec {
  std::string state = "target";  // target, w, theta, basis, maximally_mixed, worst_case, fixed_fidelity
  int n = 3;
  double theta = 0.7853981633974483;
  std::uint64_t index = 0;
  double epsilon = 0.0;
  double fidelity = 1.0;
  std::vector<NoiseSpec> noise;
};

DensityMatrix build_source(const SourceSpec& spec, const VerificationStrategy& strategy);

struct ChshSpec {
  std::string counts_file;  // empty: simulate from the source
  std::int64_t counts_per_setting = 270000;
};

struct TomographySpec {
  std::int64_t total_samples = 1000000;
  std::vector<std::int64_t> budgets;  // convergence study, skipped when empty
  int repetitions = 50;
};

struct DeviceSpec {
  std::string kind = "two_qubit";  // two_qubit, w3
  std::vector<double> knobs;       // starting knobs; empty = nominal
  std::vector<double> offsets;     // hidden calibration offsets
  std::vector<NoiseSpec> noise;
};

DeviceModel build_device(const DeviceSpec& spec);

struct TuneSpec {
  DeviceSpec device;
  std::string method = "qsv";  // qsv, qst, both
  std::int64_t batch = 500;
  std::int64_t budget = 600000;
  std::int64_t qst_shots = 1000;
  std::int64_t qst_budget = 10000000;
  double threshold = 0.95;
  OptimizerConfig optimizer;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string command;  // verify, estimate, scaling, chsh, tomography, tune, compare
  std::uint64_t seed = 1;
  std::string output = "results";
  StrategySpec strategy;
  SourceSpec source;
  SamplerLevel level = SamplerLevel::operator_level;
  std::int64_t tests = 10000;
  double delta = 0.05;
  int trials = 1;
  std::vector<std::int64_t> grid;
  bool records = false;
  ChshSpec chsh;
  TomographySpec tomography;
  TuneSpec tune;
  bool oracle_columns = false;
};

/// Parses and validates a config document. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical form: every field written, keys sorted, two-space indent.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a 64-bit.
std::uint64_t fnv1a(std::string_view bytes);
/// fnv1a of the canonical form with `output` blanked, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace qsv
