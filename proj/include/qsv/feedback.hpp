#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qsv/noise.hpp"
#include "qsv/strategies.hpp"

namespace qsv {

/// Simulated photon source with tunable knobs and hidden calibration
/// offsets. The offsets are set at construction and have no accessor; a tuner
/// holding a DeviceModel can only move knobs and request states.
class DeviceModel {
 public:
  enum class Kind { two_qubit, w3 };

  /// sin(t)|01> + e^{i p}cos(t)|10> with t = theta + offset, p = phi + offset.
  /// Knobs: theta, phi. Target: theta = pi/4, phi = 0.
  static DeviceModel two_qubit(double theta, double phi, double theta_offset, double phi_offset,
                               std::vector<NoiseModel> noise = {});
  /// The two-qubit state with its |1>_A arm split over two paths,
  /// |1>_A -> cos(chi)|10> + sin(chi)|01>. Knobs: theta, phi, chi. Target:
  /// sin(theta) = 1/sqrt(3), phi = 0, chi = pi/4 (the W3 state).
  static DeviceModel w3(double theta, double phi, double chi, double theta_offset, double phi_offset,
                        double chi_offset, std::vector<NoiseModel> noise = {});

  Kind kind() const { return kind_; }
  const std::vector<std::string>& knob_names() const { return names_; }
  const Eigen::VectorXd& knobs() const { return knobs_; }
  void set_knobs(const Eigen::VectorXd& values);
  /// Knob values that emit the target when the offsets are zero.
  Eigen::VectorXd nominal_knobs() const;

  /// Pure state for the current knobs plus offsets, then intrinsic noise.
  DensityMatrix emit() const;
  PureState target() const;

 private:
  DeviceModel(Kind kind, std::vector<std::string> names, Eigen::VectorXd knobs, Eigen::VectorXd offsets,
              std::vector<NoiseModel> noise);

  Kind kind_;
  std::vector<std::string> names_;
  Eigen::VectorXd knobs_;
  Eigen::VectorXd offsets_;
  std::vector<NoiseModel> noise_;
};

/// Trace-oracle fidelity of the current output. For test harnesses; tuners
/// only call it to fill the optional oracle column.
double oracle_fidelity(const DeviceModel& device);

enum class OptimizerKind { spsa, coordinate };

/// Gains a_k = a/(k + A)^alpha and c_k = c/k^gamma. The coordinate variant
/// uses the same gains with the perturbation along one knob at a time.
struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::spsa;
  double a = 0.15;
  double c = 0.1;
  double big_a = 10.0;
  double alpha = 0.602;
  double gamma = 0.101;
  int max_iterations = 1000;
};

struct TuneRecord {
  int iteration = 0;
  /// Knobs after this iteration's update (the starting knobs for iteration 0).
  Eigen::VectorXd knobs;
  /// Samples per objective evaluation.
  std::int64_t batch = 0;
  /// Objective value that drove the update: mean of the two perturbed
  /// evaluations (the single initial evaluation for iteration 0).
  double f_est = 0.0;
  double std = 0.0;  // NaN when the evaluator gives no error bar
  std::int64_t cumulative_samples = 0;
  std::optional<double> f_true;  // oracle column, only when requested
};

enum class TuneStop { iteration_limit, budget_exhausted };

struct TuneTrace {
  std::vector<std::string> knob_names;
  std::vector<TuneRecord> records;
  TuneStop stop = TuneStop::iteration_limit;
  int evaluations = 0;
};

struct Evaluation {
  double f = 0.0;
  double std = 0.0;
};

/// Objective evaluated on the device's current output; `stream` is the
/// substream seed for this evaluation.
using Evaluator = std::function<Evaluation(const DeviceModel&, std::uint64_t stream)>;

/// Generic maximization loop. Every evaluation costs `cost` samples; the loop
/// stops before an iteration that would exceed `budget`.
TuneTrace tune(DeviceModel& device, const Evaluator& evaluate, std::int64_t cost, std::int64_t budget,
               const OptimizerConfig& config, std::uint64_t master_seed, bool record_oracle = false);

/// Objective: (f - (1 - nu))/nu from a fresh N-test run of `strategy`.
TuneTrace tune_with_qsv(DeviceModel& device, const VerificationStrategy& strategy, std::int64_t batch,
                        std::int64_t budget, const OptimizerConfig& config, std::uint64_t master_seed,
                        bool record_oracle = false);

/// Objective: fidelity of the MLE reconstruction from `shots_per_setting`
/// shots in each of the 3^n Pauli settings.
TuneTrace tune_with_qst(DeviceModel& device, std::int64_t shots_per_setting, std::int64_t budget,
                        const OptimizerConfig& config, std::uint64_t master_seed, bool record_oracle = false);

/// Cumulative samples at the first record whose oracle fidelity reaches
/// `threshold`; empty if never reached or the oracle column is missing.
std::optional<std::int64_t> samples_to_threshold(const TuneTrace& trace, double threshold);

/// iteration,<knobs...>,batch,f_est,std,cumulative_samples[,f_true]
void write_trace_csv(std::ostream& out, const TuneTrace& trace);

}  // namespace qsv
