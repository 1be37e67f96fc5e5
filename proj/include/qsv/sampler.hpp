#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qsv/random.hpp"
#include "qsv/strategies.hpp"

namespace qsv {

/// One copy of the state fed through one randomly chosen setting.
struct TestRecord {
  std::uint64_t trial = 0;
  std::string setting;
  bool passed = false;
  std::uint64_t stream = 0;
  /// First-stage Z outcome (circuit level, adaptive settings only).
  std::optional<std::uint64_t> first_stage_outcome;
};

struct TestRunSummary {
  std::int64_t n = 0;
  std::int64_t t = 0;
  double f = 0.0;
  std::string strategy;
  std::uint64_t master_seed = 0;

  /// Merge of two disjoint runs of the same strategy.
  TestRunSummary& operator+=(const TestRunSummary& other);
};

/// Produces the state of copy `trial`; i.i.d. sources ignore the argument.
/// Large runs call it from several threads at once.
using StateSource = std::function<DensityMatrix(std::uint64_t trial)>;

/// Source that returns the same state every time.
StateSource constant_source(DensityMatrix rho);

/// Draws a setting index with probabilities p_l.
std::size_t sample_setting(const VerificationStrategy& strategy, RngStream& rng);

/// Per copy: pick setting l, pass with probability Tr(Omega_l sigma_i).
/// Copy i uses the stream stream_id(master_seed, i). When `records` is
/// non-null one TestRecord per copy is appended.
TestRunSummary run_operator_level(const VerificationStrategy& strategy, const StateSource& source,
                                  std::int64_t n_tests, std::uint64_t master_seed,
                                  std::vector<TestRecord>* records = nullptr);

/// Per copy: pick setting l, Z-measure the first-stage qubits with collapse,
/// follow the branch and run its leaf test on the collapsed state.
TestRunSummary run_circuit_level(const VerificationStrategy& strategy, const StateSource& source,
                                 std::int64_t n_tests, std::uint64_t master_seed,
                                 std::vector<TestRecord>* records = nullptr);

/// One test of a single setting at circuit level; exposed for setting-wise
/// comparisons.
bool run_setting_circuit(const MeasurementSetting& setting, const DensityMatrix& sigma, RngStream& rng,
                         std::uint64_t* first_stage_outcome = nullptr);

enum class SamplerLevel { operator_level, circuit_level };

struct ScalingPoint {
  std::int64_t n = 0;
  double mean_f = 0.0;
  std::vector<double> f;  // one entry per trial
};

/// For every N in `grid` (ascending) run `trials` independent runs; run
/// (g, r) is seeded with stream_id(master_seed, g, r).
std::vector<ScalingPoint> run_scaling_sweep(const VerificationStrategy& strategy, const StateSource& source,
                                            const std::vector<std::int64_t>& grid, int trials,
                                            std::uint64_t master_seed,
                                            SamplerLevel level = SamplerLevel::operator_level);

/// trial,setting,passed
void write_records_csv(std::ostream& out, const std::vector<TestRecord>& records);
std::vector<TestRecord> read_records_csv(std::istream& in);

}  // namespace qsv
