#include "qsv/sampler.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "qsv/measurement.hpp"
#include "qsv/parallel.hpp"

namespace qsv {

TestRunSummary& TestRunSummary::operator+=(const TestRunSummary& other) {
  n += other.n;
  t += other.t;
  f = n > 0 ? static_cast<double>(t) / static_cast<double>(n) : 0.0;
  return *this;
}

StateSource constant_source(DensityMatrix rho) {
  return [rho = std::move(rho)](std::uint64_t) { return rho; };
}

std::size_t sample_setting(const VerificationStrategy& strategy, RngStream& rng) {
  const auto& probs = strategy.probabilities();
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t l = 0; l + 1 < probs.size(); ++l) {
    acc += probs[l];
    if (u < acc) return l;
  }
  return probs.size() - 1;
}

namespace {

DensityMatrix draw_state(const StateSource& source, std::uint64_t trial, Eigen::Index dim) {
  try {
    DensityMatrix rho = source(trial);
    if (rho.dim() != dim)
      throw ValidationError("state has dimension " + std::to_string(rho.dim()) + ", expected " +
                            std::to_string(dim));
    return rho;
  } catch (const std::exception& e) {
    throw ValidationError("source failed at trial " + std::to_string(trial) + ": " + e.what());
  }
}

// Copies are processed in fixed blocks; blocks run in parallel and are merged
// in order, so results do not depend on the thread count.
constexpr std::int64_t kBlock = 4096;

template <typename TestFn>
TestRunSummary run(const VerificationStrategy& strategy, const StateSource& source, std::int64_t n_tests,
                   std::uint64_t master_seed, std::vector<TestRecord>* records, TestFn&& test) {
  if (n_tests < 1) throw ValidationError("sampler: N must be at least 1");
  TestRunSummary summary{n_tests, 0, 0.0, strategy.name(), master_seed};
  const auto dim = strategy.target().dim();
  const auto n_blocks = static_cast<std::size_t>((n_tests + kBlock - 1) / kBlock);
  std::vector<std::int64_t> passes(n_blocks, 0);
  std::vector<std::vector<TestRecord>> block_records(records ? n_blocks : 0);
  parallel_for(n_blocks, [&](std::size_t b) {
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
    const std::int64_t end = std::min(n_tests, begin + kBlock);
    for (std::int64_t i = begin; i < end; ++i) {
      const auto trial = static_cast<std::uint64_t>(i);
      RngStream rng(stream_id(master_seed, trial));
      const DensityMatrix sigma = draw_state(source, trial, dim);
      const std::size_t l = sample_setting(strategy, rng);
      std::optional<std::uint64_t> outcome;
      const bool passed = test(strategy.settings()[l], sigma, rng, outcome);
      passes[b] += passed;
      if (records) block_records[b].push_back({trial, strategy.settings()[l].label, passed, rng.id(), outcome});
    }
  });
  for (std::size_t b = 0; b < n_blocks; ++b) {
    summary.t += passes[b];
    if (records) records->insert(records->end(), block_records[b].begin(), block_records[b].end());
  }
  summary.f = static_cast<double>(summary.t) / static_cast<double>(summary.n);
  return summary;
}

}  // namespace

TestRunSummary run_operator_level(const VerificationStrategy& strategy, const StateSource& source,
                                  std::int64_t n_tests, std::uint64_t master_seed,
                                  std::vector<TestRecord>* records) {
  return run(strategy, source, n_tests, master_seed, records,
             [](const MeasurementSetting& s, const DensityMatrix& sigma, RngStream& rng,
                std::optional<std::uint64_t>&) { return rng.bernoulli(pass_probability(s, sigma.matrix())); });
}

bool run_setting_circuit(const MeasurementSetting& setting, const DensityMatrix& sigma, RngStream& rng,
                         std::uint64_t* first_stage_outcome) {
  const int n = sigma.n_qubits();
  const auto first = measure_computational(sigma, setting.first_stage_qubits, rng);
  if (first_stage_outcome) *first_stage_outcome = first.bits;
  const Leaf& leaf = setting.branch_for(first.bits).leaf;
  auto project = [&](const LocalOperator& accept) {
    const double p = local_expectation(first.collapsed.matrix(), accept, n).real();
    return rng.bernoulli(p);
  };
  if (std::holds_alternative<leaf::Accept>(leaf)) return true;
  if (std::holds_alternative<leaf::Reject>(leaf)) return false;
  if (const auto* p = std::get_if<leaf::Project>(&leaf)) return project(p->accept);
  const auto& coin = std::get<leaf::Coin>(leaf);
  if (rng.bernoulli(coin.accept_probability)) return true;
  return project(coin.accept);
}

TestRunSummary run_circuit_level(const VerificationStrategy& strategy, const StateSource& source,
                                 std::int64_t n_tests, std::uint64_t master_seed,
                                 std::vector<TestRecord>* records) {
  return run(strategy, source, n_tests, master_seed, records,
             [](const MeasurementSetting& s, const DensityMatrix& sigma, RngStream& rng,
                std::optional<std::uint64_t>& outcome) {
               std::uint64_t bits = 0;
               const bool passed = run_setting_circuit(s, sigma, rng, &bits);
               if (!s.first_stage_qubits.empty()) outcome = bits;
               return passed;
             });
}

std::vector<ScalingPoint> run_scaling_sweep(const VerificationStrategy& strategy, const StateSource& source,
                                            const std::vector<std::int64_t>& grid, int trials,
                                            std::uint64_t master_seed, SamplerLevel level) {
  if (grid.empty()) throw ValidationError("scaling sweep: empty grid");
  if (trials < 1) throw ValidationError("scaling sweep: trials must be at least 1");
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (grid[g] <= grid[g - 1]) throw ValidationError("scaling sweep: grid must be strictly ascending");
  // Every (grid point, trial) run is independent.
  const auto n_trials = static_cast<std::size_t>(trials);
  std::vector<double> f(grid.size() * n_trials);
  parallel_for(f.size(), [&](std::size_t k) {
    const std::size_t g = k / n_trials, r = k % n_trials;
    const auto seed = stream_id(master_seed, g, r);
    f[k] = level == SamplerLevel::operator_level ? run_operator_level(strategy, source, grid[g], seed).f
                                                 : run_circuit_level(strategy, source, grid[g], seed).f;
  });
  std::vector<ScalingPoint> out;
  out.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ScalingPoint point{grid[g], 0.0, {f.begin() + std::ptrdiff_t(g * n_trials), f.begin() + std::ptrdiff_t((g + 1) * n_trials)}};
    for (double x : point.f) point.mean_f += x;
    point.mean_f /= trials;
    out.push_back(std::move(point));
  }
  return out;
}

void write_records_csv(std::ostream& out, const std::vector<TestRecord>& records) {
  out << "trial,setting,passed\n";
  for (const auto& r : records) out << r.trial << ',' << r.setting << ',' << (r.passed ? 1 : 0) << '\n';
}

std::vector<TestRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "trial,setting,passed")
    throw ValidationError("records: expected header trial,setting,passed");
  std::vector<TestRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b)
      throw ValidationError("records: line " + std::to_string(line_no) + " needs three fields");
    TestRecord r;
    try {
      std::size_t used = 0;
      r.trial = std::stoull(line.substr(0, a), &used);
      if (used != a) throw std::invalid_argument("trial");
    } catch (const std::exception&) {
      throw ValidationError("records: line " + std::to_string(line_no) + " has a bad trial index");
    }
    r.setting = line.substr(a + 1, b - a - 1);
    const auto passed = line.substr(b + 1);
    if (passed != "0" && passed != "1")
      throw ValidationError("records: line " + std::to_string(line_no) + " has passed=" + passed);
    r.passed = passed == "1";
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace qsv
