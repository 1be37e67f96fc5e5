#include "qsv/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qsv/analysis.hpp"
#include "qsv/feedback.hpp"
#include "qsv/format.hpp"
#include "qsv/sampler.hpp"
#include "qsv/tomography.hpp"

namespace qsv {

using ojson = nlohmann::ordered_json;

namespace {

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

ojson strategy_json(const VerificationStrategy& s) {
  ojson settings = ojson::array();
  for (std::size_t l = 0; l < s.settings().size(); ++l)
    settings.push_back({{"label", s.settings()[l].label}, {"probability", s.probabilities()[l]}});
  return {{"name", s.name()},
          {"n_qubits", s.n_qubits()},
          {"nu", s.nu()},
          {"homogeneous", s.homogeneous()},
          {"measurement_settings", s.settings().size()},
          {"physical_settings", s.physical_setting_count()},
          {"settings", settings}};
}

ojson certification_json(double f, std::int64_t n, double nu, double delta) {
  const auto cert = certified_epsilon(f, n, nu, delta);
  if (!cert) return {{"certified", false}, {"epsilon_certified", nullptr}, {"delta", delta}};
  return {{"certified", true},
          {"epsilon_certified", cert->epsilon},
          {"delta", cert->delta},
          {"fidelity_certified", 1 - cert->epsilon}};
}

ojson estimate_json(const FidelityEstimate& e) {
  return {{"F", optional_number(e.point)},
          {"std", e.std},
          {"lower", e.lower},
          {"upper", e.upper},
          {"homogeneous", e.homogeneous},
          {"out_of_range", e.out_of_range}};
}

TestRunSummary run_level(const VerificationStrategy& strategy, const StateSource& source, std::int64_t n,
                         std::uint64_t seed, SamplerLevel level, std::vector<TestRecord>* records = nullptr) {
  return level == SamplerLevel::circuit_level ? run_circuit_level(strategy, source, n, seed, records)
                                              : run_operator_level(strategy, source, n, seed, records);
}

std::size_t setting_index(const VerificationStrategy& s, const std::string& label) {
  for (std::size_t l = 0; l < s.settings().size(); ++l)
    if (s.settings()[l].label == label) return l;
  return s.settings().size();
}

void require_oracle_allowed(const ExperimentConfig& c, const RunOptions& o) {
  if (c.oracle_columns && !o.test_mode)
    throw OracleRefused("oracle columns were requested but test mode is off; rerun with --test-mode");
}

CommandOutput run_verify(const ExperimentConfig& c) {
  const auto strategy = build_strategy(c.strategy);
  const DensityMatrix rho = build_source(c.source, strategy);
  std::vector<TestRecord> records;
  const auto summary = run_level(strategy, constant_source(rho), c.tests, c.seed, c.level,
                                 c.records ? &records : nullptr);
  const auto estimate = estimate_fidelity(summary.f, summary.n, strategy.nu(), strategy.homogeneous());
  CommandOutput out;
  out.report["strategy"] = strategy_json(strategy);
  out.report["N"] = summary.n;
  out.report["t"] = summary.t;
  out.report["f"] = summary.f;
  out.report["hypothesis"] = certification_json(summary.f, summary.n, strategy.nu(), c.delta);
  out.report["estimate"] = estimate_json(estimate);
  if (c.oracle_columns) out.report["F_true_oracle"] = fidelity(rho, strategy.target());
  if (c.records) {
    DataTable t{{"trial", "setting", "passed"}, {}};
    for (const auto& r : records)
      t.rows.push_back({double(r.trial), double(setting_index(strategy, r.setting)), r.passed ? 1.0 : 0.0});
    out.tables.emplace_back("records", std::move(t));
  }
  return out;
}

CommandOutput run_estimate(const ExperimentConfig& c) {
  const auto strategy = build_strategy(c.strategy);
  const DensityMatrix rho = build_source(c.source, strategy);
  const auto source = constant_source(rho);
  DataTable t{{"trial", "N", "t", "f", "F", "std", "lower", "upper"}, {}};
  std::vector<double> points, stds;
  for (int r = 0; r < c.trials; ++r) {
    const auto s = run_level(strategy, source, c.tests, stream_id(c.seed, std::uint64_t(r)), c.level);
    const auto e = estimate_fidelity(s.f, s.n, strategy.nu(), strategy.homogeneous());
    const double point = e.point.value_or(std::nan(""));
    t.rows.push_back({double(r), double(s.n), double(s.t), s.f, point, e.std, e.lower, e.upper});
    points.push_back(point);
    stds.push_back(e.std);
  }
  CommandOutput out;
  out.report["strategy"] = strategy_json(strategy);
  out.report["N"] = c.tests;
  out.report["trials"] = c.trials;
  if (strategy.homogeneous()) {
    out.report["mean_F"] = mean(points);
    out.report["spread_std_F"] = sample_std(points);
  } else {
    out.report["mean_F"] = nullptr;
    out.report["spread_std_F"] = nullptr;
  }
  out.report["mean_formula_std"] = mean(stds);
  out.report["max_formula_std"] = *std::max_element(stds.begin(), stds.end());
  out.report["std_bound"] = 1 / (2 * strategy.nu() * std::sqrt(double(c.tests)));
  if (c.oracle_columns) out.report["F_true_oracle"] = fidelity(rho, strategy.target());
  out.tables.emplace_back("trials", std::move(t));
  return out;
}

CommandOutput run_scaling(const ExperimentConfig& c) {
  const auto strategy = build_strategy(c.strategy);
  const DensityMatrix rho = build_source(c.source, strategy);
  const double nu = strategy.nu();
  // A trial that certifies nothing contributes the top of the search bracket.
  const double uncertified = std::min(1 / nu, 1.0);
  const auto sweep = run_scaling_sweep(strategy, constant_source(rho), c.grid, c.trials, c.seed, c.level);
  DataTable summary{{"N", "mean_f", "mean_epsilon", "std_epsilon", "uncertified_trials", "all_pass_epsilon"}, {}};
  DataTable trials{{"N", "trial", "f", "epsilon"}, {}};
  std::vector<std::pair<double, double>> points;
  for (const auto& p : sweep) {
    std::vector<double> eps;
    int failed = 0;
    for (std::size_t r = 0; r < p.f.size(); ++r) {
      const auto cert = certified_epsilon(p.f[r], p.n, nu, c.delta);
      failed += !cert;
      eps.push_back(cert ? cert->epsilon : uncertified);
      trials.rows.push_back({double(p.n), double(r), p.f[r], eps.back()});
    }
    const double all_pass = (1 - std::pow(c.delta, 1.0 / double(p.n))) / nu;
    summary.rows.push_back({double(p.n), p.mean_f, mean(eps), sample_std(eps), double(failed), all_pass});
    points.emplace_back(double(p.n), mean(eps));
  }
  const auto fit = fit_scaling_exponent(points);
  CommandOutput out;
  out.report["strategy"] = strategy_json(strategy);
  out.report["delta"] = c.delta;
  out.report["trials"] = c.trials;
  out.report["grid"] = c.grid;
  out.report["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
  if (c.oracle_columns) out.report["F_true_oracle"] = fidelity(rho, strategy.target());
  out.tables.emplace_back("summary", std::move(summary));
  out.tables.emplace_back("trials", std::move(trials));
  return out;
}

CommandOutput run_chsh(const ExperimentConfig& c) {
  CountTable table;
  std::string origin;
  if (!c.chsh.counts_file.empty()) {
    table = ingest_count_table(c.chsh.counts_file);
    origin = "file";
  } else {
    const auto strategy = build_strategy(c.strategy);
    const DensityMatrix rho = build_source(c.source, strategy);
    RngStream rng(stream_id(c.seed, 0));
    table = simulate_polarization_counts(rho, kChshRowAngles, kChshColumnAngles, c.chsh.counts_per_setting, rng);
    origin = "simulated";
  }
  const auto result = chsh_s(table);
  CommandOutput out;
  out.report["counts"] = origin;
  out.report["S"] = result.s;
  out.report["standard_error"] = result.standard_error;
  out.report["correlators"] = {{"E(0,22.5)", result.correlators[0]},
                               {"E(0,67.5)", result.correlators[1]},
                               {"E(45,22.5)", result.correlators[2]},
                               {"E(45,67.5)", result.correlators[3]}};
  out.report["violation_sigmas"] = (result.s - 2) / result.standard_error;
  DataTable counts{{"angle"}, {}};
  for (double b : table.column_angles) counts.columns.push_back(format_double(b));
  for (int r = 0; r < 4; ++r) {
    std::vector<double> row{table.row_angles[r]};
    for (int col = 0; col < 4; ++col) row.push_back(double(table.counts[r][col]));
    counts.rows.push_back(std::move(row));
  }
  out.tables.emplace_back("counts", std::move(counts));
  return out;
}

CommandOutput run_tomography(const ExperimentConfig& c) {
  const auto strategy = build_strategy(c.strategy);
  const DensityMatrix rho = build_source(c.source, strategy);
  const PureState& target = strategy.target();
  const auto labels = pauli_settings(rho.n_qubits());
  RngStream rng(stream_id(c.seed, 2));
  const auto data = simulate_tomography_data(rho, split_budget(c.tomography.total_samples, labels.size()), rng);
  const auto result = reconstruct_mle(data, &target);
  CommandOutput out;
  out.report["target"] = strategy.name();
  out.report["settings"] = labels.size();
  out.report["total_samples"] = result.total_samples;
  out.report["F_mle"] = result.fidelity;
  out.report["iterations"] = result.iterations;
  out.report["log_likelihood"] = result.log_likelihood;
  if (c.oracle_columns) out.report["F_true_oracle"] = fidelity(rho, target);
  if (!c.tomography.budgets.empty()) {
    const auto study = fidelity_convergence_study(rho, target, c.tomography.budgets, c.tomography.repetitions,
                                                  stream_id(c.seed, 1));
    DataTable summary{{"total_samples", "mean_fidelity", "std_fidelity"}, {}};
    DataTable reps{{"total_samples", "repetition", "fidelity"}, {}};
    ojson points = ojson::array();
    for (const auto& p : study) {
      summary.rows.push_back({double(p.total_samples), p.mean_fidelity, p.std_fidelity});
      for (std::size_t r = 0; r < p.fidelities.size(); ++r)
        reps.rows.push_back({double(p.total_samples), double(r), p.fidelities[r]});
      points.push_back({{"total_samples", p.total_samples}, {"mean", p.mean_fidelity}, {"std", p.std_fidelity}});
    }
    out.report["convergence"] = {{"repetitions", c.tomography.repetitions}, {"points", points}};
    out.tables.emplace_back("convergence", std::move(summary));
    out.tables.emplace_back("repetitions", std::move(reps));
  }
  return out;
}

DataTable trace_table(const TuneTrace& trace) {
  DataTable t{{"iteration"}, {}};
  for (const auto& k : trace.knob_names) t.columns.push_back(k);
  for (const char* col : {"batch", "f_est", "std", "cumulative_samples"}) t.columns.push_back(col);
  const bool oracle = !trace.records.empty() && trace.records.front().f_true.has_value();
  if (oracle) t.columns.push_back("f_true_oracle");
  for (const auto& r : trace.records) {
    std::vector<double> row{double(r.iteration)};
    for (Eigen::Index i = 0; i < r.knobs.size(); ++i) row.push_back(r.knobs(i));
    row.insert(row.end(), {double(r.batch), r.f_est, r.std, double(r.cumulative_samples)});
    if (oracle) row.push_back(*r.f_true);
    t.rows.push_back(std::move(row));
  }
  return t;
}

ojson trace_json(const TuneTrace& trace, double threshold, bool oracle) {
  const auto& last = trace.records.back();
  ojson knobs;
  for (std::size_t i = 0; i < trace.knob_names.size(); ++i)
    knobs[trace.knob_names[i]] = last.knobs(Eigen::Index(i));
  ojson j{{"iterations", last.iteration},
          {"evaluations", trace.evaluations},
          {"total_samples", last.cumulative_samples},
          {"stop", trace.stop == TuneStop::budget_exhausted ? "budget_exhausted" : "iteration_limit"},
          {"final_knobs", knobs},
          {"final_f_est", last.f_est}};
  if (oracle) {
    j["initial_F_true_oracle"] = *trace.records.front().f_true;
    j["final_F_true_oracle"] = *last.f_true;
    const auto reached = samples_to_threshold(trace, threshold);
    j["samples_to_threshold"] = reached ? ojson(*reached) : ojson(nullptr);
  }
  return j;
}

CommandOutput run_tune(const ExperimentConfig& c) {
  const auto& t = c.tune;
  const auto strategy = build_strategy(c.strategy);
  {
    const DeviceModel probe = build_device(t.device);
    const PureState target = probe.target();
    if (target.dim() != strategy.target().dim() ||
        std::norm(target.amplitudes().dot(strategy.target().amplitudes())) < 1 - 1e-9)
      throw ConfigError("/strategy", 0, "strategy target does not match the device target");
  }
  CommandOutput out;
  out.report["strategy"] = strategy_json(strategy);
  out.report["device"] = t.device.kind;
  out.report["threshold"] = t.threshold;
  if (t.method == "qsv" || t.method == "both") {
    DeviceModel device = build_device(t.device);
    const auto trace = tune_with_qsv(device, strategy, t.batch, t.budget, t.optimizer, c.seed, c.oracle_columns);
    out.report["qsv"] = trace_json(trace, t.threshold, c.oracle_columns);
    out.report["qsv"]["batch"] = t.batch;
    out.report["qsv"]["budget"] = t.budget;
    out.tables.emplace_back("qsv_trace", trace_table(trace));
  }
  if (t.method == "qst" || t.method == "both") {
    DeviceModel device = build_device(t.device);
    const auto trace = tune_with_qst(device, t.qst_shots, t.qst_budget, t.optimizer, c.seed, c.oracle_columns);
    out.report["qst"] = trace_json(trace, t.threshold, c.oracle_columns);
    out.report["qst"]["shots_per_setting"] = t.qst_shots;
    out.report["qst"]["budget"] = t.qst_budget;
    out.tables.emplace_back("qst_trace", trace_table(trace));
  }
  return out;
}

CommandOutput run_compare(const ExperimentConfig& c) {
  const auto strategy = build_strategy(c.strategy);
  const DensityMatrix rho = build_source(c.source, strategy);
  const PureState& target = strategy.target();
  const auto summary = run_level(strategy, constant_source(rho), c.tests, stream_id(c.seed, 1), c.level);
  const auto estimate = estimate_fidelity(summary.f, summary.n, strategy.nu(), strategy.homogeneous());
  const auto labels = pauli_settings(rho.n_qubits());
  RngStream rng(stream_id(c.seed, 2));
  const auto data = simulate_tomography_data(rho, split_budget(c.tomography.total_samples, labels.size()), rng);
  const auto mle = reconstruct_mle(data, &target);

  CommandOutput out;
  out.report["strategy"] = strategy_json(strategy);
  ojson qsv_part{{"measurement_settings", strategy.settings().size()},
                 {"physical_settings", strategy.physical_setting_count()},
                 {"samples", summary.n},
                 {"f", summary.f},
                 {"estimate", estimate_json(estimate)},
                 {"hypothesis", certification_json(summary.f, summary.n, strategy.nu(), c.delta)}};
  ojson qst_part{{"settings", labels.size()}, {"samples", mle.total_samples}, {"F_mle", mle.fidelity}};
  out.report["qsv"] = qsv_part;
  out.report["qst"] = qst_part;
  out.report["sample_ratio"] = double(mle.total_samples) / double(summary.n);
  out.report["settings_ratio"] = double(labels.size()) / double(strategy.physical_setting_count());
  if (c.oracle_columns) out.report["F_true_oracle"] = fidelity(rho, target);
  // method 0 = verification, 1 = tomography
  DataTable t{{"method", "settings", "samples", "F"}, {}};
  t.rows.push_back({0, double(strategy.physical_setting_count()), double(summary.n),
                    estimate.point.value_or(std::nan(""))});
  t.rows.push_back({1, double(labels.size()), double(mle.total_samples), mle.fidelity});
  out.tables.emplace_back("resources", std::move(t));
  return out;
}

}  // namespace

const DataTable& CommandOutput::table(const std::string& name) const {
  for (const auto& [key, t] : tables)
    if (key == name) return t;
  throw ValidationError("no table named '" + name + "'");
}

CommandOutput execute(const ExperimentConfig& config, const RunOptions& options) {
  require_oracle_allowed(config, options);
  CommandOutput out;
  if (config.command == "verify") {
    out = run_verify(config);
  } else if (config.command == "estimate") {
    out = run_estimate(config);
  } else if (config.command == "scaling") {
    out = run_scaling(config);
  } else if (config.command == "chsh") {
    out = run_chsh(config);
  } else if (config.command == "tomography") {
    out = run_tomography(config);
  } else if (config.command == "tune") {
    out = run_tune(config);
  } else if (config.command == "compare") {
    out = run_compare(config);
  } else {
    throw ConfigError("/command", 0, "unknown command '" + config.command + "'");
  }
  ojson report{{"tool", "qsvlab"},
               {"version", std::string(kToolVersion)},
               {"command", config.command},
               {"config_hash", config_hash(config)},
               {"seed", config.seed}};
  report["results"] = std::move(out.report);
  out.report = std::move(report);
  return out;
}

std::string metadata_line(const ExperimentConfig& config) {
  return "qsvlab " + std::string(kToolVersion) + " command=" + config.command +
         " config_hash=" + config_hash(config) + " seed=" + std::to_string(config.seed);
}

RunResult run_command(const ExperimentConfig& config, const RunOptions& options) {
  RunResult result;
  CommandOutput out;
  try {
    out = execute(config, options);
  } catch (const OracleRefused& e) {
    return {exit_refused, e.what(), {}};
  } catch (const ConfigError& e) {
    return {exit_bad_config, e.what(), {}};
  } catch (const ValidationError& e) {
    return {exit_bad_config, e.what(), {}};
  } catch (const std::exception& e) {
    return {exit_failure, e.what(), {}};
  }
  namespace fs = std::filesystem;
  try {
    const fs::path dir(config.output);
    fs::create_directories(dir);
    const auto write = [&](const std::string& name, const std::string& body) {
      const fs::path path = dir / name;
      std::ofstream file(path, std::ios::binary);
      if (!file) throw std::runtime_error("cannot write " + path.string());
      file << body;
      if (!file) throw std::runtime_error("write failed: " + path.string());
      result.files.push_back(path.string());
    };
    write(config.command + "_config.json", serialize_config(config));
    write(config.command + "_report.json", out.report.dump(2) + "\n");
    const std::string meta = metadata_line(config);
    for (const auto& [name, table] : out.tables) {
      std::ostringstream body;
      write_table(body, table, meta);
      write(config.command + "_" + name + ".csv", body.str());
    }
  } catch (const std::exception& e) {
    return {exit_failure, e.what(), result.files};
  }
  return result;
}

}  // namespace qsv
