// qsvlab: run a verification / tomography / tuning experiment from a config.
//
//   qsvlab --config experiment.json [--seed S] [--out DIR] [--trials T] [--test-mode]

#include <iostream>

#include <CLI11.hpp>

#include "qsv/commands.hpp"
#include "qsv/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum state verification laboratory"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> trials;
  bool test_mode = false;
  bool print_config = false;
  app.add_option("-c,--config", config_path, "Experiment config (JSON)")->required();
  app.add_option("-s,--seed", seed, "Override the master seed");
  app.add_option("-o,--out", out_dir, "Override the output directory");
  app.add_option("-t,--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
  app.add_flag("--test-mode", test_mode, "Allow oracle columns (simulator-only true fidelities)");
  app.add_flag("--print-config", print_config, "Print the canonical config and exit");
  CLI11_PARSE(app, argc, argv);

  qsv::ExperimentConfig config;
  try {
    config = qsv::load_config(config_path);
  } catch (const qsv::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return qsv::exit_bad_config;
  }
  if (seed) config.seed = *seed;
  if (out_dir) config.output = *out_dir;
  if (trials) config.trials = *trials;

  if (print_config) {
    std::cout << qsv::serialize_config(config);
    return qsv::exit_ok;
  }

  const auto result = qsv::run_command(config, {test_mode});
  if (result.status != qsv::exit_ok) {
    std::cerr << "qsvlab " << config.command << ": " << result.message << '\n';
    return result.status;
  }
  for (const auto& f : result.files) std::cout << f << '\n';
  return qsv::exit_ok;
}
