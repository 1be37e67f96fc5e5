#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsv/config.hpp"
#include "qsv/io.hpp"

namespace qsv {

enum ExitStatus : int { exit_ok = 0, exit_failure = 1, exit_bad_config = 2, exit_refused = 3 };

struct RunOptions {
  /// Allows oracle columns (true fidelities known only to the simulator).
  bool test_mode = false;
};

/// In-memory results of one command: the report document and the data
/// tables, keyed by table name.
struct CommandOutput {
  nlohmann::ordered_json report;
  std::vector<std::pair<std::string, DataTable>> tables;

  const DataTable& table(const std::string& name) const;
};

/// Runs the pipeline without touching the filesystem (except reading a count
/// table). Throws ConfigError, ValidationError or OracleRefused.
CommandOutput execute(const ExperimentConfig& config, const RunOptions& options = {});

class OracleRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "qsvlab <version> command=<c> config_hash=<h> seed=<s>"
std::string metadata_line(const ExperimentConfig& config);

struct RunResult {
  int status = exit_ok;
  std::string message;             // diagnostic when status != 0
  std::vector<std::string> files;  // written files
};

/// execute() plus output: <output>/<command>_config.json (canonical config),
/// <command>_report.json and one <command>_<table>.csv per table.
RunResult run_command(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace qsv
