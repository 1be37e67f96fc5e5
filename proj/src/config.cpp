#include "qsv/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qsv {

using nlohmann::json;

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error([&] {
        std::string where;
        if (line > 0) where += "line " + std::to_string(line);
        if (!field.empty()) where += (where.empty() ? "" : ", ") + std::string("field ") + field;
        return where.empty() ? message : where + ": " + message;
      }()),
      field_(std::move(field)),
      line_(line) {}

namespace {

const std::set<std::string> kCommands{"verify", "estimate", "scaling", "chsh", "tomography", "tune", "compare"};

// Line of the last key of a JSON pointer, found by walking the key tokens
// through the text in order. Good enough for hand-written configs.
int line_of(std::string_view text, const std::string& pointer) {
  std::size_t pos = 0;
  bool found = false;
  std::size_t start = 1;
  while (start <= pointer.size()) {
    std::size_t end = pointer.find('/', start);
    if (end == std::string::npos) end = pointer.size();
    const std::string token = pointer.substr(start, end - start);
    start = end + 1;
    if (token.empty() || std::all_of(token.begin(), token.end(), ::isdigit)) continue;
    const std::size_t at = text.find("\"" + token + "\"", pos);
    if (at == std::string_view::npos) break;
    pos = at;
    found = true;
  }
  if (!found) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ConfigError(path, line_of(text_, path), message);
  }

  // Every key of `j` must be in `allowed`.
  void check_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        fail(path + "/" + key, "unknown field");
    }
  }

  void read(const json& j, const std::string& path, double& out) const {
    if (!j.is_number()) fail(path, "expected a number");
    out = j.get<double>();
    if (!std::isfinite(out)) fail(path, "expected a finite number");
  }
  void read(const json& j, const std::string& path, std::int64_t& out) const {
    if (j.is_number_unsigned()) {
      if (j.get<std::uint64_t>() > std::uint64_t(INT64_MAX)) fail(path, "integer too large");
      out = static_cast<std::int64_t>(j.get<std::uint64_t>());
    } else if (j.is_number_integer()) {
      out = j.get<std::int64_t>();
    } else if (j.is_number_float() && std::nearbyint(j.get<double>()) == j.get<double>() &&
               std::abs(j.get<double>()) < 9e15) {
      out = static_cast<std::int64_t>(j.get<double>());  // 1e6 style
    } else {
      fail(path, "expected an integer");
    }
  }
  void read(const json& j, const std::string& path, int& out) const {
    std::int64_t v = 0;
    read(j, path, v);
    if (v < INT32_MIN || v > INT32_MAX) fail(path, "integer out of range");
    out = static_cast<int>(v);
  }
  void read(const json& j, const std::string& path, std::uint64_t& out) const {
    if (j.is_number_unsigned()) {
      out = j.get<std::uint64_t>();
    } else {
      std::int64_t v = 0;
      read(j, path, v);
      if (v < 0) fail(path, "expected a non-negative integer");
      out = static_cast<std::uint64_t>(v);
    }
  }
  void read(const json& j, const std::string& path, bool& out) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    out = j.get<bool>();
  }
  void read(const json& j, const std::string& path, std::string& out) const {
    if (!j.is_string()) fail(path, "expected a string");
    out = j.get<std::string>();
  }
  template <typename T>
  void read(const json& j, const std::string& path, std::vector<T>& out) const {
    if (!j.is_array()) fail(path, "expected an array");
    out.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
      T value{};
      read(j[i], path + "/" + std::to_string(i), value);
      out.push_back(value);
    }
  }

  template <typename T>
  void optional(const json& j, const std::string& path, const char* key, T& out) const {
    if (j.contains(key)) read(j.at(key), path + "/" + key, out);
  }

  void read_noise(const json& j, const std::string& path, NoiseSpec& out) const {
    check_object(j, path, {"type", "p", "gamma", "angle", "weight", "qubit", "axis", "partner", "index"});
    if (!j.contains("type")) fail(path + "/type", "missing");
    read(j.at("type"), path + "/type", out.type);
    const auto strength = [&](const char* key, bool probability) {
      if (!j.contains(key)) fail(path + "/" + key, "missing for " + out.type);
      read(j.at(key), path + "/" + key, out.strength);
      if (probability && !(out.strength >= 0 && out.strength <= 1)) fail(path + "/" + key, "must lie in [0, 1]");
    };
    if (out.type == "depolarizing" || out.type == "dephasing") {
      strength("p", true);
    } else if (out.type == "amplitude_damping") {
      strength("gamma", true);
    } else if (out.type == "rotation") {
      strength("angle", false);
      optional(j, path, "qubit", out.qubit);
      if (out.qubit < 0) fail(path + "/qubit", "must be 0 (every qubit) or a 1-based qubit index");
      std::string axis = "Z";
      optional(j, path, "axis", axis);
      if (axis != "X" && axis != "Y" && axis != "Z") fail(path + "/axis", "must be X, Y or Z");
      out.axis = axis[0];
    } else if (out.type == "mixture") {
      strength("weight", true);
      optional(j, path, "partner", out.partner);
      if (out.partner != "maximally_mixed" && out.partner != "basis")
        fail(path + "/partner", "must be maximally_mixed or basis");
      optional(j, path, "index", out.partner_index);
    } else {
      fail(path + "/type", "unknown noise type '" + out.type + "'");
    }
  }

  void read_noise_list(const json& j, const std::string& path, std::vector<NoiseSpec>& out) const {
    if (!j.is_array()) fail(path, "expected an array");
    out.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
      NoiseSpec spec;
      read_noise(j[i], path + "/" + std::to_string(i), spec);
      out.push_back(spec);
    }
  }

 private:
  std::string_view text_;
};

json noise_to_json(const NoiseSpec& n) {
  json j{{"type", n.type}};
  if (n.type == "depolarizing" || n.type == "dephasing") j["p"] = n.strength;
  if (n.type == "amplitude_damping") j["gamma"] = n.strength;
  if (n.type == "rotation") {
    j["angle"] = n.strength;
    j["qubit"] = n.qubit;
    j["axis"] = std::string(1, n.axis);
  }
  if (n.type == "mixture") {
    j["weight"] = n.strength;
    j["partner"] = n.partner;
    j["index"] = n.partner_index;
  }
  return j;
}

json noise_list_to_json(const std::vector<NoiseSpec>& list) {
  json j = json::array();
  for (const auto& n : list) j.push_back(noise_to_json(n));
  return j;
}

void read_strategy(const Reader& r, const json& j, StrategySpec& s) {
  const std::string path = "/strategy";
  r.check_object(j, path, {"name", "n", "theta", "reading"});
  r.optional(j, path, "name", s.name);
  r.optional(j, path, "n", s.n);
  r.optional(j, path, "theta", s.theta);
  std::string reading = "control_qubit";
  r.optional(j, path, "reading", reading);
  if (reading == "control_qubit") {
    s.reading = PermutationReading::control_qubit;
  } else if (reading == "cyclic") {
    s.reading = PermutationReading::cyclic;
  } else {
    r.fail(path + "/reading", "must be control_qubit or cyclic");
  }
  if (s.name == "adaptive_wn") {
    if (s.n < 3 || s.n > 10) r.fail(path + "/n", "adaptive_wn needs 3 <= n <= 10");
  } else if (s.name == "opt_2q") {
    if (!(s.theta >= 0 && s.theta <= std::numbers::pi / 2)) r.fail(path + "/theta", "opt_2q needs 0 <= theta <= pi/2");
  } else if (s.name != "hom_w3") {
    r.fail(path + "/name", "unknown strategy '" + s.name + "' (hom_w3, adaptive_wn, opt_2q)");
  }
}

void read_source(const Reader& r, const json& j, SourceSpec& s) {
  const std::string path = "/source";
  r.check_object(j, path, {"state", "n", "theta", "index", "epsilon", "fidelity", "noise"});
  r.optional(j, path, "state", s.state);
  r.optional(j, path, "n", s.n);
  r.optional(j, path, "theta", s.theta);
  r.optional(j, path, "index", s.index);
  r.optional(j, path, "epsilon", s.epsilon);
  r.optional(j, path, "fidelity", s.fidelity);
  if (j.contains("noise")) r.read_noise_list(j.at("noise"), path + "/noise", s.noise);
  static const std::set<std::string> states{"target", "w",          "theta",         "basis",
                                            "maximally_mixed", "worst_case", "fixed_fidelity"};
  if (!states.count(s.state)) r.fail(path + "/state", "unknown state family '" + s.state + "'");
  if ((s.state == "w" && (s.n < 2 || s.n > 10)) || s.n < 1 || s.n > 10) r.fail(path + "/n", "out of range");
  if (s.state == "basis" && s.index >= (std::uint64_t{1} << s.n)) r.fail(path + "/index", "exceeds 2^n - 1");
  if (!(s.epsilon >= 0 && s.epsilon <= 1)) r.fail(path + "/epsilon", "must lie in [0, 1]");
  if (!(s.fidelity >= 0 && s.fidelity <= 1)) r.fail(path + "/fidelity", "must lie in [0, 1]");
}

void read_tune(const Reader& r, const json& j, TuneSpec& t) {
  const std::string path = "/tune";
  r.check_object(j, path,
                 {"device", "method", "batch", "budget", "qst_shots", "qst_budget", "threshold", "optimizer"});
  if (j.contains("device")) {
    const json& d = j.at("device");
    const std::string dp = path + "/device";
    r.check_object(d, dp, {"kind", "knobs", "offsets", "noise"});
    r.optional(d, dp, "kind", t.device.kind);
    r.optional(d, dp, "knobs", t.device.knobs);
    r.optional(d, dp, "offsets", t.device.offsets);
    if (d.contains("noise")) r.read_noise_list(d.at("noise"), dp + "/noise", t.device.noise);
    std::size_t dim = 0;
    if (t.device.kind == "two_qubit") {
      dim = 2;
    } else if (t.device.kind == "w3") {
      dim = 3;
    } else {
      r.fail(dp + "/kind", "must be two_qubit or w3");
    }
    if (!t.device.knobs.empty() && t.device.knobs.size() != dim)
      r.fail(dp + "/knobs", "expected " + std::to_string(dim) + " values");
    if (!t.device.offsets.empty() && t.device.offsets.size() != dim)
      r.fail(dp + "/offsets", "expected " + std::to_string(dim) + " values");
  }
  r.optional(j, path, "method", t.method);
  if (t.method != "qsv" && t.method != "qst" && t.method != "both") r.fail(path + "/method", "must be qsv, qst or both");
  r.optional(j, path, "batch", t.batch);
  r.optional(j, path, "budget", t.budget);
  r.optional(j, path, "qst_shots", t.qst_shots);
  r.optional(j, path, "qst_budget", t.qst_budget);
  r.optional(j, path, "threshold", t.threshold);
  for (const auto& [key, value] : {std::pair{"batch", t.batch}, std::pair{"budget", t.budget},
                                   std::pair{"qst_shots", t.qst_shots}, std::pair{"qst_budget", t.qst_budget}})
    if (value < 1) r.fail(path + "/" + key, "must be positive");
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    const std::string op = path + "/optimizer";
    r.check_object(o, op, {"kind", "a", "c", "big_a", "alpha", "gamma", "max_iterations"});
    std::string kind = "spsa";
    r.optional(o, op, "kind", kind);
    if (kind == "spsa") {
      t.optimizer.kind = OptimizerKind::spsa;
    } else if (kind == "coordinate") {
      t.optimizer.kind = OptimizerKind::coordinate;
    } else {
      r.fail(op + "/kind", "must be spsa or coordinate");
    }
    r.optional(o, op, "a", t.optimizer.a);
    r.optional(o, op, "c", t.optimizer.c);
    r.optional(o, op, "big_a", t.optimizer.big_a);
    r.optional(o, op, "alpha", t.optimizer.alpha);
    r.optional(o, op, "gamma", t.optimizer.gamma);
    r.optional(o, op, "max_iterations", t.optimizer.max_iterations);
    if (t.optimizer.max_iterations < 0) r.fail(op + "/max_iterations", "must be non-negative");
    if (!(t.optimizer.c > 0)) r.fail(op + "/c", "must be positive");
  }
}

void check_positive_list(const Reader& r, const std::vector<std::int64_t>& values, const std::string& path) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] < 1) r.fail(path + "/" + std::to_string(i), "must be positive");
  if (!std::is_sorted(values.begin(), values.end())) r.fail(path, "must be ascending");
}

}  // namespace

NoiseModel to_noise_model(const NoiseSpec& spec, int n_qubits) {
  if (spec.type == "depolarizing") return noise::Depolarizing{spec.strength};
  if (spec.type == "dephasing") return noise::Dephasing{spec.strength};
  if (spec.type == "amplitude_damping") return noise::AmplitudeDamping{spec.strength};
  if (spec.type == "rotation") {
    if (spec.qubit > n_qubits) throw ValidationError("rotation qubit exceeds the register");
    return noise::CoherentRotation{spec.qubit - 1, spec.axis, spec.strength};
  }
  if (spec.type == "mixture") {
    const ComplexMatrix other = spec.partner == "basis"
                                    ? DensityMatrix(make_basis_state(n_qubits, spec.partner_index)).matrix()
                                    : DensityMatrix::maximally_mixed(n_qubits).matrix();
    return noise::ConvexMixture{spec.strength, other};
  }
  throw ValidationError("unknown noise type '" + spec.type + "'");
}

VerificationStrategy build_strategy(const StrategySpec& spec) {
  if (spec.name == "hom_w3") return build_omega_hom_w3(spec.reading);
  if (spec.name == "adaptive_wn") return build_omega_adaptive_wn(spec.n);
  if (spec.name == "opt_2q") return build_omega_opt_2q(spec.theta);
  throw ValidationError("unknown strategy '" + spec.name + "'");
}

DensityMatrix build_source(const SourceSpec& spec, const VerificationStrategy& strategy) {
  const int n_target = strategy.n_qubits();
  DensityMatrix rho = [&] {
    if (spec.state == "target") return DensityMatrix(strategy.target());
    if (spec.state == "w") return DensityMatrix(make_w_state(spec.n));
    if (spec.state == "theta") return DensityMatrix(make_theta_state(spec.theta));
    if (spec.state == "basis") return DensityMatrix(make_basis_state(spec.n, spec.index));
    if (spec.state == "maximally_mixed") return DensityMatrix::maximally_mixed(spec.n);
    if (spec.state == "worst_case") return worst_case_state(strategy, spec.epsilon);
    if (spec.state == "fixed_fidelity") {
      // (1 - p) psi + p 1/d has fidelity 1 - p (1 - 1/d).
      const double d = std::ldexp(1.0, n_target);
      const double p = (1 - spec.fidelity) / (1 - 1 / d);
      if (p > 1) throw ValidationError("fidelity below 1/d is not reachable by depolarizing the target");
      return apply_noise(DensityMatrix(strategy.target()), noise::Depolarizing{p});
    }
    throw ValidationError("unknown state family '" + spec.state + "'");
  }();
  for (const auto& n : spec.noise) rho = apply_noise(rho, to_noise_model(n, rho.n_qubits()));
  return rho;
}

DeviceModel build_device(const DeviceSpec& spec) {
  std::vector<NoiseModel> noise;
  const int n = spec.kind == "w3" ? 3 : 2;
  for (const auto& s : spec.noise) noise.push_back(to_noise_model(s, n));
  const auto value = [](const std::vector<double>& v, std::size_t i, double fallback) {
    return v.empty() ? fallback : v.at(i);
  };
  if (spec.kind == "two_qubit") {
    const double pi4 = std::numbers::pi / 4;
    return DeviceModel::two_qubit(value(spec.knobs, 0, pi4), value(spec.knobs, 1, 0), value(spec.offsets, 0, 0),
                                  value(spec.offsets, 1, 0), noise);
  }
  if (spec.kind == "w3") {
    return DeviceModel::w3(value(spec.knobs, 0, std::asin(1 / std::sqrt(3.0))), value(spec.knobs, 1, 0),
                           value(spec.knobs, 2, std::numbers::pi / 4), value(spec.offsets, 0, 0),
                           value(spec.offsets, 1, 0), value(spec.offsets, 2, 0), noise);
  }
  throw ValidationError("unknown device kind '" + spec.kind + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // byte offset -> line
    const std::size_t at = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
    std::string message = e.what();
    const auto colon = message.find(": ");
    throw ConfigError("", line, colon == std::string::npos ? message : message.substr(colon + 2));
  }
  const Reader r(text);
  r.check_object(j, "", {"schema_version", "command", "seed", "output", "strategy", "source", "level", "tests",
                         "delta", "trials", "grid", "records", "chsh", "tomography", "tune", "oracle_columns"});
  ExperimentConfig c;
  if (!j.contains("schema_version")) r.fail("/schema_version", "missing");
  r.read(j.at("schema_version"), "/schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion)
    r.fail("/schema_version", "unsupported version " + std::to_string(c.schema_version) + " (expected " +
                                  std::to_string(kSchemaVersion) + ")");
  if (!j.contains("command")) r.fail("/command", "missing");
  r.read(j.at("command"), "/command", c.command);
  if (!kCommands.count(c.command)) r.fail("/command", "unknown command '" + c.command + "'");
  r.optional(j, "", "seed", c.seed);
  r.optional(j, "", "output", c.output);
  if (c.output.empty()) r.fail("/output", "must not be empty");
  if (j.contains("strategy")) read_strategy(r, j.at("strategy"), c.strategy);
  if (j.contains("source")) read_source(r, j.at("source"), c.source);
  std::string level = "operator";
  r.optional(j, "", "level", level);
  if (level == "operator") {
    c.level = SamplerLevel::operator_level;
  } else if (level == "circuit") {
    c.level = SamplerLevel::circuit_level;
  } else {
    r.fail("/level", "must be operator or circuit");
  }
  r.optional(j, "", "tests", c.tests);
  if (c.tests < 1) r.fail("/tests", "must be positive");
  r.optional(j, "", "delta", c.delta);
  if (!(c.delta > 0 && c.delta < 1)) r.fail("/delta", "must lie in (0, 1)");
  r.optional(j, "", "trials", c.trials);
  if (c.trials < 1) r.fail("/trials", "must be positive");
  r.optional(j, "", "grid", c.grid);
  check_positive_list(r, c.grid, "/grid");
  r.optional(j, "", "records", c.records);
  if (j.contains("chsh")) {
    const json& h = j.at("chsh");
    r.check_object(h, "/chsh", {"counts_file", "counts_per_setting"});
    r.optional(h, "/chsh", "counts_file", c.chsh.counts_file);
    r.optional(h, "/chsh", "counts_per_setting", c.chsh.counts_per_setting);
    if (c.chsh.counts_per_setting < 1) r.fail("/chsh/counts_per_setting", "must be positive");
  }
  if (j.contains("tomography")) {
    const json& t = j.at("tomography");
    r.check_object(t, "/tomography", {"total_samples", "budgets", "repetitions"});
    r.optional(t, "/tomography", "total_samples", c.tomography.total_samples);
    r.optional(t, "/tomography", "budgets", c.tomography.budgets);
    r.optional(t, "/tomography", "repetitions", c.tomography.repetitions);
    if (c.tomography.total_samples < 1) r.fail("/tomography/total_samples", "must be positive");
    check_positive_list(r, c.tomography.budgets, "/tomography/budgets");
    if (c.tomography.repetitions < 2) r.fail("/tomography/repetitions", "must be at least 2");
  }
  if (j.contains("tune")) read_tune(r, j.at("tune"), c.tune);
  r.optional(j, "", "oracle_columns", c.oracle_columns);

  if (c.command == "scaling" && c.grid.size() < 3) r.fail("/grid", "scaling needs at least 3 grid points");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open config '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["strategy"] = {{"name", c.strategy.name},
                   {"n", c.strategy.n},
                   {"theta", c.strategy.theta},
                   {"reading", c.strategy.reading == PermutationReading::cyclic ? "cyclic" : "control_qubit"}};
  j["source"] = {{"state", c.source.state},       {"n", c.source.n},
                 {"theta", c.source.theta},       {"index", c.source.index},
                 {"epsilon", c.source.epsilon},   {"fidelity", c.source.fidelity},
                 {"noise", noise_list_to_json(c.source.noise)}};
  j["level"] = c.level == SamplerLevel::circuit_level ? "circuit" : "operator";
  j["tests"] = c.tests;
  j["delta"] = c.delta;
  j["trials"] = c.trials;
  j["grid"] = c.grid;
  j["records"] = c.records;
  j["chsh"] = {{"counts_file", c.chsh.counts_file}, {"counts_per_setting", c.chsh.counts_per_setting}};
  j["tomography"] = {{"total_samples", c.tomography.total_samples},
                     {"budgets", c.tomography.budgets},
                     {"repetitions", c.tomography.repetitions}};
  const auto& o = c.tune.optimizer;
  j["tune"] = {{"device",
                {{"kind", c.tune.device.kind},
                 {"knobs", c.tune.device.knobs},
                 {"offsets", c.tune.device.offsets},
                 {"noise", noise_list_to_json(c.tune.device.noise)}}},
               {"method", c.tune.method},
               {"batch", c.tune.batch},
               {"budget", c.tune.budget},
               {"qst_shots", c.tune.qst_shots},
               {"qst_budget", c.tune.qst_budget},
               {"threshold", c.tune.threshold},
               {"optimizer",
                {{"kind", o.kind == OptimizerKind::coordinate ? "coordinate" : "spsa"},
                 {"a", o.a},
                 {"c", o.c},
                 {"big_a", o.big_a},
                 {"alpha", o.alpha},
                 {"gamma", o.gamma},
                 {"max_iterations", o.max_iterations}}}};
  j["oracle_columns"] = c.oracle_columns;
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& config) {
  // The destination is not part of the experiment.
  ExperimentConfig c = config;
  c.output = ".";
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(fnv1a(serialize_config(c))));
  return buffer;
}

}  // namespace qsv
