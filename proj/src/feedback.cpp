#include "qsv/feedback.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "qsv/analysis.hpp"
#include "qsv/format.hpp"
#include "qsv/sampler.hpp"
#include "qsv/tomography.hpp"

namespace qsv {

namespace {

const double kW3Theta = std::asin(1 / std::sqrt(3.0));

}  // namespace

DeviceModel::DeviceModel(Kind kind, std::vector<std::string> names, Eigen::VectorXd knobs,
                         Eigen::VectorXd offsets, std::vector<NoiseModel> noise)
    : kind_(kind), names_(std::move(names)), knobs_(std::move(knobs)), offsets_(std::move(offsets)),
      noise_(std::move(noise)) {
  if (!knobs_.allFinite() || !offsets_.allFinite()) throw ValidationError("device: knobs must be finite");
  const int n = kind_ == Kind::two_qubit ? 2 : 3;
  for (const auto& m : noise_) validate(m, n);
}

DeviceModel DeviceModel::two_qubit(double theta, double phi, double theta_offset, double phi_offset,
                                   std::vector<NoiseModel> noise) {
  return DeviceModel(Kind::two_qubit, {"theta", "phi"}, Eigen::Vector2d(theta, phi),
                     Eigen::Vector2d(theta_offset, phi_offset), std::move(noise));
}

DeviceModel DeviceModel::w3(double theta, double phi, double chi, double theta_offset, double phi_offset,
                            double chi_offset, std::vector<NoiseModel> noise) {
  return DeviceModel(Kind::w3, {"theta", "phi", "chi"}, Eigen::Vector3d(theta, phi, chi),
                     Eigen::Vector3d(theta_offset, phi_offset, chi_offset), std::move(noise));
}

void DeviceModel::set_knobs(const Eigen::VectorXd& values) {
  if (values.size() != knobs_.size()) throw ValidationError("device: wrong number of knobs");
  if (!values.allFinite()) throw ValidationError("device: knobs must be finite");
  knobs_ = values;
}

Eigen::VectorXd DeviceModel::nominal_knobs() const {
  if (kind_ == Kind::two_qubit) return Eigen::Vector2d(std::numbers::pi / 4, 0.0);
  return Eigen::Vector3d(kW3Theta, 0.0, std::numbers::pi / 4);
}

DensityMatrix DeviceModel::emit() const {
  const Eigen::VectorXd eff = knobs_ + offsets_;
  const double s = std::sin(eff(0)), c = std::cos(eff(0));
  const Complex phase = std::polar(1.0, eff(1));
  ComplexVector psi;
  if (kind_ == Kind::two_qubit) {
    psi = ComplexVector::Zero(4);
    psi(1) = s;          // |01>
    psi(2) = phase * c;  // |10>
  } else {
    psi = ComplexVector::Zero(8);
    psi(1) = s;                             // |001>
    psi(4) = phase * c * std::cos(eff(2));  // |100>
    psi(2) = phase * c * std::sin(eff(2));  // |010>
  }
  DensityMatrix rho(PureState::normalized(psi));
  return noise_.empty() ? rho : apply_noise(rho, noise_);
}

PureState DeviceModel::target() const {
  return kind_ == Kind::two_qubit ? make_theta_state(std::numbers::pi / 4) : make_w_state(3);
}

double oracle_fidelity(const DeviceModel& device) { return fidelity(device.emit(), device.target()); }

TuneTrace tune(DeviceModel& device, const Evaluator& evaluate, std::int64_t cost, std::int64_t budget,
               const OptimizerConfig& config, std::uint64_t master_seed, bool record_oracle) {
  if (cost < 1) throw ValidationError("tune: evaluation cost must be positive");
  if (budget < cost) throw ValidationError("tune: budget is smaller than one evaluation");
  if (config.max_iterations < 0) throw ValidationError("tune: negative iteration limit");
  if (!(config.a > 0 && config.c > 0 && config.big_a >= 0))
    throw ValidationError("tune: gains must be positive");

  TuneTrace trace;
  trace.knob_names = device.knob_names();
  std::int64_t spent = 0;
  auto run = [&]() {
    const auto e = evaluate(device, stream_id(master_seed, static_cast<std::uint64_t>(trace.evaluations), 1));
    ++trace.evaluations;
    spent += cost;
    return e;
  };
  auto record = [&](int iteration, const Evaluation& e) {
    TuneRecord r{iteration, device.knobs(), cost, e.f, e.std, spent, std::nullopt};
    if (record_oracle) r.f_true = oracle_fidelity(device);
    trace.records.push_back(std::move(r));
  };

  record(0, run());
  const auto d = device.knobs().size();
  Eigen::VectorXd x = device.knobs();
  for (int k = 1; k <= config.max_iterations; ++k) {
    if (spent + 2 * cost > budget) {
      trace.stop = TuneStop::budget_exhausted;
      return trace;
    }
    const double ak = config.a / std::pow(k + config.big_a, config.alpha);
    const double ck = config.c / std::pow(k, config.gamma);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(d);
    if (config.kind == OptimizerKind::spsa) {
      RngStream rng(stream_id(master_seed, static_cast<std::uint64_t>(k), 2));
      for (Eigen::Index i = 0; i < d; ++i) delta(i) = rng.bernoulli(0.5) ? 1.0 : -1.0;
    } else {
      delta((k - 1) % d) = 1.0;
    }
    device.set_knobs(x + ck * delta);
    const auto plus = run();
    device.set_knobs(x - ck * delta);
    const auto minus = run();
    // Equal readings give a zero step, the smallest possible change.
    x += ak * (plus.f - minus.f) / (2 * ck) * delta;
    device.set_knobs(x);
    record(k, {0.5 * (plus.f + minus.f), 0.5 * std::hypot(plus.std, minus.std)});
  }
  trace.stop = TuneStop::iteration_limit;
  return trace;
}

TuneTrace tune_with_qsv(DeviceModel& device, const VerificationStrategy& strategy, std::int64_t batch,
                        std::int64_t budget, const OptimizerConfig& config, std::uint64_t master_seed,
                        bool record_oracle) {
  if (strategy.target().dim() != device.target().dim())
    throw ValidationError("tune_with_qsv: strategy and device disagree on the register size");
  const double nu = strategy.nu();
  const bool homogeneous = strategy.homogeneous();
  const Evaluator evaluate = [&, nu, homogeneous, batch](const DeviceModel& dev, std::uint64_t stream) {
    const auto run = run_operator_level(strategy, constant_source(dev.emit()), batch, stream);
    const auto est = estimate_fidelity(run.f, batch, nu, homogeneous);
    return Evaluation{(run.f - (1 - nu)) / nu, est.std};
  };
  return tune(device, evaluate, batch, budget, config, master_seed, record_oracle);
}

TuneTrace tune_with_qst(DeviceModel& device, std::int64_t shots_per_setting, std::int64_t budget,
                        const OptimizerConfig& config, std::uint64_t master_seed, bool record_oracle) {
  if (shots_per_setting < 1) throw ValidationError("tune_with_qst: shots must be positive");
  const PureState target = device.target();
  const auto n_settings = static_cast<std::int64_t>(pauli_settings(target.n_qubits()).size());
  const Evaluator evaluate = [&target, shots_per_setting](const DeviceModel& dev, std::uint64_t stream) {
    RngStream rng(stream);
    const auto data = simulate_tomography_data(dev.emit(), shots_per_setting, rng);
    return Evaluation{reconstruct_mle(data, &target).fidelity, std::numeric_limits<double>::quiet_NaN()};
  };
  return tune(device, evaluate, shots_per_setting * n_settings, budget, config, master_seed, record_oracle);
}

std::optional<std::int64_t> samples_to_threshold(const TuneTrace& trace, double threshold) {
  for (const auto& r : trace.records)
    if (r.f_true && *r.f_true >= threshold) return r.cumulative_samples;
  return std::nullopt;
}

void write_trace_csv(std::ostream& out, const TuneTrace& trace) {
  const bool oracle = !trace.records.empty() && trace.records.front().f_true.has_value();
  out << "iteration";
  for (const auto& name : trace.knob_names) out << ',' << name;
  out << ",batch,f_est,std,cumulative_samples";
  if (oracle) out << ",f_true_oracle";
  out << '\n';
  for (const auto& r : trace.records) {
    out << r.iteration;
    for (Eigen::Index i = 0; i < r.knobs.size(); ++i) out << ',' << format_double(r.knobs(i));
    out << ',' << r.batch << ',' << format_double(r.f_est) << ',' << format_double(r.std) << ','
        << r.cumulative_samples;
    if (oracle) out << ',' << format_double(r.f_true.value_or(std::nan("")));
    out << '\n';
  }
}

}  // namespace qsv
