#include "qsv/strategies.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace qsv {

namespace {

const LocalOperator* accept_operator(const Leaf& leaf) {
  if (const auto* p = std::get_if<leaf::Project>(&leaf)) return &p->accept;
  if (const auto* c = std::get_if<leaf::Coin>(&leaf)) return &c->accept;
  return nullptr;
}

std::uint64_t first_stage_bits(std::uint64_t index, const std::vector<int>& qubits, int n) {
  std::uint64_t bits = 0;
  for (int q : qubits) bits = (bits << 1) | qubit_bit(index, q, n);
  return bits;
}

std::string qubit_list(const std::vector<int>& qubits) {
  std::string out;
  for (int q : qubits) out += std::to_string(q + 1);
  return out;
}

// Two-qubit projectors used by the W-state strategies.
ComplexMatrix plus_plus_pauli(char p) {
  const ComplexMatrix pp = pauli_string(std::string(2, p));
  return (ComplexMatrix::Identity(4, 4) + pp) / 2.0;
}

ComplexMatrix z_plus_z_plus() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = 1.0;
  return m;
}

std::string pair_basis(char p, int i, int j) {
  return std::string(1, p) + std::to_string(i + 1) + p + std::to_string(j + 1);
}

}  // namespace

const Branch& MeasurementSetting::branch_for(std::uint64_t outcome) const {
  for (const auto& b : branches)
    if (std::find(b.outcomes.begin(), b.outcomes.end(), outcome) != b.outcomes.end()) return b;
  throw ValidationError("setting " + label + ": no branch for outcome " + std::to_string(outcome));
}

SparseComplexMatrix effective_operator(const MeasurementSetting& setting, int n_qubits) {
  const auto dim = Eigen::Index{1} << n_qubits;
  const std::size_t n_outcomes = std::size_t{1} << setting.first_stage_qubits.size();
  std::vector<int> branch_of(n_outcomes, -1);
  for (std::size_t b = 0; b < setting.branches.size(); ++b)
    for (auto o : setting.branches[b].outcomes) branch_of[o] = static_cast<int>(b);

  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::size_t b = 0; b < setting.branches.size(); ++b) {
    const auto& leaf = setting.branches[b].leaf;
    auto in_branch = [&](Eigen::Index i) {
      return branch_of[first_stage_bits(static_cast<std::uint64_t>(i), setting.first_stage_qubits,
                                        n_qubits)] == static_cast<int>(b);
    };
    double identity_weight = 0.0;
    double projector_weight = 0.0;
    if (std::holds_alternative<leaf::Accept>(leaf)) {
      identity_weight = 1.0;
    } else if (std::holds_alternative<leaf::Project>(leaf)) {
      projector_weight = 1.0;
    } else if (const auto* c = std::get_if<leaf::Coin>(&leaf)) {
      identity_weight = c->accept_probability;
      projector_weight = 1.0 - c->accept_probability;
    }
    if (identity_weight > 0.0)
      for (Eigen::Index i = 0; i < dim; ++i)
        if (in_branch(i)) triplets.emplace_back(i, i, identity_weight);
    if (projector_weight > 0.0) {
      // Leaf qubits are disjoint from the first stage, so expanded entries
      // never leave the branch.
      const SparseComplexMatrix pi = expand_sparse(*accept_operator(leaf), n_qubits);
      for (Eigen::Index k = 0; k < pi.outerSize(); ++k)
        for (SparseComplexMatrix::InnerIterator it(pi, k); it; ++it)
          if (in_branch(it.row())) triplets.emplace_back(it.row(), it.col(), projector_weight * it.value());
    }
  }
  SparseComplexMatrix out(dim, dim);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

std::vector<std::string> physical_configurations(const MeasurementSetting& setting) {
  const std::string first =
      setting.first_stage_qubits.empty() ? "" : "Z" + qubit_list(setting.first_stage_qubits) + ">";
  std::set<std::string> configs;
  for (const auto& b : setting.branches) {
    if (const auto* p = std::get_if<leaf::Project>(&b.leaf)) configs.insert(first + p->basis);
    if (const auto* c = std::get_if<leaf::Coin>(&b.leaf)) configs.insert(first + c->basis);
  }
  if (configs.empty()) configs.insert(first);
  return {configs.begin(), configs.end()};
}

MeasurementSetting make_static_setting(std::string label, LocalOperator accept, std::string basis,
                                       int n_qubits) {
  std::vector<Branch> branches{{"all", {0}, leaf::Project{std::move(accept), std::move(basis)}}};
  MeasurementSetting s{std::move(label), SettingKind::static_test, {}, std::move(branches), {}};
  s.effective = effective_operator(s, n_qubits);
  return s;
}

MeasurementSetting make_adaptive_setting(std::string label, std::vector<int> first_stage_qubits,
                                         std::vector<Branch> branches, int n_qubits) {
  const std::size_t n_outcomes = std::size_t{1} << first_stage_qubits.size();
  std::vector<int> seen(n_outcomes, 0);
  for (const auto& b : branches) {
    for (auto o : b.outcomes) {
      if (o >= n_outcomes) throw ValidationError(label + ": branch outcome out of range");
      ++seen[o];
    }
    if (const auto* op = accept_operator(b.leaf)) {
      for (int q : op->qubits)
        if (std::find(first_stage_qubits.begin(), first_stage_qubits.end(), q) !=
            first_stage_qubits.end())
          throw ValidationError(label + ": second stage acts on a first-stage qubit");
      if (!is_projector(op->matrix)) throw ValidationError(label + ": leaf test is not a projector");
    }
    if (const auto* c = std::get_if<leaf::Coin>(&b.leaf))
      if (c->accept_probability < 0.0 || c->accept_probability > 1.0)
        throw ValidationError(label + ": coin probability outside [0, 1]");
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
    throw ValidationError(label + ": branches must partition the first-stage outcomes");
  MeasurementSetting s{std::move(label), SettingKind::adaptive, std::move(first_stage_qubits),
                       std::move(branches), {}};
  s.effective = effective_operator(s, n_qubits);
  return s;
}

VerificationStrategy::VerificationStrategy(std::string name, PureState target,
                                           std::vector<MeasurementSetting> settings,
                                           std::vector<double> probabilities)
    : name_(std::move(name)),
      target_(std::move(target)),
      settings_(std::move(settings)),
      probabilities_(std::move(probabilities)) {
  if (settings_.empty() || settings_.size() != probabilities_.size())
    throw ValidationError(name_ + ": settings and probabilities differ in length");
  if (std::any_of(probabilities_.begin(), probabilities_.end(), [](double p) { return p < 0.0; }))
    throw ValidationError(name_ + ": negative setting probability");
  const double total = std::accumulate(probabilities_.begin(), probabilities_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError(name_ + ": setting probabilities sum to " + std::to_string(total));

  const auto dim = target_.dim();
  const ComplexVector& psi = target_.amplitudes();
  omega_ = ComplexMatrix::Zero(dim, dim);
  for (std::size_t l = 0; l < settings_.size(); ++l) {
    const auto& s = settings_[l];
    if (s.effective.rows() != dim) throw ValidationError(s.label + ": wrong dimension");
    const ComplexMatrix omega_l(s.effective);
    const double pass = (psi.adjoint() * omega_l * psi)(0, 0).real();
    if (std::abs(pass - 1.0) > 1e-10)
      throw ValidationError(s.label + ": target passes with probability " + std::to_string(pass));
    const auto spectrum = hermitian_eigensystem(omega_l).values;
    if (spectrum(0) > 1.0 + 1e-10 || spectrum(dim - 1) < -1e-10)
      throw ValidationError(s.label + ": effective operator outside [0, 1]");
    omega_ += probabilities_[l] * omega_l;
  }
  const auto eig = hermitian_eigensystem(omega_);
  eigenvalues_ = eig.values;
  eigenvectors_ = eig.vectors;
  if (std::abs(eigenvalues_(0) - 1.0) > 1e-9)
    throw ValidationError(name_ + ": largest eigenvalue is " + std::to_string(eigenvalues_(0)));
}

bool VerificationStrategy::homogeneous(double tolerance) const {
  if (eigenvalues_.size() < 3) return true;
  return eigenvalues_(1) - eigenvalues_(eigenvalues_.size() - 1) <= tolerance;
}

std::size_t VerificationStrategy::physical_setting_count() const {
  std::set<std::string> configs;
  for (const auto& s : settings_)
    for (auto& c : physical_configurations(s)) configs.insert(std::move(c));
  return configs.size();
}

VerificationStrategy build_omega_hom_w3(PermutationReading reading) {
  constexpr int n = 3;
  std::vector<MeasurementSetting> settings;
  for (int k = 0; k < n; ++k) {
    std::vector<int> rest;
    if (reading == PermutationReading::cyclic) {
      rest = {(k + 1) % n, (k + 2) % n};
    } else {
      for (int q = 0; q < n; ++q)
        if (q != k) rest.push_back(q);
    }
    const LocalOperator zz{rest, z_plus_z_plus()};
    for (char p : {'X', 'Y'}) {
      std::vector<Branch> branches{
          {"Z+", {0}, leaf::Project{{rest, plus_plus_pauli(p)}, pair_basis(p, rest[0], rest[1])}},
          {"Z-", {1}, leaf::Coin{0.5, zz, pair_basis('Z', rest[0], rest[1])}},
      };
      settings.push_back(make_adaptive_setting(
          "Z" + std::to_string(k + 1) + ">" + pair_basis(p, rest[0], rest[1]), {k},
          std::move(branches), n));
    }
  }
  std::vector<double> probs(settings.size(), 1.0 / static_cast<double>(settings.size()));
  return VerificationStrategy("omega_hom_w3", make_w_state(n), std::move(settings), std::move(probs));
}

VerificationStrategy build_omega_adaptive_wn(int n) {
  if (n < 3 || n > 10) throw ValidationError("build_omega_adaptive_wn: n must be in [3, 10]");
  std::vector<MeasurementSetting> settings;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      std::vector<int> others;
      for (int q = 0; q < n; ++q)
        if (q != i && q != j) others.push_back(q);
      Branch none{"k=0", {}, leaf::Project{{{i, j}, plus_plus_pauli('X')}, pair_basis('X', i, j)}};
      Branch one{"k=1", {}, leaf::Project{{{i, j}, z_plus_z_plus()}, pair_basis('Z', i, j)}};
      Branch many{"k>=2", {}, leaf::Reject{}};
      for (std::uint64_t o = 0; o < (std::uint64_t{1} << others.size()); ++o) {
        const int k = std::popcount(o);
        (k == 0 ? none : k == 1 ? one : many).outcomes.push_back(o);
      }
      std::vector<Branch> branches{std::move(none), std::move(one)};
      if (!many.outcomes.empty()) branches.push_back(std::move(many));
      settings.push_back(make_adaptive_setting(
          "Zbar" + std::to_string(i + 1) + std::to_string(j + 1), std::move(others),
          std::move(branches), n));
    }
  }
  std::vector<double> probs(settings.size(), 2.0 / (n * (n - 1.0)));
  return VerificationStrategy("omega_w" + std::to_string(n), make_w_state(n), std::move(settings),
                              std::move(probs));
}

double omega_opt_alpha(double theta) {
  const double s2 = std::sin(2 * theta);
  return (2 - s2) / (4 + s2);
}

std::vector<ComplexVector> omega_opt_bases(double theta) {
  const double s = std::sin(theta), c = std::cos(theta);
  // 1/sqrt(1 + tan) and 1/sqrt(1 + cot) written without the singular ratios,
  // so the endpoints theta = 0 and pi/2 are their analytic limits.
  const double a = std::sqrt(c / (s + c));
  const double b = std::sqrt(s / (s + c));
  const double pi = std::numbers::pi;
  auto ket = [](Complex x0, Complex x1) {
    Eigen::Vector2cd v;
    v << x0, x1;
    return v;
  };
  auto e = [](double phase) { return std::polar(1.0, phase); };
  auto product = [](const Eigen::Vector2cd& u, const Eigen::Vector2cd& v) {
    return ComplexVector(kron(u, v));
  };
  return {
      product(ket(a, e(2 * pi / 3) * b), ket(b, e(-pi / 3) * a)),
      product(ket(a, e(4 * pi / 3) * b), ket(b, e(-5 * pi / 3) * a)),
      product(ket(a, b), ket(b, -a)),
  };
}

VerificationStrategy build_omega_opt_2q(double theta) {
  const auto target = make_theta_state(theta);
  const double alpha = omega_opt_alpha(theta);
  const ComplexMatrix zz_minus = (ComplexMatrix::Identity(4, 4) - pauli_string("ZZ")) / 2.0;
  std::vector<MeasurementSetting> settings;
  settings.push_back(make_static_setting("ZZ-", {{0, 1}, zz_minus}, "Z1Z2", 2));
  const auto bases = omega_opt_bases(theta);
  for (std::size_t k = 0; k < bases.size(); ++k) {
    const ComplexMatrix complement = ComplexMatrix::Identity(4, 4) - bases[k] * bases[k].adjoint();
    const std::string name = "phi" + std::to_string(k + 1);
    settings.push_back(make_static_setting("1-" + name, {{0, 1}, complement}, name, 2));
  }
  std::vector<double> probs{alpha, (1 - alpha) / 3, (1 - alpha) / 3, (1 - alpha) / 3};
  return VerificationStrategy("omega_opt_2q", target, std::move(settings), std::move(probs));
}

std::int64_t sample_complexity(double nu, double epsilon, double delta) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ValidationError("sample_complexity: nu must lie in (0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ValidationError("sample_complexity: epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw ValidationError("sample_complexity: delta must lie in (0, 1)");
  const double en = epsilon * nu;
  if (en >= 1.0) throw ValidationError("sample_complexity: epsilon * nu must be below 1");
  return static_cast<std::int64_t>(std::ceil(std::log(1.0 / delta) / -std::log1p(-en)));
}

DensityMatrix worst_case_state(const VerificationStrategy& strategy, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw ValidationError("worst_case_state: epsilon must lie in [0, 1)");
  const ComplexVector& psi = strategy.target().amplitudes();
  const auto& vecs = strategy.eigenvectors();
  const auto& vals = strategy.eigenvalues();
  ComplexVector v2;
  // Walk the lambda_2 cluster until a member with a component orthogonal to
  // the target turns up.
  for (Eigen::Index k = 1; k < vals.size() && std::abs(vals(k) - vals(1)) < 1e-9; ++k) {
    ComplexVector v = vecs.col(k) - psi * (psi.adjoint() * vecs.col(k))(0, 0);
    if (v.norm() > 1e-6) {
      v2 = v.normalized();
      break;
    }
  }
  if (v2.size() == 0) throw std::runtime_error("worst_case_state: no orthogonal lambda_2 vector");
  ComplexMatrix sigma = (1 - epsilon) * (psi * psi.adjoint()) + epsilon * (v2 * v2.adjoint());
  return make_density_unchecked(std::move(sigma));
}

double pass_probability(const MeasurementSetting& setting, const ComplexMatrix& rho) {
  // Tr(O rho) = sum_{r,c} O(r,c) rho(c,r)
  Complex acc = 0;
  for (Eigen::Index k = 0; k < setting.effective.outerSize(); ++k)
    for (SparseComplexMatrix::InnerIterator it(setting.effective, k); it; ++it)
      acc += it.value() * rho(it.col(), it.row());
  return acc.real();
}

double pass_probability(const VerificationStrategy& strategy, const ComplexMatrix& rho) {
  return strategy.omega().transpose().cwiseProduct(rho).sum().real();
}

}  // namespace qsv
