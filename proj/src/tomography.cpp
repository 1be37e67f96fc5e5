#include "qsv/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "qsv/linalg.hpp"
#include "qsv/parallel.hpp"

namespace qsv {

std::int64_t TomographySettingData::shots() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::vector<std::string> pauli_settings(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 5) throw ValidationError("tomography supports 1 to 5 qubits");
  std::vector<std::string> out{""};
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<std::string> next;
    next.reserve(out.size() * 3);
    for (const auto& s : out)
      for (char p : {'X', 'Y', 'Z'}) next.push_back(s + p);
    out = std::move(next);
  }
  return out;
}

namespace {

void check_label(const std::string& label) {
  if (label.empty() || label.size() > 5) throw ValidationError("setting '" + label + "' has a bad length");
  for (char c : label)
    if (c != 'X' && c != 'Y' && c != 'Z')
      throw ValidationError("setting '" + label + "' must use only X, Y, Z");
}

Matrix2c single_qubit_basis(char p) {
  const double r = 1 / std::sqrt(2.0);
  const Complex i(0, 1);
  Matrix2c u;
  switch (p) {
    case 'X':
      u << r, r, r, -r;
      break;
    case 'Y':
      u << r, r, i * r, -i * r;
      break;
    default:
      u << 1, 0, 0, 1;
  }
  return u;
}

}  // namespace

ComplexMatrix setting_eigenbasis(const std::string& label) {
  check_label(label);
  ComplexMatrix u = single_qubit_basis(label[0]);
  for (std::size_t q = 1; q < label.size(); ++q) u = kron(u, single_qubit_basis(label[q]));
  return u;
}

std::vector<double> setting_probabilities(const DensityMatrix& rho, const std::string& label) {
  if (static_cast<int>(label.size()) != rho.n_qubits())
    throw ValidationError("setting '" + label + "' does not match the register size");
  const ComplexMatrix u = setting_eigenbasis(label);
  const ComplexMatrix rotated = u.adjoint() * rho.matrix() * u;
  std::vector<double> p(static_cast<std::size_t>(u.cols()));
  for (Eigen::Index k = 0; k < u.cols(); ++k) p[k] = std::max(0.0, rotated(k, k).real());
  return p;
}

std::vector<std::int64_t> split_budget(std::int64_t total, std::size_t n_settings) {
  if (total < 0 || n_settings == 0) throw ValidationError("split_budget: bad arguments");
  const auto n = static_cast<std::int64_t>(n_settings);
  std::vector<std::int64_t> shots(n_settings, total / n);
  for (std::int64_t k = 0; k < total % n; ++k) ++shots[k];
  return shots;
}

std::vector<TomographySettingData> simulate_tomography_data(const DensityMatrix& rho,
                                                            const std::vector<std::int64_t>& shots,
                                                            RngStream& rng) {
  const auto labels = pauli_settings(rho.n_qubits());
  if (shots.size() != labels.size()) throw ValidationError("one shot count per setting is required");
  std::vector<TomographySettingData> data;
  data.reserve(labels.size());
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (shots[s] < 0) throw ValidationError("negative shot count");
    const auto p = setting_probabilities(rho, labels[s]);
    TomographySettingData d{labels[s], std::vector<std::int64_t>(p.size(), 0)};
    // Multinomial by sequential conditional binomials.
    std::int64_t left = shots[s];
    double mass = std::accumulate(p.begin(), p.end(), 0.0);
    for (std::size_t k = 0; k + 1 < p.size() && left > 0; ++k) {
      const double q = mass > 0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
      std::binomial_distribution<std::int64_t> draw(left, q);
      d.counts[k] = draw(rng);
      left -= d.counts[k];
      mass -= p[k];
    }
    d.counts.back() += left;
    data.push_back(std::move(d));
  }
  return data;
}

std::vector<TomographySettingData> simulate_tomography_data(const DensityMatrix& rho,
                                                            std::int64_t shots_per_setting, RngStream& rng) {
  const auto n_settings = pauli_settings(rho.n_qubits()).size();
  return simulate_tomography_data(rho, std::vector<std::int64_t>(n_settings, shots_per_setting), rng);
}

std::vector<SettingWeights> to_weights(const std::vector<TomographySettingData>& data) {
  std::vector<SettingWeights> out;
  out.reserve(data.size());
  for (const auto& d : data) {
    SettingWeights w{d.label, {}};
    for (auto c : d.counts) {
      if (c < 0) throw ValidationError("setting " + d.label + " has a negative count");
      w.weights.push_back(static_cast<double>(c));
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<SettingWeights> exact_weights(const DensityMatrix& rho, const std::vector<std::string>& labels,
                                          double shots_per_setting) {
  if (!(shots_per_setting > 0)) throw ValidationError("exact_weights: shots must be positive");
  std::vector<SettingWeights> out;
  for (const auto& l : labels) {
    auto p = setting_probabilities(rho, l);
    for (auto& x : p) x *= shots_per_setting;
    out.push_back({l, std::move(p)});
  }
  return out;
}

namespace {

int validate_weights(const std::vector<SettingWeights>& data) {
  if (data.empty()) throw ValidationError("tomography data is empty");
  const int n = static_cast<int>(data.front().label.size());
  for (const auto& d : data) {
    check_label(d.label);
    if (static_cast<int>(d.label.size()) != n) throw ValidationError("settings have different lengths");
    if (d.weights.size() != (std::size_t{1} << n))
      throw ValidationError("setting " + d.label + " needs " + std::to_string(1 << n) + " outcomes");
    for (double w : d.weights)
      if (!(w >= 0)) throw ValidationError("setting " + d.label + " has a negative weight");
  }
  return n;
}

}  // namespace

void check_informationally_complete(const std::vector<SettingWeights>& data) {
  const int n = validate_weights(data);
  std::vector<const std::string*> measured;
  for (const auto& d : data)
    if (std::accumulate(d.weights.begin(), d.weights.end(), 0.0) > 0) measured.push_back(&d.label);
  std::size_t total = 1;
  for (int q = 0; q < n; ++q) total *= 4;
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  for (std::size_t code = 1; code < total; ++code) {
    std::string pauli(static_cast<std::size_t>(n), 'I');
    std::size_t c = code;
    for (int q = n - 1; q >= 0; --q, c /= 4) pauli[q] = letters[c % 4];
    bool covered = false;
    for (const auto* label : measured) {
      bool match = true;
      for (int q = 0; q < n && match; ++q) match = pauli[q] == 'I' || pauli[q] == (*label)[q];
      if (match) {
        covered = true;
        break;
      }
    }
    if (!covered)
      throw ValidationError("data are not informationally complete: no setting determines <" + pauli + ">");
  }
}

TomographyResult reconstruct_mle(const std::vector<SettingWeights>& data, const PureState* target,
                                 const MleOptions& options) {
  check_informationally_complete(data);
  const int n = static_cast<int>(data.front().label.size());
  const Eigen::Index dim = Eigen::Index{1} << n;

  // Stack every measured outcome vector as a column with its weight.
  std::vector<Eigen::Index> keep;
  ComplexMatrix v(dim, static_cast<Eigen::Index>(data.size()) * dim);
  RealVector w(v.cols());
  double total = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    v.middleCols(static_cast<Eigen::Index>(s) * dim, dim) = setting_eigenbasis(data[s].label);
    for (Eigen::Index k = 0; k < dim; ++k) {
      w(static_cast<Eigen::Index>(s) * dim + k) = data[s].weights[k];
      total += data[s].weights[k];
    }
  }
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (w(j) > 0) keep.push_back(j);
  ComplexMatrix vk(dim, static_cast<Eigen::Index>(keep.size()));
  RealVector wk(vk.cols());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    vk.col(static_cast<Eigen::Index>(j)) = v.col(keep[j]);
    wk(static_cast<Eigen::Index>(j)) = w(keep[j]) / total;
  }

  auto probabilities = [&](const ComplexMatrix& rho) -> RealVector {
    return (vk.adjoint() * rho).cwiseProduct(vk.transpose()).rowwise().sum().real();
  };
  // Count-weighted, so the stopping gain is in nats of the whole dataset.
  auto log_likelihood = [&](const RealVector& p) {
    double ll = 0;
    for (Eigen::Index j = 0; j < p.size(); ++j)
      ll += wk(j) * std::log(std::max(p(j), std::numeric_limits<double>::min()));
    return total * ll;
  };

  ComplexMatrix rho = ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim);
  RealVector p = probabilities(rho);
  double ll = log_likelihood(p);
  // Steps are R rho R with R -> 1 + mu (R - 1); mu = 1 is the plain update.
  // Each iteration keeps the best of mu/2, mu, 2mu and halves mu while no
  // candidate raises the likelihood.
  constexpr double kMaxStep = 1024.0;
  struct Candidate {
    ComplexMatrix rho;
    RealVector p;
    double ll;
  };
  const ComplexMatrix identity = ComplexMatrix::Identity(dim, dim);
  auto try_step = [&](const ComplexMatrix& r, double step) {
    const ComplexMatrix a = identity + step * (r - identity);
    ComplexMatrix next = a * rho * a.adjoint();
    next = (next + next.adjoint()) / 2.0;
    next /= next.trace().real();
    RealVector pn = probabilities(next);
    const double lln = log_likelihood(pn);
    return Candidate{std::move(next), std::move(pn), lln};
  };
  double mu = 1.0;
  int iterations = 0;
  for (int step = 0; step < options.max_iterations; ++step) {
    const RealVector ratio = wk.cwiseQuotient(p.cwiseMax(std::numeric_limits<double>::min()));
    const ComplexMatrix r = vk * ratio.asDiagonal() * vk.adjoint();
    std::optional<Candidate> best;
    double best_mu = mu;
    for (double m : {0.5 * mu, mu, std::min(kMaxStep, 2 * mu)}) {
      auto c = try_step(r, m);
      if (!best || c.ll > best->ll) {
        best = std::move(c);
        best_mu = m;
      }
    }
    while (best->ll < ll && mu > 1e-12) {
      mu *= 0.5;
      best = try_step(r, mu);
      best_mu = mu;
    }
    if (best->ll < ll) break;
    const double gain = best->ll - ll;
    rho = std::move(best->rho);
    p = std::move(best->p);
    ll = best->ll;
    mu = best_mu;
    ++iterations;
    if (options.observer) options.observer(iterations, rho, ll);
    if (gain < options.tolerance) break;
  }

  TomographyResult result{make_density_unchecked(rho), std::numeric_limits<double>::quiet_NaN(),
                          static_cast<std::int64_t>(std::llround(total)), iterations, ll};
  if (target) result.fidelity = fidelity(result.state, *target);
  return result;
}

TomographyResult reconstruct_mle(const std::vector<TomographySettingData>& data, const PureState* target,
                                 const MleOptions& options) {
  return reconstruct_mle(to_weights(data), target, options);
}

std::vector<ConvergencePoint> fidelity_convergence_study(const DensityMatrix& rho, const PureState& target,
                                                         const std::vector<std::int64_t>& budgets, int repetitions,
                                                         std::uint64_t master_seed) {
  if (repetitions < 2) throw ValidationError("convergence study needs at least 2 repetitions");
  const auto n_settings = pauli_settings(rho.n_qubits()).size();
  const auto reps = static_cast<std::size_t>(repetitions);
  // Rounds are independent; round (g, r) owns its stream.
  std::vector<double> fidelities(budgets.size() * reps);
  parallel_for(fidelities.size(), [&](std::size_t k) {
    const std::size_t g = k / reps, r = k % reps;
    RngStream rng(stream_id(master_seed, g, r));
    const auto data = simulate_tomography_data(rho, split_budget(budgets[g], n_settings), rng);
    fidelities[k] = reconstruct_mle(data, &target).fidelity;
  });
  std::vector<ConvergencePoint> out;
  for (std::size_t g = 0; g < budgets.size(); ++g) {
    ConvergencePoint point{budgets[g], 0.0, 0.0,
                           {fidelities.begin() + std::ptrdiff_t(g * reps), fidelities.begin() + std::ptrdiff_t((g + 1) * reps)}};
    for (double f : point.fidelities) point.mean_fidelity += f / repetitions;
    for (double f : point.fidelities)
      point.std_fidelity += (f - point.mean_fidelity) * (f - point.mean_fidelity) / (repetitions - 1);
    point.std_fidelity = std::sqrt(point.std_fidelity);
    out.push_back(std::move(point));
  }
  return out;
}

void write_tomography_csv(std::ostream& out, const std::vector<TomographySettingData>& data) {
  out << "setting,outcome,count\n";
  for (const auto& d : data) {
    const std::size_t n = d.label.size();
    for (std::size_t k = 0; k < d.counts.size(); ++k) {
      std::string bits(n, '0');
      for (std::size_t q = 0; q < n; ++q)
        if ((k >> (n - 1 - q)) & 1U) bits[q] = '1';
      out << d.label << ',' << bits << ',' << d.counts[k] << '\n';
    }
  }
}

std::vector<TomographySettingData> read_tomography_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "setting,outcome,count")
    throw ValidationError("tomography data: expected header setting,outcome,count");
  std::vector<TomographySettingData> data;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<bool>> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "tomography data line " + std::to_string(line_no);
    std::stringstream fields(line);
    std::string label, bits, count;
    if (!std::getline(fields, label, ',') || !std::getline(fields, bits, ',') || !std::getline(fields, count))
      throw ValidationError(where + ": expected three fields");
    check_label(label);
    if (bits.size() != label.size() || bits.find_first_not_of("01") != std::string::npos)
      throw ValidationError(where + ": bad outcome '" + bits + "'");
    std::int64_t c = 0;
    try {
      std::size_t used = 0;
      c = std::stoll(count, &used);
      if (used != count.size()) throw std::invalid_argument(count);
    } catch (const std::exception&) {
      throw ValidationError(where + ": bad count '" + count + "'");
    }
    if (c < 0) throw ValidationError(where + ": negative count");
    auto [it, inserted] = index.try_emplace(label, data.size());
    if (inserted) {
      data.push_back({label, std::vector<std::int64_t>(std::size_t{1} << label.size(), 0)});
      seen.emplace_back(std::size_t{1} << label.size(), false);
    }
    const auto k = std::stoull(bits, nullptr, 2);
    if (seen[it->second][k]) throw ValidationError(where + ": duplicate outcome " + bits);
    seen[it->second][k] = true;
    data[it->second].counts[k] = c;
  }
  if (data.empty()) throw ValidationError("tomography data: no rows");
  return data;
}

}  // namespace qsv
