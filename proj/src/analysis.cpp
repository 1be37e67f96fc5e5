#include "qsv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace qsv {

double kl_divergence(double x, double y) {
  if (!(x >= 0 && x <= 1) || (!(y > 0 && y < 1) && y != x))
    throw ValidationError("kl_divergence: arguments out of range");
  double d = 0.0;
  if (x > 0) d += x * std::log(x / y);
  if (x < 1) d += (1 - x) * std::log((1 - x) / (1 - y));
  return std::max(0.0, d);
}

namespace {

void check_common(double f, std::int64_t n, double nu) {
  if (!(f >= 0 && f <= 1)) throw ValidationError("pass frequency must lie in [0, 1]");
  if (n < 1) throw ValidationError("number of tests must be at least 1");
  if (!(nu > 0 && nu <= 1)) throw ValidationError("spectral gap must lie in (0, 1]");
}

}  // namespace

std::optional<double> significance(double f, std::int64_t n, double epsilon, double nu) {
  check_common(f, n, nu);
  if (!(epsilon > 0 && epsilon <= 1)) throw ValidationError("epsilon must lie in (0, 1]");
  const double y = 1 - epsilon * nu;
  if (!(y > 0)) throw ValidationError("epsilon * nu must be below 1");
  if (f <= y) return std::nullopt;
  if (f == 1.0) return std::pow(y, static_cast<double>(n));
  return std::exp(-kl_divergence(f, y) * static_cast<double>(n));
}

std::optional<HypothesisResult> certified_epsilon(double f, std::int64_t n, double nu, double delta_target) {
  check_common(f, n, nu);
  if (!(delta_target > 0 && delta_target < 1)) throw ValidationError("delta must lie in (0, 1)");
  auto ok = [&](double eps) {
    const auto d = significance(f, n, eps, nu);
    return d && *d <= delta_target;
  };
  double lo = 1e-12;
  double hi = std::min(1.0 / nu, 1.0) - 1e-12;
  if (!ok(hi)) return std::nullopt;
  if (ok(lo)) hi = lo;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return HypothesisResult{hi, *significance(f, n, hi, nu), f, n, nu};
}

FidelityEstimate estimate_fidelity(double f, std::int64_t n, double nu, bool homogeneous) {
  check_common(f, n, nu);
  FidelityEstimate est;
  est.homogeneous = homogeneous;
  est.std = std::sqrt(f * (1 - f) / static_cast<double>(n)) / nu;
  const double inverted = (f - (1 - nu)) / nu;
  if (homogeneous) {
    est.point = inverted;
    est.lower = est.upper = inverted;
  } else {
    const double lower = nu < 1 ? 1 - 2 * (1 - f) / (1 - nu) : inverted;
    est.lower = std::min(lower, inverted);
    est.upper = std::max(lower, inverted);
  }
  est.out_of_range = est.lower < 0 || est.upper > 1;
  return est;
}

ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw ValidationError("scaling fit needs at least 3 points");
  const double m = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (const auto& [n, eps] : points) {
    if (!(n > 0 && eps > 0)) throw ValidationError("scaling fit needs positive N and epsilon");
    sx += std::log(eps);
    sy += std::log(n);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [n, eps] : points) {
    const double dx = std::log(eps) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(n) - my);
  }
  if (sxx == 0) throw ValidationError("scaling fit: all epsilon values are equal");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [n, eps] : points) {
    const double r = std::log(n) - (fit.intercept + fit.slope * std::log(eps));
    fit.residual += r * r;
  }
  return fit;
}

namespace {

double normalize_angle(double degrees) {
  double a = std::fmod(degrees, 180.0);
  if (a < 0) a += 180.0;
  if (a > 180.0 - 1e-9) a = 0.0;
  return a;
}

int angle_index(const std::array<double, 4>& angles, double want, const char* axis) {
  for (int i = 0; i < 4; ++i)
    if (std::abs(normalize_angle(angles[i]) - normalize_angle(want)) < 1e-6) return i;
  throw ValidationError(std::string("CHSH: ") + axis + " angle " + std::to_string(want) + " missing");
}

// Generic over the cell type so that counts and exact probabilities share
// the combination.
template <typename Cell>
ChshResult combine(const std::array<double, 4>& rows, const std::array<double, 4>& cols, Cell cell,
                   bool poisson) {
  struct Term {
    double a, b, sign;
  };
  constexpr Term terms[] = {{0, 22.5, -1}, {0, 67.5, 1}, {45, 22.5, 1}, {45, 67.5, 1}};
  ChshResult out;
  double variance = 0;
  for (int k = 0; k < 4; ++k) {
    const auto [a, b, sign] = terms[k];
    const double same1 = cell(angle_index(rows, a, "row"), angle_index(cols, b, "column"));
    const double same2 = cell(angle_index(rows, a + 90, "row"), angle_index(cols, b + 90, "column"));
    const double diff1 = cell(angle_index(rows, a, "row"), angle_index(cols, b + 90, "column"));
    const double diff2 = cell(angle_index(rows, a + 90, "row"), angle_index(cols, b, "column"));
    const double total = same1 + same2 + diff1 + diff2;
    if (!(total > 0)) throw ValidationError("CHSH: correlator has no counts");
    const double e = (same1 + same2 - diff1 - diff2) / total;
    out.correlators[k] = e;
    out.s += sign * e;
    if (poisson) {
      // dE/dn is (1 - E)/total for coincident cells and -(1 + E)/total otherwise.
      const double g_same = (1 - e) / total, g_diff = (1 + e) / total;
      variance += g_same * g_same * (same1 + same2) + g_diff * g_diff * (diff1 + diff2);
    }
  }
  out.standard_error = std::sqrt(variance);
  return out;
}

}  // namespace

ChshResult chsh_s(const CountTable& table) {
  for (const auto& row : table.counts)
    for (auto c : row)
      if (c < 0) throw ValidationError("CHSH: negative count");
  return combine(
      table.row_angles, table.column_angles,
      [&](int r, int c) { return static_cast<double>(table.counts[r][c]); }, true);
}

double polarization_probability(const DensityMatrix& rho, double angle_a, double angle_b) {
  if (rho.n_qubits() != 2) throw ValidationError("polarization analysis needs a two-qubit state");
  const double a = angle_a * std::numbers::pi / 180.0, b = angle_b * std::numbers::pi / 180.0;
  const Eigen::Vector2cd va(std::cos(a), std::sin(a)), vb(std::cos(b), std::sin(b));
  ComplexVector ab(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) ab(2 * i + j) = va(i) * vb(j);
  return std::clamp((ab.adjoint() * rho.matrix() * ab)(0, 0).real(), 0.0, 1.0);
}

ChshResult chsh_s_exact(const DensityMatrix& rho) {
  return combine(
      kChshRowAngles, kChshColumnAngles,
      [&](int r, int c) { return polarization_probability(rho, kChshRowAngles[r], kChshColumnAngles[c]); },
      false);
}

CountTable simulate_polarization_counts(const DensityMatrix& rho, const std::array<double, 4>& row_angles,
                                        const std::array<double, 4>& column_angles,
                                        std::int64_t counts_per_setting, RngStream& rng) {
  if (counts_per_setting < 0) throw ValidationError("counts per setting must be nonnegative");
  CountTable table{row_angles, column_angles, {}};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      std::binomial_distribution<std::int64_t> draw(counts_per_setting,
                                                    polarization_probability(rho, row_angles[r], column_angles[c]));
      table.counts[r][c] = draw(rng);
    }
  return table;
}

}  // namespace qsv
