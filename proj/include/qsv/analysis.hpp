#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qsv/random.hpp"
#include "qsv/states.hpp"

namespace qsv {

/// Binary relative entropy D(x || y) in nats, with 0 ln 0 = 0.
double kl_divergence(double x, double y);

/// Chernoff-Hoeffding significance exp(-N D(f || 1 - epsilon nu)) for
/// rejecting "infidelity >= epsilon". Empty when f <= 1 - epsilon nu, where
/// no rejection is possible. Throws ValidationError on out-of-range input.
std::optional<double> significance(double f, std::int64_t n, double epsilon, double nu);

struct HypothesisResult {
  double epsilon = 0.0;  // certified infidelity bound
  double delta = 0.0;    // significance achieved at `epsilon`
  double f = 0.0;
  std::int64_t n = 0;
  double nu = 0.0;
};

/// Smallest epsilon whose significance is <= delta_target, by bisection on
/// (1e-12, min(1/nu, 1) - 1e-12). Empty when no epsilon in range qualifies.
std::optional<HypothesisResult> certified_epsilon(double f, std::int64_t n, double nu, double delta_target);

struct FidelityEstimate {
  /// Linear inversion (f - (1 - nu)) / nu; only for homogeneous strategies.
  std::optional<double> point;
  double std = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool homogeneous = true;
  /// Point estimate or bounds outside [0, 1]: the data contradict the model.
  bool out_of_range = false;
};

/// Homogeneous: point = (f - (1 - nu))/nu, std = sqrt(f(1 - f)/N)/nu and the
/// bounds collapse onto the point. Otherwise lower = 1 - 2(1 - f)/(1 - nu),
/// upper = (f - (1 - nu))/nu and no point estimate.
FidelityEstimate estimate_fidelity(double f, std::int64_t n, double nu, bool homogeneous);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // sum of squared residuals
};

/// Least squares of ln N against ln epsilon over (N, epsilon) pairs.
ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> points);

/// Coincidence counts: rows are analyzer angles of photon A, columns of
/// photon B, in degrees.
struct CountTable {
  std::array<double, 4> row_angles{};
  std::array<double, 4> column_angles{};
  std::array<std::array<std::int64_t, 4>, 4> counts{};
};

/// Analyzer angles of the standard layout.
inline constexpr std::array<double, 4> kChshRowAngles{0.0, 45.0, 90.0, 135.0};
inline constexpr std::array<double, 4> kChshColumnAngles{22.5, 67.5, 112.5, 157.5};

struct ChshResult {
  double s = 0.0;
  double standard_error = 0.0;
  /// E(0,22.5), E(0,67.5), E(45,22.5), E(45,67.5).
  std::array<double, 4> correlators{};
};

/// S = -E(0,22.5) + E(0,67.5) + E(45,22.5) + E(45,67.5) with
/// E(a,b) = [C(a,b) + C(a+90,b+90) - C(a,b+90) - C(a+90,b)] / sum. The error
/// treats every cell as an independent Poisson count.
ChshResult chsh_s(const CountTable& table);

/// Same combination evaluated on exact joint probabilities (no error).
ChshResult chsh_s_exact(const DensityMatrix& rho);

/// Probability that both analyzers transmit: |<a|<b| psi>|^2 with
/// |a> = cos a |H> + sin a |V>, H = |0>, V = |1>. Angles in degrees.
double polarization_probability(const DensityMatrix& rho, double angle_a, double angle_b);

/// Every cell drawn Binomial(counts_per_setting, p(a, b)).
CountTable simulate_polarization_counts(const DensityMatrix& rho, const std::array<double, 4>& row_angles,
                                        const std::array<double, 4>& column_angles,
                                        std::int64_t counts_per_setting, RngStream& rng);

}  // namespace qsv
