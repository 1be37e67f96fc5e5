#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qsv/analysis.hpp"
#include "qsv/noise.hpp"
#include "qsv/sampler.hpp"

using namespace qsv;

namespace {

CountTable bell_counts() {
  return {kChshRowAngles,
          kChshColumnAngles,
          {{{21164, 119638, 117702, 18910},
            {116151, 114421, 20071, 21873},
            {115494, 19061, 20620, 114872},
            {19036, 21698, 116486, 113688}}}};
}

}  // namespace

TEST_CASE("KL divergence") {
  CHECK(kl_divergence(0.3, 0.3) == 0.0);
  CHECK(kl_divergence(1.0, 0.95) == doctest::Approx(std::log(1 / 0.95)).epsilon(1e-15));
  CHECK(kl_divergence(0.99, 0.95) == doctest::Approx(oracle::kl_divergence(0.99, 0.95)));
  CHECK(kl_divergence(0.0, 0.2) == doctest::Approx(std::log(1 / 0.8)));
}

TEST_CASE("significance") {
  CHECK(*significance(1.0, 59, 0.1, 0.5) == doctest::Approx(std::pow(0.95, 59)).epsilon(1e-14));
  CHECK(*significance(1.0, 59, 0.1, 0.5) == doctest::Approx(0.0485).epsilon(1e-3));
  CHECK_FALSE(significance(0.95, 59, 0.1, 0.5).has_value());
  CHECK_FALSE(significance(0.9, 59, 0.1, 0.5).has_value());
  CHECK(*significance(0.99, 1000, 0.1, 0.5) ==
        doctest::Approx(std::exp(-oracle::kl_divergence(0.99, 0.95) * 1000)).epsilon(1e-12));
  // At f = 1 the bound reduces to (1 - epsilon nu)^N.
  for (std::int64_t n : {1, 10, 1000})
    CHECK(*significance(1.0, n, 0.2, 0.4) == std::pow(1 - 0.2 * 0.4, static_cast<double>(n)));
  // Strictly decreasing in N.
  double previous = 1.0;
  for (std::int64_t n = 1; n < 2000; n += 37) {
    const double d = *significance(0.97, n, 0.1, 0.5);
    CHECK(d < previous);
    previous = d;
  }
  CHECK_THROWS_AS(significance(1.2, 10, 0.1, 0.5), ValidationError);
  CHECK_THROWS_AS(significance(1.0, 0, 0.1, 0.5), ValidationError);
  CHECK_THROWS_AS(significance(1.0, 10, 0.1, 0.0), ValidationError);
}

TEST_CASE("certified epsilon inverts the all-pass closed form") {
  const auto r = certified_epsilon(1.0, 59, 0.5, 0.05);
  REQUIRE(r.has_value());
  CHECK(r->epsilon == doctest::Approx(0.0999).epsilon(1e-3));
  CHECK(r->epsilon <= 0.1);
  CHECK(r->delta <= 0.05);
  for (std::int64_t n : {10, 59, 100, 1000, 100000})
    for (double nu : {0.25, 1.0 / 3, 0.5}) {
      CAPTURE(n);
      const double closed = (1 - std::pow(0.05, 1.0 / n)) / nu;
      const auto c = certified_epsilon(1.0, n, nu, 0.05);
      if (closed < std::min(1.0 / nu, 1.0)) {
        REQUIRE(c.has_value());
        CHECK(std::abs(c->epsilon - closed) < 1e-9);
      }
    }
}

TEST_CASE("certified epsilon is monotone in N and matches a grid scan") {
  double previous = 1.0;
  for (std::int64_t n : {20, 50, 100, 500, 1000, 10000}) {
    const auto c = certified_epsilon(1.0, n, 0.5, 0.05);
    REQUIRE(c.has_value());
    CHECK(c->epsilon < previous);
    previous = c->epsilon;
  }
  const auto c = certified_epsilon(0.985, 10000, 0.5, 0.05);
  REQUIRE(c.has_value());
  // Dense scan at resolution 1e-6 for the first epsilon meeting the target.
  double scan = -1;
  for (int k = 1; k < 1000000; ++k) {
    const double eps = k * 1e-6;
    const double y = 1 - eps * 0.5;
    if (0.985 <= y) continue;
    if (std::exp(-oracle::kl_divergence(0.985, y) * 10000) <= 0.05) {
      scan = eps;
      break;
    }
  }
  CHECK(std::abs(c->epsilon - scan) <= 1e-6);
  CHECK_FALSE(certified_epsilon(0.4, 100, 0.5, 0.05).has_value());
}

TEST_CASE("fidelity estimate examples") {
  const auto e = estimate_fidelity(0.98535, 10000, 0.5, true);
  REQUIRE(e.point.has_value());
  CHECK(*e.point == doctest::Approx(0.9707).epsilon(1e-12));
  CHECK(e.std == doctest::Approx(0.00240).epsilon(5e-3));
  CHECK(e.lower <= *e.point);
  CHECK(*e.point <= e.upper);
  const auto perfect = estimate_fidelity(1.0, 100, 0.5, true);
  CHECK(*perfect.point == 1.0);
  CHECK(perfect.std == 0.0);
  const auto nh = estimate_fidelity(0.99, 1000, 0.4, false);
  CHECK_FALSE(nh.point.has_value());
  CHECK(nh.lower == doctest::Approx(1 - 2 * 0.01 / 0.6));
  CHECK(nh.upper == doctest::Approx(0.975));
  CHECK(nh.lower <= nh.upper);
  CHECK(estimate_fidelity(0.3, 100, 0.5, true).out_of_range);
}

TEST_CASE("homogeneous std never exceeds 1/(2 nu sqrt N)") {
  for (double nu : {0.25, 0.5, 1.0})
    for (std::int64_t n : {1, 10, 10000})
      for (int k = 0; k <= 100; ++k) {
        const auto e = estimate_fidelity(k / 100.0, n, nu, true);
        CHECK(e.std <= 1 / (2 * nu * std::sqrt(double(n))) + 1e-15);
      }
}

TEST_CASE("fidelity estimate is unbiased") {
  const auto hom = build_omega_hom_w3();
  const DensityMatrix sigma = apply_noise(DensityMatrix(hom.target()), noise::Depolarizing{0.08});
  const auto& w = hom.target().amplitudes();
  const double f0 = (w.adjoint() * sigma.matrix() * w)(0, 0).real();
  constexpr int runs = 200;
  constexpr std::int64_t n = 2000;
  double mean = 0, std = 0;
  for (int r = 0; r < runs; ++r) {
    const auto s = run_operator_level(hom, constant_source(sigma), n, stream_id(17, r));
    const auto e = estimate_fidelity(s.f, n, hom.nu(), true);
    mean += *e.point / runs;
    std += e.std / runs;
  }
  CHECK(std::abs(mean - f0) < 3 * std / std::sqrt(double(runs)));
}

TEST_CASE("scaling fit") {
  std::vector<std::pair<double, double>> exact;
  for (double n : {10.0, 100.0, 1000.0, 1e4}) exact.push_back({n, 0.3 / n});
  const auto fit = fit_scaling_exponent(exact);
  CHECK(std::abs(fit.slope + 1) < 1e-12);
  CHECK(fit.residual < 1e-20);
  std::vector<std::pair<double, double>> ideal;
  for (double n = 100; n <= 1e5; n *= 2) ideal.push_back({n, certified_epsilon(1.0, std::int64_t(n), 0.5, 0.05)->epsilon});
  CHECK(std::abs(fit_scaling_exponent(ideal).slope + 1) < 0.05);
  CHECK_THROWS_AS(fit_scaling_exponent(std::span(exact).first(2)), ValidationError);
  exact[0].second = -1;
  CHECK_THROWS_AS(fit_scaling_exponent(exact), ValidationError);
}

TEST_CASE("CHSH value of the two-photon count table") {
  const auto r = chsh_s(bell_counts());
  CHECK(r.s == doctest::Approx(2.8088).epsilon(2e-5));
  // Independent evaluation of the same combination by hand.
  const auto& c = bell_counts().counts;
  auto e = [](double pp, double qq, double pq, double qp) { return (pp + qq - pq - qp) / (pp + qq + pq + qp); };
  const double by_hand = -e(c[0][0], c[2][2], c[0][2], c[2][0]) + e(c[0][1], c[2][3], c[0][3], c[2][1]) +
                         e(c[1][0], c[3][2], c[1][2], c[3][0]) + e(c[1][1], c[3][3], c[1][3], c[3][1]);
  CHECK(r.s == doctest::Approx(by_hand).epsilon(1e-14));
  CHECK(r.standard_error > 0.001);
  CHECK(r.standard_error < 0.01);
}

TEST_CASE("CHSH is invariant under rescaling the counts") {
  auto table = bell_counts();
  const auto base = chsh_s(table);
  for (auto& row : table.counts)
    for (auto& cell : row) cell *= 7;
  CHECK(chsh_s(table).s == doctest::Approx(base.s).epsilon(1e-14));
  CHECK(chsh_s(table).standard_error == doctest::Approx(base.standard_error / std::sqrt(7.0)));
}

TEST_CASE("CHSH validation") {
  auto table = bell_counts();
  table.counts[1][2] = -1;
  CHECK_THROWS_AS(chsh_s(table), ValidationError);
  table = bell_counts();
  table.column_angles[3] = 150.0;
  CHECK_THROWS_AS(chsh_s(table), ValidationError);
  // Angles given modulo 180 are accepted.
  table = bell_counts();
  table.row_angles[2] = 270.0;
  CHECK(chsh_s(table).s == doctest::Approx(chsh_s(bell_counts()).s));
}

TEST_CASE("CHSH on exact states") {
  const DensityMatrix bell(make_w_state(2));
  CHECK(chsh_s_exact(bell).s == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-12));
  // Product |01>: correlators evaluated directly from the analyzer overlaps.
  const DensityMatrix product(make_basis_state(2, 1));
  double direct = 0;
  const double signs[] = {-1, 1, 1, 1};
  const double as[] = {0, 0, 45, 45}, bs[] = {22.5, 67.5, 22.5, 67.5};
  for (int k = 0; k < 4; ++k) {
    auto p = [](double a, double b) {
      const double ra = a * std::numbers::pi / 180, rb = b * std::numbers::pi / 180;
      return std::pow(std::cos(ra) * std::sin(rb), 2);  // |<a|0>|^2 |<b|1>|^2
    };
    const double a = as[k], b = bs[k];
    const double pp = p(a, b), qq = p(a + 90, b + 90), pq = p(a, b + 90), qp = p(a + 90, b);
    direct += signs[k] * (pp + qq - pq - qp) / (pp + qq + pq + qp);
  }
  const double s = chsh_s_exact(product).s;
  CHECK(s == doctest::Approx(direct).epsilon(1e-12));
  CHECK(std::abs(s) <= 2.0);
  CHECK(polarization_probability(product, 0, 90) == doctest::Approx(1.0));
}

TEST_CASE("simulated polarization counts") {
  RngStream rng(stream_id(5, 1));
  const DensityMatrix bell(make_w_state(2));
  const auto table = simulate_polarization_counts(bell, kChshRowAngles, kChshColumnAngles, 270000, rng);
  const auto r = chsh_s(table);
  CHECK(std::abs(r.s - 2 * std::sqrt(2.0)) < 5 * r.standard_error);
  const auto mixed = chsh_s(simulate_polarization_counts(DensityMatrix::maximally_mixed(2), kChshRowAngles,
                                                         kChshColumnAngles, 270000, rng));
  CHECK(std::abs(mixed.s) < 5 * mixed.standard_error);
  const std::array<double, 4> rows{0, 0, 0, 0}, cols{90, 90, 90, 90};
  const auto aligned = simulate_polarization_counts(DensityMatrix(make_basis_state(2, 1)), rows, cols, 1000, rng);
  CHECK(aligned.counts[0][0] == 1000);
}
