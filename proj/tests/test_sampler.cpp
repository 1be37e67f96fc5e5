#include <doctest.h>

#include <cmath>
#include <sstream>
#include <tuple>

#include "oracles.hpp"
#include "qsv/noise.hpp"
#include "qsv/parallel.hpp"
#include "qsv/sampler.hpp"

using namespace qsv;

namespace {

bool within_sigma(double f, double p, double n, double k = 5) {
  return std::abs(f - p) <= k * oracle::binomial_sd(p, n) + 1e-12;
}

}  // namespace

TEST_CASE("exact target always passes at both levels") {
  const auto hom = build_omega_hom_w3();
  const auto src = constant_source(DensityMatrix(hom.target()));
  const auto op = run_operator_level(hom, src, 100000, 1);
  CHECK(op.t == op.n);
  CHECK(op.f == 1.0);
  const auto circ = run_circuit_level(hom, src, 100000, 2);
  CHECK(circ.t == circ.n);
  const auto w5 = build_omega_adaptive_wn(5);
  CHECK(run_circuit_level(w5, constant_source(DensityMatrix(w5.target())), 2000, 3).t == 2000);
  const auto opt = build_omega_opt_2q(0.4);
  CHECK(run_circuit_level(opt, constant_source(DensityMatrix(opt.target())), 2000, 4).t == 2000);
}

TEST_CASE("worst-case state passes at rate 1 - epsilon nu") {
  const auto hom = build_omega_hom_w3();
  const auto s = run_operator_level(hom, constant_source(worst_case_state(hom, 0.1)), 100000, 5);
  CHECK(within_sigma(s.f, 0.95, 1e5));
}

TEST_CASE("maximally mixed source passes at Tr(Omega)/8") {
  const auto hom = build_omega_hom_w3();
  // One eigenvalue 1 and seven equal to 1 - nu.
  const double expected = (1 + 7 * (1 - hom.nu())) / 8;
  const auto src = constant_source(DensityMatrix::maximally_mixed(3));
  CHECK(within_sigma(run_operator_level(hom, src, 100000, 6).f, expected, 1e5));
  CHECK(within_sigma(run_circuit_level(hom, src, 100000, 7).f, expected, 1e5));
}

TEST_CASE("first-stage Z on qubit 1 of W3 reads + two thirds of the time") {
  const auto hom = build_omega_hom_w3();
  std::vector<TestRecord> records;
  run_circuit_level(hom, constant_source(DensityMatrix(hom.target())), 60000, 8, &records);
  int total = 0, plus = 0;
  for (const auto& r : records) {
    const auto& setting = *std::find_if(hom.settings().begin(), hom.settings().end(),
                                        [&](const auto& s) { return s.label == r.setting; });
    if (setting.first_stage_qubits != std::vector<int>{0}) continue;
    REQUIRE(r.first_stage_outcome.has_value());
    ++total;
    plus += *r.first_stage_outcome == 0;
  }
  REQUIRE(total > 10000);
  CHECK(within_sigma(double(plus) / total, 2.0 / 3.0, total));
}

TEST_CASE("operator and circuit levels agree on noisy sources") {
  const std::vector<VerificationStrategy> strategies{build_omega_hom_w3(), build_omega_adaptive_wn(3),
                                                     build_omega_opt_2q(std::numbers::pi / 5)};
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    const auto& s = strategies[k];
    const DensityMatrix target(s.target());
    const DensityMatrix sigma = apply_noise(
        target, std::vector<NoiseModel>{noise::Depolarizing{0.1}, noise::AmplitudeDamping{0.15},
                                        noise::CoherentRotation{-1, 'X', 0.2}});
    const double p = pass_probability(s, sigma.matrix());
    const auto a = run_operator_level(s, constant_source(sigma), 40000, 100 + k);
    const auto b = run_circuit_level(s, constant_source(sigma), 40000, 200 + k);
    const double combined = std::sqrt(2.0) * oracle::binomial_sd(p, 40000);
    CHECK(std::abs(a.f - b.f) <= 5 * combined);
    CHECK(within_sigma(b.f, p, 40000));
  }
}

TEST_CASE("single setting circuit pass rate matches Tr(Omega_l sigma)") {
  const auto hom = build_omega_hom_w3();
  const DensityMatrix sigma(oracle::random_density(8, 21));
  for (std::size_t l = 0; l < hom.settings().size(); ++l) {
    const auto& setting = hom.settings()[l];
    const double p = pass_probability(setting, sigma.matrix());
    int passes = 0;
    constexpr int draws = 20000;
    for (int i = 0; i < draws; ++i) {
      RngStream rng(stream_id(55, l, i));
      passes += run_setting_circuit(setting, sigma, rng);
    }
    CHECK(within_sigma(passes / double(draws), p, draws));
  }
}

TEST_CASE("runs are reproducible from the master seed") {
  const auto hom = build_omega_hom_w3();
  const auto src = constant_source(apply_noise(DensityMatrix(hom.target()), noise::Depolarizing{0.3}));
  std::vector<TestRecord> a, b, c;
  run_circuit_level(hom, src, 500, 42, &a);
  run_circuit_level(hom, src, 500, 42, &b);
  run_circuit_level(hom, src, 500, 43, &c);
  REQUIRE(a.size() == b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].trial == i);
    CHECK(a[i].setting == b[i].setting);
    CHECK(a[i].passed == b[i].passed);
    CHECK(a[i].stream == b[i].stream);
    differs = differs || a[i].setting != c[i].setting || a[i].passed != c[i].passed;
  }
  CHECK(differs);
}

TEST_CASE("trial outcomes do not depend on run length") {
  // Copy i always uses stream (seed, i), so a prefix of a longer run is the
  // shorter run.
  const auto hom = build_omega_hom_w3();
  const auto src = constant_source(DensityMatrix::maximally_mixed(3));
  std::vector<TestRecord> short_run, long_run;
  run_operator_level(hom, src, 100, 9, &short_run);
  run_operator_level(hom, src, 300, 9, &long_run);
  for (std::size_t i = 0; i < short_run.size(); ++i) CHECK(short_run[i].passed == long_run[i].passed);
  TestRunSummary merged{0, 0, 0.0, "x", 9};
  merged += TestRunSummary{100, 40, 0.4, "x", 9};
  merged += TestRunSummary{300, 100, 1.0 / 3, "x", 9};
  CHECK(merged.n == 400);
  CHECK(merged.t == 140);
  CHECK(merged.f == 0.35);
}

TEST_CASE("source failures report the trial index") {
  const auto hom = build_omega_hom_w3();
  const StateSource bad = [](std::uint64_t trial) {
    if (trial == 7) return DensityMatrix(ComplexMatrix::Identity(8, 8));
    return DensityMatrix::maximally_mixed(3);
  };
  try {
    run_operator_level(hom, bad, 20, 1);
    FAIL("expected an exception");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("trial 7") != std::string::npos);
  }
  CHECK_THROWS_AS(run_operator_level(hom, constant_source(DensityMatrix::maximally_mixed(2)), 5, 1),
                  ValidationError);
  CHECK_THROWS_AS(run_operator_level(hom, constant_source(DensityMatrix::maximally_mixed(3)), 0, 1),
                  ValidationError);
}

TEST_CASE("scaling sweep") {
  const auto hom = build_omega_hom_w3();
  const auto ideal = run_scaling_sweep(hom, constant_source(DensityMatrix(hom.target())), {20, 50, 100}, 5, 3);
  REQUIRE(ideal.size() == 3);
  for (const auto& p : ideal) {
    CHECK(p.mean_f == 1.0);
    CHECK(p.f.size() == 5);
  }
  const double p_pass = 1 - hom.nu() * 0.03;
  const auto noisy = run_scaling_sweep(hom, constant_source(apply_noise(DensityMatrix(hom.target()),
                                                                        noise::Depolarizing{0.03 * 8 / 7})),
                                       {100}, 100, 4);
  double mean = 0, var = 0;
  for (double f : noisy[0].f) mean += f / 100;
  for (double f : noisy[0].f) var += (f - mean) * (f - mean) / 99;
  const double binomial = oracle::binomial_sd(p_pass, 100);
  CHECK(std::sqrt(var) <= 3 * binomial);
  CHECK(std::sqrt(var) >= binomial / 3);
  CHECK(std::abs(mean - p_pass) < 5 * binomial / 10);
  CHECK_THROWS_AS(run_scaling_sweep(hom, constant_source(DensityMatrix(hom.target())), {50, 20}, 1, 1),
                  ValidationError);
}

TEST_CASE("records round-trip through CSV") {
  const auto hom = build_omega_hom_w3();
  std::vector<TestRecord> records;
  run_circuit_level(hom, constant_source(DensityMatrix::maximally_mixed(3)), 50, 11, &records);
  std::stringstream buffer;
  write_records_csv(buffer, records);
  CHECK(buffer.str().rfind("trial,setting,passed\n", 0) == 0);
  const auto back = read_records_csv(buffer);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].trial == records[i].trial);
    CHECK(back[i].setting == records[i].setting);
    CHECK(back[i].passed == records[i].passed);
  }
  std::stringstream bad("trial,setting,passed\n3,XX,maybe\n");
  CHECK_THROWS_AS(read_records_csv(bad), ValidationError);
}

TEST_CASE("results do not depend on the worker count") {
  const auto hom = build_omega_hom_w3();
  const DensityMatrix sigma = apply_noise(DensityMatrix(hom.target()), noise::Depolarizing{0.2});
  const auto run_all = [&] {
    std::vector<TestRecord> records;
    const auto s = run_circuit_level(hom, constant_source(sigma), 20000, 31, &records);
    const auto sweep = run_scaling_sweep(hom, constant_source(sigma), {10, 100}, 9, 32);
    return std::tuple(s.t, records.size(), records.back().setting, sweep[1].f);
  };
  set_worker_count(1);
  const auto serial = run_all();
  set_worker_count(4);
  const auto threaded = run_all();
  set_worker_count(0);
  CHECK(serial == threaded);
}

TEST_CASE("the lowest failing trial is reported from parallel blocks") {
  const auto hom = build_omega_hom_w3();
  const DensityMatrix w3(hom.target());
  const StateSource flaky = [&](std::uint64_t trial) -> DensityMatrix {
    if (trial == 5000 || trial == 17000) throw std::runtime_error("detector glitch");
    return w3;
  };
  set_worker_count(4);
  try {
    run_operator_level(hom, flaky, 20000, 1);
    FAIL("expected a source failure");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("trial 5000") != std::string::npos);
  }
  set_worker_count(0);
}
