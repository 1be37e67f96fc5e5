#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qsv/noise.hpp"
#include "qsv/linalg.hpp"
#include "qsv/parallel.hpp"
#include "qsv/tomography.hpp"

using namespace qsv;

namespace {

// Local Clifford with C X C^H = Y, C Y C^H = Z, C Z C^H = X.
ComplexMatrix cycle_axes() {
  const Complex i(0, 1);
  Matrix2c c;
  c << 1, -i, 1, i;
  return c / std::sqrt(2.0);
}

std::string relabel(std::string s) {
  for (char& ch : s) ch = ch == 'X' ? 'Y' : ch == 'Y' ? 'Z' : 'X';
  return s;
}

}  // namespace

TEST_CASE("setting list and eigenbases") {
  const auto labels = pauli_settings(3);
  CHECK(labels.size() == 27);
  CHECK(labels.front() == "XXX");
  CHECK(labels.back() == "ZZZ");
  for (const auto& l : {std::string("XY"), std::string("ZX"), std::string("YY")}) {
    const ComplexMatrix u = setting_eigenbasis(l);
    CHECK((u.adjoint() * u - ComplexMatrix::Identity(4, 4)).norm() < 1e-14);
    // Column k is an eigenvector of the Pauli string with sign (-1)^popcount(k).
    const ComplexMatrix p = pauli_string(l);
    for (int k = 0; k < 4; ++k) {
      const double sign = __builtin_popcount(k) % 2 ? -1.0 : 1.0;
      CHECK((p * u.col(k) - sign * u.col(k)).norm() < 1e-14);
    }
  }
  CHECK_THROWS_AS(setting_eigenbasis("XQ"), ValidationError);
  const auto shots = split_budget(100, 27);
  CHECK(shots[0] == 4);
  CHECK(shots[18] == 4);
  CHECK(shots[19] == 3);
}

TEST_CASE("single-qubit |0> in Z always reads 0") {
  RngStream rng(1);
  const auto data = simulate_tomography_data(DensityMatrix(make_basis_state(1, 0)), 500, rng);
  REQUIRE(data.size() == 3);
  CHECK(data[2].label == "Z");
  CHECK(data[2].counts[0] == 500);
  CHECK(data[2].counts[1] == 0);
}

TEST_CASE("W3 in ZZZ only shows single excitations") {
  RngStream rng(2);
  const auto data = simulate_tomography_data(DensityMatrix(make_w_state(3)), 3000, rng);
  const auto& zzz = data.back();
  REQUIRE(zzz.label == "ZZZ");
  for (int k = 0; k < 8; ++k) {
    const bool single = k == 1 || k == 2 || k == 4;
    if (!single) CHECK(zzz.counts[k] == 0);
  }
  CHECK(zzz.shots() == 3000);
}

TEST_CASE("sampled frequencies match Born probabilities") {
  const DensityMatrix rho(oracle::random_density(4, 31));
  RngStream rng(3);
  const auto data = simulate_tomography_data(rho, 100000, rng);
  for (const auto& d : data) {
    const ComplexMatrix u = setting_eigenbasis(d.label);
    for (int k = 0; k < 4; ++k) {
      const ComplexVector e = u.col(k);
      const double p = (e.adjoint() * rho.matrix() * e)(0, 0).real();
      CHECK(std::abs(d.counts[k] / 1e5 - p) <= 5 * oracle::binomial_sd(p, 1e5) + 1e-12);
    }
  }
}

TEST_CASE("exact probabilities recover W3") {
  const auto w3 = make_w_state(3);
  const auto result = reconstruct_mle(exact_weights(DensityMatrix(w3), pauli_settings(3)), &w3);
  CHECK(result.fidelity >= 1 - 1e-6);
}

TEST_CASE("exact probabilities recover full-rank states") {
  for (int n : {2, 3}) {
    const DensityMatrix rho(oracle::random_density(Eigen::Index{1} << n, 40 + n));
    const auto result = reconstruct_mle(exact_weights(rho, pauli_settings(n)));
    CHECK(trace_distance(result.state, rho) < 1e-5);
  }
}

TEST_CASE("likelihood never decreases and the trace stays one") {
  const DensityMatrix rho = apply_noise(DensityMatrix(make_w_state(3)), noise::Depolarizing{0.1});
  RngStream rng(4);
  const auto data = simulate_tomography_data(rho, 500, rng);
  double previous = -1e300, worst_trace = 0;
  bool monotone = true;
  MleOptions options;
  options.observer = [&](int, const ComplexMatrix& r, double ll) {
    monotone = monotone && ll >= previous;
    previous = ll;
    worst_trace = std::max(worst_trace, std::abs(r.trace().real() - 1));
  };
  const auto result = reconstruct_mle(data, nullptr, options);
  CHECK(monotone);
  CHECK(worst_trace < 1e-10);
  CHECK(result.iterations > 1);
  CHECK(result.state.min_eigenvalue() > -1e-9);
  CHECK(result.total_samples == 27 * 500);
}

TEST_CASE("depolarized W3 at 10^4 shots per setting") {
  const auto w3 = make_w_state(3);
  const DensityMatrix rho = apply_noise(DensityMatrix(w3), noise::Depolarizing{0.1});
  const double truth = (w3.amplitudes().adjoint() * rho.matrix() * w3.amplitudes())(0, 0).real();
  RngStream rng(5);
  const auto result = reconstruct_mle(simulate_tomography_data(rho, 10000, rng), &w3);
  CHECK(std::abs(result.fidelity - truth) < 0.01);
}

TEST_CASE("reconstruction is covariant under relabelling the Pauli axes") {
  const DensityMatrix rho(oracle::random_density(4, 77));
  RngStream rng(6);
  const auto data = simulate_tomography_data(rho, 2000, rng);
  auto moved = data;
  for (auto& d : moved) d.label = relabel(d.label);
  const ComplexMatrix c = kron(cycle_axes(), cycle_axes());
  const auto a = reconstruct_mle(data);
  const auto b = reconstruct_mle(moved);
  CHECK((c * a.state.matrix() * c.adjoint() - b.state.matrix()).norm() < 1e-6);
  const PureState psi = make_theta_state(0.6);
  const PureState moved_psi(c * psi.amplitudes());
  CHECK(std::abs(fidelity(a.state, psi) - fidelity(b.state, moved_psi)) < 1e-6);
}

TEST_CASE("incomplete data are rejected with the missing direction") {
  RngStream rng(7);
  auto data = simulate_tomography_data(DensityMatrix(make_w_state(2)), 100, rng);
  data.erase(data.begin() + 1);  // drop XY
  try {
    reconstruct_mle(data);
    FAIL("expected rejection");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("<XY>") != std::string::npos);
  }
  auto zeroed = simulate_tomography_data(DensityMatrix(make_w_state(2)), 100, rng);
  std::fill(zeroed[8].counts.begin(), zeroed[8].counts.end(), 0);  // ZZ never measured
  CHECK_THROWS_AS(reconstruct_mle(zeroed), ValidationError);
}

TEST_CASE("convergence study") {
  const auto bell = make_w_state(2);
  const auto points = fidelity_convergence_study(DensityMatrix(bell), bell, {1000, 10000, 100000}, 8, 9);
  REQUIRE(points.size() == 3);
  CHECK(points[0].fidelities.size() == 8);
  CHECK(points[2].std_fidelity < points[0].std_fidelity);
  CHECK(points[2].mean_fidelity > 0.99);
  CHECK_THROWS_AS(fidelity_convergence_study(DensityMatrix(bell), bell, {1000}, 1, 9), ValidationError);
}

TEST_CASE("datasets round-trip through CSV") {
  RngStream rng(8);
  const auto data = simulate_tomography_data(DensityMatrix(make_w_state(3)), 50, rng);
  std::stringstream buffer;
  write_tomography_csv(buffer, data);
  const auto back = read_tomography_csv(buffer);
  REQUIRE(back.size() == data.size());
  for (std::size_t s = 0; s < data.size(); ++s) {
    CHECK(back[s].label == data[s].label);
    CHECK(back[s].counts == data[s].counts);
  }
  std::stringstream bad("setting,outcome,count\nXX,012,4\n");
  CHECK_THROWS_AS(read_tomography_csv(bad), ValidationError);
  std::stringstream neg("setting,outcome,count\nXX,01,-4\n");
  CHECK_THROWS_AS(read_tomography_csv(neg), ValidationError);
}

TEST_CASE("convergence study does not depend on the worker count") {
  const auto bell = make_w_state(2);
  set_worker_count(1);
  const auto serial = fidelity_convergence_study(DensityMatrix(bell), bell, {500, 5000}, 4, 12);
  set_worker_count(3);
  const auto threaded = fidelity_convergence_study(DensityMatrix(bell), bell, {500, 5000}, 4, 12);
  set_worker_count(0);
  for (std::size_t g = 0; g < 2; ++g) CHECK(serial[g].fidelities == threaded[g].fidelities);
}
