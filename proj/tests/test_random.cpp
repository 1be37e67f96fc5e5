#include <doctest.h>

#include <cmath>
#include <set>

#include "qsv/random.hpp"

using namespace qsv;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  // Reference vectors published with Random123.
  constexpr auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(zero == Philox4x32::Counter{0x6627e8d5U, 0xe169c58dU, 0xbc57ac4cU, 0x9b00dbd8U});
  constexpr auto ones = Philox4x32::block({0xffffffffU, 0xffffffffU, 0xffffffffU, 0xffffffffU},
                                          {0xffffffffU, 0xffffffffU});
  CHECK(ones == Philox4x32::Counter{0x408f276dU, 0x41c83b0eU, 0xa20bc7c6U, 0x6d5451fdU});
  constexpr auto pi = Philox4x32::block({0x243f6a88U, 0x85a308d3U, 0x13198a2eU, 0x03707344U},
                                        {0xa4093822U, 0x299f31d0U});
  CHECK(pi == Philox4x32::Counter{0xd16cfe09U, 0x94fdccebU, 0x5001e420U, 0x24126ea1U});
}

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(stream_id(7, 1, 2)), b(stream_id(7, 1, 2)), c(stream_id(7, 2, 1));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    CHECK(x != z);
    seen.insert(x);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("uniform draws stay in [0, 1) and have the right mean") {
  RngStream rng(11);
  double sum = 0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
}
