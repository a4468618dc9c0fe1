#include "mvsde/random.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>

using namespace mvsde;

TEST_CASE("philox4x64-10 known answers")
{
  {
    const auto out = philox4x64({ 0, 0, 0, 0 }, { 0, 0 });
    CHECK(out[0] == 0x16554d9eca36314cULL);
    CHECK(out[1] == 0xdb20fe9d672d0fdcULL);
    CHECK(out[2] == 0xd7e772cee186176bULL);
    CHECK(out[3] == 0x7e68b68aec7ba23bULL);
  }
  {
    const std::uint64_t f = ~std::uint64_t{ 0 };
    const auto out = philox4x64({ f, f, f, f }, { f, f });
    CHECK(out[0] == 0x87b092c3013fe90bULL);
    CHECK(out[1] == 0x438c3c67be8d0224ULL);
    CHECK(out[2] == 0x9cc7d7c69cd777b6ULL);
    CHECK(out[3] == 0xa09caebf594f0ba0ULL);
  }
}

TEST_CASE("to_open_unit stays inside (0, 1)")
{
  CHECK(to_open_unit(0) > 0.0);
  CHECK(to_open_unit(~std::uint64_t{ 0 }) < 1.0);
}

TEST_CASE("draws are pure functions of their counters")
{
  const CounterRng a(7, 3), b(7, 3), c(7, 4);
  CHECK(a.normal(DrawPurpose::brownian_increment, 5, 9) == b.normal(DrawPurpose::brownian_increment, 5, 9));
  CHECK(a.normal(DrawPurpose::brownian_increment, 5, 9) != c.normal(DrawPurpose::brownian_increment, 5, 9));
  CHECK(a.normal(DrawPurpose::brownian_increment, 5, 9) != a.normal(DrawPurpose::initial_condition, 5, 9));
  CHECK(a.uniform(DrawPurpose::oracle_sample, 0, 1) != a.uniform(DrawPurpose::oracle_sample, 0, 2));
}

TEST_CASE("normal draws have unit variance")
{
  const CounterRng rng(1, 0);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(DrawPurpose::brownian_increment, 0, static_cast<std::uint64_t>(i));
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(s4 / n - 3.0) < 0.1);
}

TEST_CASE("uniform draws are uniform")
{
  const CounterRng rng(2, 0);
  const int n = 100000;
  int below = 0;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(DrawPurpose::oracle_sample, 0, static_cast<std::uint64_t>(i));
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    mean += u;
    below += u < 0.25;
  }
  CHECK(std::abs(mean / n - 0.5) < 0.005);
  CHECK(std::abs(below / double(n) - 0.25) < 0.005);
}

TEST_CASE("mix_seed separates neighbouring inputs")
{
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b)
      seen.insert(mix_seed(a, b));
  CHECK(seen.size() == 400);
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
}
