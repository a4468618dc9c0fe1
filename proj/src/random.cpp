#include "mvsde/random.hpp"

#include <cmath>
#include <numbers>

namespace mvsde {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void
mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo)
{
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

} // namespace

std::array<std::uint64_t, 4>
philox4x64(std::array<std::uint64_t, 4> c, std::array<std::uint64_t, 2> k)
{
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = { hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0 };
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::array<std::uint64_t, 4>
CounterRng::block(DrawPurpose purpose, std::uint64_t a, std::uint64_t b) const
{
  return philox4x64({ b, a, stream_, static_cast<std::uint64_t>(purpose) }, { seed_, 0x6d76736465ULL });
}

double
CounterRng::normal(DrawPurpose purpose, std::uint64_t a, std::uint64_t b) const
{
  const auto r = block(purpose, a, b);
  // Box-Muller, cosine branch.
  const double u1 = to_open_unit(r[0]);
  const double u2 = to_open_unit(r[1]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double
CounterRng::uniform(DrawPurpose purpose, std::uint64_t a, std::uint64_t b) const
{
  return to_open_unit(block(purpose, a, b)[0]);
}

std::uint64_t
mix_seed(std::uint64_t a, std::uint64_t b)
{
  std::uint64_t z = a + kWeyl0 * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace mvsde
