#pragma once

#include <array>
#include <cstdint>

namespace mvsde {

//! Philox4x64-10 counter-based generator (Salmon et al., SC'11).
//!
//! Every draw is a pure function of (key, counter), which is what lets each
//! (seed, stream, step, particle) tuple own its random numbers regardless of
//! how work is split across threads.
std::array<std::uint64_t, 4>
philox4x64(std::array<std::uint64_t, 4> counter, std::array<std::uint64_t, 2> key);

//! Purpose tags kept in the last counter word so that different consumers of
//! the same (seed, stream) never collide.
enum class DrawPurpose : std::uint64_t
{
  initial_condition = 1,
  brownian_increment = 2,
  oracle_sample = 3,
};

//! Independent stream derived from a base seed and a replication index.
class CounterRng
{
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed)
    , stream_(stream)
  {}

  //! Standard normal draw attached to (purpose, index_a, index_b).
  double normal(DrawPurpose purpose, std::uint64_t a, std::uint64_t b) const;
  //! Uniform draw in (0, 1) attached to (purpose, index_a, index_b).
  double uniform(DrawPurpose purpose, std::uint64_t a, std::uint64_t b) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

private:
  std::array<std::uint64_t, 4> block(DrawPurpose purpose, std::uint64_t a, std::uint64_t b) const;

  std::uint64_t seed_;
  std::uint64_t stream_;
};

//! Maps 64 random bits to a double in the open interval (0, 1). Uses 52
//! bits so that the largest value, 1 - 2^-53, is exactly representable.
inline double
to_open_unit(std::uint64_t bits)
{
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

//! Deterministic seed mixing (splitmix64 finalizer) for deriving child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace mvsde
