#pragma once

#include "mvsde/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mvsde {

//! Law of the i.i.d. initial positions.
struct InitialLaw
{
  enum class Kind
  {
    point_mass,
    gaussian
  };
  Kind kind = Kind::gaussian;
  double variance = 1.0; // ignored for point_mass (which sits at 0)
};

struct SimConfig
{
  std::size_t n_particles = 1000;
  double horizon = 10.0;
  double dt = 0.01;
  InitialLaw mu0{};
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
};

//! Throws std::invalid_argument unless N >= 1, dt > 0, T >= 0, dt <= T (for
//! T > 0) and T/dt is integral within rounding.
void validate(const SimConfig& cfg);

//! Number of Euler steps T/dt (validated integral).
std::size_t step_count(const SimConfig& cfg);

struct ParticleEnsemble
{
  std::vector<double> positions;
  double time = 0.0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

//! How the beta' part of the interaction is evaluated in drift_fast.
enum class BetaDriftMode
{
  exact,  //!< pairwise O(N^2) sum
  binned, //!< linear binning onto a uniform grid; approximate
};

struct DriftOptions
{
  BetaDriftMode beta_mode = BetaDriftMode::exact;
  std::size_t bins = 512;
};

//! drift_i = -(1/(2N)) sum_j phi'(x_i - x_j), O(N^2) reference.
std::vector<double> drift_naive(std::span<const double> positions, const DriftSpec& spec);

//! Same quantity through power sums and angle addition: O(N (J1^2 + J)) for
//! the parametric part; beta' falls back to the pairwise loop unless
//! DriftOptions::beta_mode says otherwise.
std::vector<double> drift_fast(std::span<const double> positions,
                               const DriftSpec& spec,
                               const DriftOptions& options = {});

//! One Euler-Maruyama step with caller-supplied standard normal noise.
//! Throws BlowUpError when a position becomes non-finite.
ParticleEnsemble euler_step(ParticleEnsemble ens,
                            const DriftSpec& spec,
                            double dt,
                            std::span<const double> noise,
                            const DriftOptions& options = {});

//! Runs the particle system to time T from i.i.d. mu0 draws. The result is
//! a pure function of (cfg, spec): noise for particle i at step s comes from
//! the counter (seed, stream, s, i).
ParticleEnsemble simulate(const SimConfig& cfg, const DriftSpec& spec, const DriftOptions& options = {});

//! y_i = x_i - mean(x).
std::vector<double> project(std::span<const double> positions);

} // namespace mvsde
