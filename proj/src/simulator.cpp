#include "mvsde/simulator.hpp"

#include "mvsde/error.hpp"
#include "mvsde/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvsde {

namespace {

// Neumaier-compensated mean.
double
stable_mean(std::span<const double> x)
{
  double sum = 0.0;
  double comp = 0.0;
  for (double v : x) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(x.size());
}

double
phi_prime(const DriftSpec& spec, double y)
{
  const auto j1 = static_cast<std::size_t>(spec.j1());
  const auto& a = spec.a();
  double d = 0.0;
  double odd_power = y; // y^{2k-1}
  const double y2 = y * y;
  for (std::size_t k = 1; k <= j1; ++k) {
    d += 2.0 * static_cast<double>(k) * a[k - 1] * odd_power;
    odd_power *= y2;
  }
  for (std::size_t i = 0; i < spec.shape().n_trig(); ++i) {
    const double th = spec.theta()[i];
    d -= a[j1 + i] * th * std::sin(th * y);
  }
  if (!spec.is_parametric())
    d += spec.beta().prime(y);
  return d;
}

// Adds -(1/(2N)) sum_j beta'(z_i - z_j) to drift, pairwise.
void
add_beta_exact(std::span<const double> z, const BetaSpec& beta, std::vector<double>& drift)
{
  const auto n = static_cast<std::ptrdiff_t>(z.size());
  const double scale = -0.5 / static_cast<double>(n);
#pragma omp parallel for schedule(static) if (n > 128)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t k = 0; k < n; ++k)
      s += beta.prime(z[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(k)]);
    drift[static_cast<std::size_t>(i)] += scale * s;
  }
}

// Linear binning of the particles onto `bins` nodes, exact beta' between
// nodes, linear interpolation back to the particles.
void
add_beta_binned(std::span<const double> z, const BetaSpec& beta, std::size_t bins, std::vector<double>& drift)
{
  const std::size_t n = z.size();
  const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo) || bins < 2) {
    // All particles coincide: beta'(0) = 0.
    return;
  }
  const double h = (hi - lo) / static_cast<double>(bins - 1);
  std::vector<double> mass(bins, 0.0);
  for (double v : z) {
    const double s = (v - lo) / h;
    auto k = static_cast<std::size_t>(std::floor(s));
    k = std::min(k, bins - 2);
    const double t = s - static_cast<double>(k);
    mass[k] += 1.0 - t;
    mass[k + 1] += t;
  }
  const auto m = static_cast<std::ptrdiff_t>(bins);
  std::vector<double> kernel(2 * bins - 1);
  for (std::ptrdiff_t d = -(m - 1); d <= m - 1; ++d)
    kernel[static_cast<std::size_t>(d + m - 1)] = beta.prime(static_cast<double>(d) * h);
  std::vector<double> field(bins, 0.0);
  for (std::ptrdiff_t b = 0; b < m; ++b) {
    double s = 0.0;
    for (std::ptrdiff_t c = 0; c < m; ++c)
      s += mass[static_cast<std::size_t>(c)] * kernel[static_cast<std::size_t>(b - c + m - 1)];
    field[static_cast<std::size_t>(b)] = s;
  }
  const double scale = -0.5 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (z[i] - lo) / h;
    auto k = static_cast<std::size_t>(std::floor(s));
    k = std::min(k, bins - 2);
    const double t = s - static_cast<double>(k);
    drift[i] += scale * ((1.0 - t) * field[k] + t * field[k + 1]);
  }
}

} // namespace

void
validate(const SimConfig& cfg)
{
  if (cfg.n_particles < 1)
    throw std::invalid_argument("simulation needs N >= 1");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw std::invalid_argument("dt must be positive");
  if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon))
    throw std::invalid_argument("T must be non-negative");
  if (cfg.horizon > 0.0 && cfg.dt > cfg.horizon)
    throw std::invalid_argument("dt must not exceed T");
  const double steps = cfg.horizon / cfg.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("T/dt must be an integer");
  if (cfg.mu0.kind == InitialLaw::Kind::gaussian && !(cfg.mu0.variance >= 0.0))
    throw std::invalid_argument("initial variance must be non-negative");
}

std::size_t
step_count(const SimConfig& cfg)
{
  validate(cfg);
  return static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
}

std::vector<double>
drift_naive(std::span<const double> x, const DriftSpec& spec)
{
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> drift(x.size(), 0.0);
  const double scale = -0.5 / static_cast<double>(n);
#pragma omp parallel for schedule(static) if (n > 128)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::ptrdiff_t k = 0; k < n; ++k)
      s += phi_prime(spec, x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(k)]);
    drift[static_cast<std::size_t>(i)] = scale * s;
  }
  return drift;
}

std::vector<double>
drift_fast(std::span<const double> x, const DriftSpec& spec, const DriftOptions& options)
{
  const std::size_t n = x.size();
  std::vector<double> drift(n, 0.0);
  if (n == 0)
    return drift;

  // The interaction only sees differences, so work with centered positions.
  const double c = stable_mean(x);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = x[i] - c;

  const auto j1 = static_cast<std::size_t>(spec.j1());
  const std::size_t max_power = 2 * j1 - 1;
  const auto& a = spec.a();
  const double scale = -0.5 / static_cast<double>(n);

  // Power sums S_r = sum_j z_j^r, r = 0 .. 2 J1 - 1.
  std::vector<double> power_sum(max_power + 1, 0.0);
  for (double v : z) {
    double p = 1.0;
    for (std::size_t r = 0; r <= max_power; ++r) {
      power_sum[r] += p;
      p *= v;
    }
  }

  // Polynomial coefficient of z_i^q in sum_j phi_poly'(z_i - z_j):
  //   sum_k 2k a_k C(2k-1, r) (-1)^r S_r   with q = 2k-1-r.
  std::vector<double> poly(max_power + 1, 0.0);
  for (std::size_t k = 1; k <= j1; ++k) {
    const std::size_t deg = 2 * k - 1;
    for (std::size_t r = 0; r <= deg; ++r) {
      const double sign = (r % 2 == 0) ? 1.0 : -1.0;
      poly[deg - r] += 2.0 * static_cast<double>(k) * a[k - 1] *
                       static_cast<double>(binomial(static_cast<unsigned>(deg), static_cast<unsigned>(r))) * sign *
                       power_sum[r];
    }
  }

  const std::size_t n_trig = spec.shape().n_trig();
  std::vector<double> cos_sum(n_trig, 0.0), sin_sum(n_trig, 0.0);
  for (std::size_t t = 0; t < n_trig; ++t) {
    const double th = spec.theta()[t];
    for (double v : z) {
      cos_sum[t] += std::cos(th * v);
      sin_sum[t] += std::sin(th * v);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t q = max_power + 1; q-- > 0;)
      acc = acc * z[i] + poly[q];
    double d = scale * acc;
    // -theta sin(theta (z_i - z_j)) summed over j, via angle addition.
    for (std::size_t t = 0; t < n_trig; ++t) {
      const double th = spec.theta()[t];
      const double s_i = std::sin(th * z[i]);
      const double c_i = std::cos(th * z[i]);
      d -= scale * a[j1 + t] * th * (s_i * cos_sum[t] - c_i * sin_sum[t]);
    }
    drift[i] = d;
  }

  if (!spec.is_parametric()) {
    if (options.beta_mode == BetaDriftMode::binned)
      add_beta_binned(z, spec.beta(), options.bins, drift);
    else
      add_beta_exact(z, spec.beta(), drift);
  }
  return drift;
}

ParticleEnsemble
euler_step(ParticleEnsemble ens,
           const DriftSpec& spec,
           double dt,
           std::span<const double> noise,
           const DriftOptions& options)
{
  if (noise.size() != ens.positions.size())
    throw DimensionError("euler_step: noise length must equal N");
  const auto drift = drift_fast(ens.positions, spec, options);
  const double sq = std::sqrt(dt);
  for (std::size_t i = 0; i < ens.positions.size(); ++i) {
    const double next = ens.positions[i] + drift[i] * dt + sq * noise[i];
    if (!std::isfinite(next))
      throw BlowUpError("particle " + std::to_string(i) + " blew up at step " + std::to_string(ens.n_steps + 1),
                        ens.n_steps + 1,
                        i);
    ens.positions[i] = next;
  }
  ens.n_steps += 1;
  ens.time = static_cast<double>(ens.n_steps) * dt;
  return ens;
}

ParticleEnsemble
simulate(const SimConfig& cfg, const DriftSpec& spec, const DriftOptions& options)
{
  const std::size_t steps = step_count(cfg);
  const CounterRng rng(cfg.seed, cfg.stream);
  const std::size_t n = cfg.n_particles;

  ParticleEnsemble ens;
  ens.seed = cfg.seed;
  ens.stream = cfg.stream;
  ens.positions.assign(n, 0.0);
  if (cfg.mu0.kind == InitialLaw::Kind::gaussian) {
    const double sd = std::sqrt(cfg.mu0.variance);
    for (std::size_t i = 0; i < n; ++i)
      ens.positions[i] = sd * rng.normal(DrawPurpose::initial_condition, 0, i);
  }

  std::vector<double> noise(n);
  for (std::size_t s = 1; s <= steps; ++s) {
    for (std::size_t i = 0; i < n; ++i)
      noise[i] = rng.normal(DrawPurpose::brownian_increment, s, i);
    ens = euler_step(std::move(ens), spec, cfg.dt, noise, options);
  }
  return ens;
}

std::vector<double>
project(std::span<const double> x)
{
  if (x.empty())
    throw std::invalid_argument("project: need N >= 1");
  const double c = stable_mean(x);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = x[i] - c;
  return y;
}

} // namespace mvsde
