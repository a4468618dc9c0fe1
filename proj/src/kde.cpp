#include "mvsde/kde.hpp"

#include "mvsde/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvsde {

namespace {

constexpr double kCutoff = 12.0;
constexpr std::size_t kChunk = 64;

double
horner(const std::vector<double>& c, double y)
{
  double acc = 0.0;
  for (std::size_t q = c.size(); q-- > 0;)
    acc = acc * y + c[q];
  return acc;
}

std::vector<double>
poly_derivative(const std::vector<double>& c)
{
  std::vector<double> d(c.size() > 1 ? c.size() - 1 : 1, 0.0);
  for (std::size_t q = 1; q < c.size(); ++q)
    d[q - 1] = static_cast<double>(q) * c[q];
  return d;
}

// Sum over samples of f(u) g(u), u = (y - Y)/h, at every grid node, where
// f is a polynomial. Gaussian factors along a run of nodes are produced by
// the recurrence g(u + s) = g(u) exp(-u s - s^2/2). Runs are cut at fixed
// chunk boundaries so results do not depend on the thread count.
GridFunction
smooth_on_grid(std::span<const double> samples, const std::vector<double>& f, double h, const GridShape& grid)
{
  validate(grid);
  if (samples.empty())
    throw std::invalid_argument("kernel estimate needs at least one sample");
  if (!(h > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  std::vector<double> ys(samples.begin(), samples.end());
  std::sort(ys.begin(), ys.end());

  const std::size_t n = grid.n_points;
  const double dx = grid.spacing();
  const double L = grid.half_width;
  const double s = dx / h;
  const double q = std::exp(-s * s);
  const double reach = kCutoff * h;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  std::vector<double> acc(n, 0.0);

  const auto n_chunks = static_cast<std::ptrdiff_t>((n + kChunk - 1) / kChunk);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
    const auto i0 = static_cast<std::size_t>(c) * kChunk;
    const std::size_t i1 = std::min(n, i0 + kChunk);
    const double lo = grid.x(i0) - reach;
    const double hi = grid.x(i1 - 1) + reach;
    auto first = std::lower_bound(ys.begin(), ys.end(), lo);
    auto last = std::upper_bound(first, ys.end(), hi);
    for (auto it = first; it != last; ++it) {
      const double y = *it;
      const double start = std::ceil((y - reach + L) / dx);
      const double stop = std::floor((y + reach + L) / dx);
      const double a_real = std::max(static_cast<double>(i0), start);
      const double b_real = std::min(static_cast<double>(i1 - 1), stop);
      if (a_real > b_real)
        continue;
      const auto a = static_cast<std::size_t>(a_real);
      const auto b = static_cast<std::size_t>(b_real);
      double u = (grid.x(a) - y) / h;
      double g = std::exp(-0.5 * u * u);
      double rho = std::exp(-u * s - 0.5 * s * s);
      for (std::size_t i = a; i <= b; ++i) {
        acc[i] += horner(f, u) * g;
        g *= rho;
        rho *= q;
        u += s;
      }
    }
  }

  GridFunction out(grid);
  const double scale = norm / static_cast<double>(samples.size());
  for (std::size_t i = 0; i < n; ++i)
    out[i] = acc[i] * scale;
  return out;
}

} // namespace

double
KernelSpec::eval(double y) const
{
  return horner(poly, y) * std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi);
}

double
KernelSpec::derivative(double y) const
{
  // (P g)' = (P' - y P) g
  const auto dp = poly_derivative(poly);
  return (horner(dp, y) - y * horner(poly, y)) * std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi);
}

KernelSpec
make_kernel(int m)
{
  if (m < 2 || m > 10 || m % 2 != 0)
    throw std::invalid_argument("kernel order must be even and in [2, 10], got " + std::to_string(m));
  // Probabilists' Hermite polynomials by He_{n+1} = y He_n - n He_{n-1}.
  const auto top = static_cast<std::size_t>(m - 2);
  std::vector<std::vector<double>> he(top + 1);
  he[0] = { 1.0 };
  if (top >= 1)
    he[1] = { 0.0, 1.0 };
  for (std::size_t k = 1; k < top; ++k) {
    he[k + 1].assign(k + 2, 0.0);
    for (std::size_t i = 0; i < he[k].size(); ++i)
      he[k + 1][i + 1] += he[k][i];
    for (std::size_t i = 0; i < he[k - 1].size(); ++i)
      he[k + 1][i] -= static_cast<double>(k) * he[k - 1][i];
  }
  KernelSpec kernel;
  kernel.order = m;
  kernel.poly.assign(top + 1, 0.0);
  double factor = 1.0; // (-1)^j / (2^j j!)
  for (std::size_t j = 0; 2 * j <= top; ++j) {
    if (j > 0)
      factor *= -1.0 / (2.0 * static_cast<double>(j));
    for (std::size_t i = 0; i < he[2 * j].size(); ++i)
      kernel.poly[i] += factor * he[2 * j][i];
  }
  return kernel;
}

Bandwidths
default_bandwidths(double n_eff, int m)
{
  if (!(n_eff >= 1.0))
    throw std::invalid_argument("default_bandwidths: n_eff must be >= 1");
  return { std::pow(n_eff, -1.0 / (2.0 * (m + 1))), std::pow(n_eff, -1.0 / (2.0 * (m + 2))) };
}

double
effective_sample_size(std::size_t n_particles, double horizon, double lambda)
{
  return 1.0 / (1.0 / static_cast<double>(n_particles) + std::exp(-lambda * horizon));
}

GridFunction
density_estimate(std::span<const double> samples, const KernelSpec& kernel, double h, const GridShape& grid)
{
  auto out = smooth_on_grid(samples, kernel.poly, h, grid);
  for (auto& v : out.values())
    v /= h;
  return out;
}

GridFunction
density_derivative_estimate(std::span<const double> samples,
                            const KernelSpec& kernel,
                            double h,
                            const GridShape& grid)
{
  // K'(u) = (P'(u) - u P(u)) g(u)
  auto f = poly_derivative(kernel.poly);
  f.resize(kernel.poly.size() + 1, 0.0);
  for (std::size_t i = 0; i < kernel.poly.size(); ++i)
    f[i + 1] -= kernel.poly[i];
  auto out = smooth_on_grid(samples, f, h, grid);
  for (auto& v : out.values())
    v /= h * h;
  return out;
}

GridFunction
log_derivative_estimate(const GridFunction& pi_hat, const GridFunction& pi_prime_hat, double delta)
{
  require_same_grid(pi_hat, pi_prime_hat, "log_derivative_estimate");
  GridFunction l(pi_hat.shape());
  for (std::size_t i = 0; i < l.size(); ++i)
    l[i] = pi_hat[i] > delta ? pi_prime_hat[i] / pi_hat[i] : 0.0;
  return l;
}

double
default_delta(const AlphaCoefficients& alpha, double normalizer, double beta_sup, double U)
{
  if (!alpha.alpha0)
    throw std::invalid_argument("default_delta: alpha0 is required");
  if (!(normalizer > 0.0))
    throw std::invalid_argument("default_delta: Z must be positive");
  const double delta0 = std::exp(-*alpha.alpha0 - alpha.trig_abs_sum() - beta_sup) / (2.0 * normalizer);
  return delta0 * std::exp(-alpha.polynomial_sum() * std::pow(U, 2 * alpha.j1));
}

std::string
to_string(DeltaMode mode)
{
  switch (mode) {
    case DeltaMode::oracle:
      return "oracle";
    case DeltaMode::plugin:
      return "plugin";
    case DeltaMode::fixed:
      return "fixed";
  }
  return "?";
}

DeltaMode
delta_mode_from_string(const std::string& name)
{
  if (name == "oracle")
    return DeltaMode::oracle;
  if (name == "plugin")
    return DeltaMode::plugin;
  if (name == "fixed")
    return DeltaMode::fixed;
  throw std::invalid_argument("unknown delta mode '" + name + "'");
}

std::string
to_string(WeightKind kind)
{
  return kind == WeightKind::indicator ? "indicator" : "smooth-bump";
}

WeightKind
weight_kind_from_string(const std::string& name)
{
  if (name == "indicator")
    return WeightKind::indicator;
  if (name == "smooth-bump")
    return WeightKind::smooth_bump;
  throw std::invalid_argument("unknown weight kind '" + name + "'");
}

void
validate(const EstimatorConfig& cfg)
{
  make_kernel(cfg.m);
  validate(cfg.grid);
  auto bandwidth_ok = [](const std::optional<double>& h) { return !h || (*h > 0.0 && *h <= 1.0); };
  if (!bandwidth_ok(cfg.h0) || !bandwidth_ok(cfg.h1))
    throw std::invalid_argument("bandwidths must lie in (0, 1]");
  if (cfg.delta && !(*cfg.delta > 0.0 && *cfg.delta < 1.0))
    throw std::invalid_argument("delta must lie in (0, 1)");
  if (cfg.delta_mode == DeltaMode::fixed && !cfg.delta)
    throw std::invalid_argument("delta mode 'fixed' needs a delta value");
  if (cfg.delta_mode == DeltaMode::plugin && !cfg.plugin)
    throw std::invalid_argument("delta mode 'plugin' needs plug-in inputs");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (cfg.omega && !(*cfg.omega > 0.0 && *cfg.omega < 1.0))
    throw std::invalid_argument("omega must lie in (0, 1)");
  if (cfg.z_max && !(*cfg.z_max > 0.0 && std::isfinite(*cfg.z_max)))
    throw std::invalid_argument("z_max must be positive and finite");
  if (cfg.U) {
    if (!(*cfg.U >= 1.0))
      throw std::invalid_argument("U must be >= 1");
    if (!(cfg.epsilon * *cfg.U < cfg.grid.half_width))
      throw std::invalid_argument("epsilon * U must be below the grid half-width");
  }
  if (cfg.n_eff && !(*cfg.n_eff >= 1.0))
    throw std::invalid_argument("n_eff must be >= 1");
}

} // namespace mvsde
