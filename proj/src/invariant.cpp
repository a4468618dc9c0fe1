#include "mvsde/invariant.hpp"

#include "mvsde/convolution.hpp"
#include "mvsde/error.hpp"
#include "mvsde/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvsde {

namespace {

// Raw moments M_r = sum_k w_k x_k^r pi_k for r = 0 .. r_max.
std::vector<double>
grid_power_moments(const GridFunction& pi, const std::vector<double>& w, std::size_t r_max)
{
  std::vector<double> m(r_max + 1, 0.0);
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const double x = pi.x(k);
    double p = w[k] * pi[k];
    for (std::size_t r = 0; r <= r_max; ++r) {
      m[r] += p;
      p *= x;
    }
  }
  return m;
}

double
horner(const std::vector<double>& c, double y)
{
  double acc = 0.0;
  for (std::size_t q = c.size(); q-- > 0;)
    acc = acc * y + c[q];
  return acc;
}

// Parametric part of (phi^(order) * pi), order 0 or 1, computed from grid
// moments and trigonometric sums; the result equals the trapezoid sum of the
// same integrand exactly in exact arithmetic.
class ParametricConvolution
{
public:
  ParametricConvolution(const DriftSpec& spec, const GridFunction& pi, int order)
    : spec_(spec)
    , order_(order)
  {
    const auto w = trapezoid_weights(pi.shape());
    const auto j1 = static_cast<std::size_t>(spec.j1());
    const std::size_t deg = 2 * j1 - static_cast<std::size_t>(order);
    const auto m = grid_power_moments(pi, w, deg);
    // (y - x)^{p} = sum_r C(p, r) y^{p - r} (-x)^r
    poly_.assign(deg + 1, 0.0);
    for (std::size_t k = 1; k <= j1; ++k) {
      const std::size_t p = 2 * k - static_cast<std::size_t>(order);
      const double lead = order == 0 ? 1.0 : 2.0 * static_cast<double>(k);
      for (std::size_t r = 0; r <= p; ++r) {
        const double sign = (r % 2 == 0) ? 1.0 : -1.0;
        poly_[p - r] += lead * spec.a()[k - 1] *
                        static_cast<double>(binomial(static_cast<unsigned>(p), static_cast<unsigned>(r))) * sign *
                        m[r];
      }
    }
    const std::size_t nt = spec.shape().n_trig();
    cos_.assign(nt, 0.0);
    sin_.assign(nt, 0.0);
    for (std::size_t t = 0; t < nt; ++t) {
      const double th = spec.theta()[t];
      for (std::size_t k = 0; k < pi.size(); ++k) {
        cos_[t] += w[k] * pi[k] * std::cos(th * pi.x(k));
        sin_[t] += w[k] * pi[k] * std::sin(th * pi.x(k));
      }
    }
  }

  double operator()(double y) const
  {
    double v = horner(poly_, y);
    const auto j1 = static_cast<std::size_t>(spec_.j1());
    for (std::size_t t = 0; t < cos_.size(); ++t) {
      const double th = spec_.theta()[t];
      const double a = spec_.a()[j1 + t];
      const double c = std::cos(th * y);
      const double s = std::sin(th * y);
      // cos(th (y - x)) = cos(th y) cos(th x) + sin(th y) sin(th x)
      if (order_ == 0)
        v += a * (c * cos_[t] + s * sin_[t]);
      else
        v -= a * th * (s * cos_[t] - c * sin_[t]);
    }
    return v;
  }

private:
  const DriftSpec& spec_;
  int order_;
  std::vector<double> poly_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

GridFunction
gaussian_start(const GridShape& shape, double a1)
{
  auto g = GridFunction::sample(shape, [a1](double y) { return std::exp(-a1 * y * y); });
  const double mass = g.integral();
  for (auto& v : g.values())
    v /= mass;
  return g;
}

void
check_options(const InvariantOptions& o)
{
  if (!(o.damping > 0.0 && o.damping <= 1.0))
    throw std::invalid_argument("solve_invariant: damping must lie in (0, 1]");
  if (!(o.tol > 0.0))
    throw std::invalid_argument("solve_invariant: tol must be positive");
  if (o.max_iter < 1)
    throw std::invalid_argument("solve_invariant: max_iter must be >= 1");
}

} // namespace

double
InvariantSolution::normalizer() const
{
  return std::exp(log_normalizer);
}

double
default_half_width(const DriftSpec& spec)
{
  const double a1 = spec.a()[0];
  return 8.0 / std::sqrt(2.0 * a1) * std::max(1.0, 1.0 / std::sqrt(spec.lambda()));
}

GridFunction
potential_convolution(const DriftSpec& spec, const GridFunction& pi)
{
  const ParametricConvolution par(spec, pi, 0);
  GridFunction out(pi.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = par(out.x(i));
  if (!spec.is_parametric()) {
    LinearConvolver conv(pi.shape(), [&spec](double y) { return spec.beta().eval(y).value; });
    const auto b = conv.apply(pi);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += b[i];
  }
  return out;
}

GridFunction
potential_derivative_convolution(const DriftSpec& spec, const GridFunction& pi)
{
  const ParametricConvolution par(spec, pi, 1);
  GridFunction out(pi.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = par(out.x(i));
  if (!spec.is_parametric()) {
    LinearConvolver conv(pi.shape(), [&spec](double y) { return spec.beta().prime(y); });
    const auto b = conv.apply(pi);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += b[i];
  }
  return out;
}

InvariantSolution
solve_invariant(const DriftSpec& spec, const InvariantOptions& options)
{
  check_options(options);
  // Re-check: a DriftSpec that exists has passed this, but a stale lambda
  // could still make the default grid meaningless.
  convexity_certificate(spec);

  GridShape shape{ options.half_width.value_or(default_half_width(spec)), options.n_points };
  validate(shape);
  const auto w = trapezoid_weights(shape);
  const std::size_t n = shape.n_points;

  std::optional<LinearConvolver> beta_conv;
  if (!spec.is_parametric())
    beta_conv.emplace(shape, [&spec](double y) { return spec.beta().eval(y).value; });

  InvariantSolution sol;
  GridFunction pi = gaussian_start(shape, spec.a()[0]);
  GridFunction next(shape);

  for (int it = 1; it <= options.max_iter; ++it) {
    const ParametricConvolution par(spec, pi, 0);
    GridFunction u(shape);
    for (std::size_t i = 0; i < n; ++i)
      u[i] = par(u.x(i));
    if (beta_conv) {
      const auto b = beta_conv->apply(pi);
      for (std::size_t i = 0; i < n; ++i)
        u[i] += b[i];
    }
    u.symmetrize_even();

    const double u_min = *std::min_element(u.values().begin(), u.values().end());
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = std::exp(-(u[i] - u_min));
      mass += w[i] * next[i];
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= mass;
      residual = std::max(residual, std::abs(pi[i] - next[i]));
    }
    sol.residual_history.push_back(residual);
    if (!std::isfinite(residual))
      throw ConvergenceError("solve_invariant: non-finite iterate", residual, it);

    if (residual < options.tol) {
      sol.density = pi;
      sol.residual = residual;
      sol.iterations = it;
      sol.log_normalizer = std::log(mass) - u_min;
      return sol;
    }

    for (std::size_t i = 0; i < n; ++i)
      pi[i] = (1.0 - options.damping) * pi[i] + options.damping * next[i];
    pi.symmetrize_even();
    const double total = pi.integral();
    for (auto& v : pi.values())
      v /= total;
  }
  const double last = sol.residual_history.back();
  throw ConvergenceError("solve_invariant: no convergence after " + std::to_string(options.max_iter) +
                           " iterations (residual " + std::to_string(last) + ")",
                         last,
                         options.max_iter);
}

GridFunction
solve_invariant(const DriftSpec& spec,
                double half_width,
                std::size_t n_points,
                double tol,
                int max_iter,
                double damping)
{
  InvariantOptions o;
  o.half_width = half_width;
  o.n_points = n_points;
  o.tol = tol;
  o.max_iter = max_iter;
  o.damping = damping;
  return solve_invariant(spec, o).density;
}

GridFunction
log_density_derivative(const GridFunction& pi, double floor)
{
  const std::size_t n = pi.size();
  const double h = pi.spacing();
  GridFunction d(pi.shape());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(pi[i] > floor))
      continue;
    double deriv;
    if (i >= 2 && i + 2 < n)
      deriv = (pi[i - 2] - 8.0 * pi[i - 1] + 8.0 * pi[i + 1] - pi[i + 2]) / (12.0 * h);
    else if (i >= 1 && i + 1 < n)
      deriv = (pi[i + 1] - pi[i - 1]) / (2.0 * h);
    else if (i == 0)
      deriv = (-3.0 * pi[0] + 4.0 * pi[1] - pi[2]) / (2.0 * h);
    else
      deriv = (3.0 * pi[n - 1] - 4.0 * pi[n - 2] + pi[n - 3]) / (2.0 * h);
    d[i] = deriv / pi[i];
  }
  return d;
}

std::vector<double>
moments(const GridFunction& pi, int k_max)
{
  if (k_max < 0)
    throw std::invalid_argument("moments: k_max must be >= 0");
  const auto w = trapezoid_weights(pi.shape());
  auto m = grid_power_moments(pi, w, static_cast<std::size_t>(k_max));
  for (std::size_t k = 1; k < m.size(); k += 2)
    m[k] = 0.0;

  // Exponential-tail estimate beyond the last node: pi(L) / |(log pi)'(L)|.
  const std::size_t n = pi.size();
  const double edge = pi[n - 1];
  if (edge > 0.0 && pi[n - 2] > edge) {
    const double slope = (std::log(pi[n - 2]) - std::log(edge)) / pi.spacing();
    const double L = pi.half_width();
    const double tail = 2.0 * edge * std::pow(L, k_max) / slope;
    if (tail > 1e-10)
      spdlog::warn("moments: tail beyond |y| = {} may contribute {:.3g} to m_{}", L, tail, k_max);
  }
  return m;
}

std::vector<double>
even_moments(const GridFunction& pi, int k_max)
{
  const auto m = moments(pi, 2 * k_max);
  std::vector<double> e(static_cast<std::size_t>(k_max) + 1);
  for (std::size_t k = 0; k < e.size(); ++k)
    e[k] = m[2 * k];
  return e;
}

std::complex<double>
fourier(const GridFunction& f, double z)
{
  const auto w = trapezoid_weights(f.shape());
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double t = z * f.x(k);
    re += w[k] * f[k] * std::cos(t);
    im += w[k] * f[k] * std::sin(t);
  }
  return { re, im };
}

GridFunction
psi_oracle(const DriftSpec& spec, const GridFunction& pi)
{
  GridFunction psi(pi.shape());
  if (spec.is_parametric())
    return psi;
  LinearConvolver conv(pi.shape(), [&spec](double y) { return spec.beta().prime(y); });
  psi = conv.apply(pi);
  for (auto& v : psi.values())
    v = -v;
  psi.symmetrize_odd();
  return psi;
}

AlphaCoefficients
alpha_from_density(const DriftSpec& spec, const GridFunction& pi)
{
  const auto m = even_moments(pi, spec.j1());
  std::vector<double> cf(spec.shape().n_trig());
  for (std::size_t t = 0; t < cf.size(); ++t)
    cf[t] = fourier(pi, spec.theta()[t]).real();
  return alpha_from_a(spec, m, cf);
}

std::vector<double>
cumulative(const GridFunction& pi)
{
  const double h = pi.spacing();
  std::vector<double> c(pi.size(), 0.0);
  for (std::size_t i = 1; i < pi.size(); ++i)
    c[i] = c[i - 1] + 0.5 * h * (pi[i - 1] + pi[i]);
  return c;
}

std::vector<double>
sample_from_density(const GridFunction& pi, std::size_t n, std::uint64_t seed, std::uint64_t stream)
{
  const auto cdf = cumulative(pi);
  const double total = cdf.back();
  if (!(total > 0.0))
    throw std::invalid_argument("sample_from_density: density has no mass");
  const double h = pi.spacing();
  const CounterRng rng(seed, stream);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = rng.uniform(DrawPurpose::oracle_sample, 0, i) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    std::size_t k = it == cdf.begin() ? 0 : static_cast<std::size_t>(it - cdf.begin()) - 1;
    k = std::min(k, pi.size() - 2);
    const double r = target - cdf[k];
    const double p0 = pi[k];
    const double slope = (pi[k + 1] - p0) / h;
    // Solve p0 t + slope t^2 / 2 = r in the form that stays stable as slope -> 0.
    const double disc = std::max(0.0, p0 * p0 + 2.0 * slope * r);
    const double denom = p0 + std::sqrt(disc);
    double t = denom > 0.0 ? 2.0 * r / denom : 0.0;
    t = std::clamp(t, 0.0, h);
    out[i] = pi.x(k) + t;
  }
  return out;
}

} // namespace mvsde
