#include "mvsde/pipeline.hpp"

#include "mvsde/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mvsde {

namespace {

constexpr double kIllConditioned = 1e12;

double
bump_exponent(double s, double eps)
{
  return -1.0 / ((s - eps) * (1.0 - s));
}

template<typename F>
auto
labelled(const char* step, F&& f) -> decltype(f())
{
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(step, e.what());
  }
}

} // namespace

double
WeightFunction::operator()(double s) const
{
  if (!(s >= epsilon && s <= 1.0))
    return 0.0;
  if (kind == WeightKind::indicator)
    return 1.0;
  if (s == epsilon || s == 1.0)
    return 0.0;
  const double mid = 0.5 * (1.0 + epsilon);
  return std::exp(bump_exponent(s, epsilon) - bump_exponent(mid, epsilon));
}

double
WeightFunction::integral() const
{
  if (kind == WeightKind::indicator)
    return 1.0 - epsilon;
  auto w = *this;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
    [&w](double s) { return w(s); }, epsilon, 1.0, 15, 1e-14);
}

WeightFunction
weight_function(WeightKind kind, double epsilon)
{
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("weight_function: epsilon must lie in (0, 1)");
  return { kind, epsilon };
}

Eigen::VectorXd
contrast_functions(const DriftShape& shape, double U, double s)
{
  const auto j1 = static_cast<std::size_t>(shape.j1);
  const auto j = static_cast<std::size_t>(shape.j);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j));
  double odd_power = s;
  for (std::size_t k = 1; k <= j1; ++k) {
    v[static_cast<Eigen::Index>(k - 1)] = -2.0 * static_cast<double>(k) * odd_power;
    odd_power *= s * s;
  }
  for (std::size_t t = 0; t < shape.n_trig(); ++t) {
    const double th = shape.theta[t];
    v[static_cast<Eigen::Index>(j1 + t)] = th * std::sin(th * U * s);
  }
  return v;
}

ContrastSystem
contrast_matrix(const DriftShape& shape, double U, const WeightFunction& weight)
{
  validate(shape);
  if (!(U >= 1.0))
    throw std::invalid_argument("contrast_matrix: U must be >= 1");
  const auto J = static_cast<Eigen::Index>(shape.j);
  ContrastSystem sys;
  sys.U = U;
  sys.epsilon = weight.epsilon;
  sys.weight = weight;
  sys.Q.resize(J, J);
  for (Eigen::Index r = 0; r < J; ++r) {
    for (Eigen::Index c = r; c < J; ++c) {
      auto f = [&](double s) {
        const auto v = contrast_functions(shape, U, s);
        return v[r] * v[c] * weight(s);
      };
      const double q =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, weight.epsilon, 1.0, 20, 1e-14);
      sys.Q(r, c) = q;
      sys.Q(c, r) = q;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.Q, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  sys.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (sys.condition_number > kIllConditioned)
    spdlog::warn("contrast matrix is ill-conditioned (condition number {:.3g})", sys.condition_number);
  return sys;
}

AlphaFit
fit_alpha_system(const GridFunction& l_hat,
                 double U,
                 const WeightFunction& weight,
                 const DriftShape& shape,
                 bool symmetric)
{
  if (!(U <= l_hat.half_width()))
    throw DimensionError("fit_alpha: grid does not cover [eps U, U]");
  AlphaFit fit;
  fit.system = contrast_matrix(shape, U, weight);
  auto& sys = fit.system;
  if (!(sys.condition_number < std::numeric_limits<double>::infinity()))
    throw IllConditionedError("contrast matrix is not positive definite");

  auto l_at = [&](double y) { return symmetric ? 0.5 * (l_hat.at(y) - l_hat.at(-y)) : l_hat.at(y); };

  // Integral of l_hat(y) l(y/U) w(y/U) / U over [eps U, U], Gauss-Legendre
  // on every grid cell that meets the window.
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const auto& nodes = Rule::abscissa();
  const auto& weights = Rule::weights();
  const double lo = weight.epsilon * U;
  const double hi = U;
  const double h = l_hat.spacing();
  const double L = l_hat.half_width();
  const auto J = static_cast<Eigen::Index>(shape.j);
  sys.rhs = Eigen::VectorXd::Zero(J);
  double a = lo;
  while (a < hi) {
    double b = -L + (std::floor((a + L) / h) + 1.0) * h;
    if (b <= a)
      b = a + h;
    b = std::min(b, hi);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (double sign : { -1.0, 1.0 }) {
        if (nodes[i] == 0.0 && sign < 0.0)
          continue;
        const double y = mid + sign * half * nodes[i];
        const double s = y / U;
        const double f = l_at(y) * weight(s) / U;
        sys.rhs += (weights[i] * half * f) * contrast_functions(shape, U, s);
      }
    }
    a = b;
  }

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.Q);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw IllConditionedError("contrast matrix factorization failed");
  const Eigen::VectorXd scaled = ldlt.solve(sys.rhs);
  fit.alpha.assign(static_cast<std::size_t>(J), 0.0);
  for (Eigen::Index k = 0; k < J; ++k) {
    double v = scaled[k];
    if (k < shape.j1)
      v /= std::pow(U, 2 * (k + 1) - 1);
    fit.alpha[static_cast<std::size_t>(k)] = v;
  }
  return fit;
}

std::vector<double>
fit_alpha(const GridFunction& l_hat, double U, const WeightFunction& weight, const DriftShape& shape, bool symmetric)
{
  return fit_alpha_system(l_hat, U, weight, shape, symmetric).alpha;
}

std::vector<double>
empirical_moments(std::span<const double> samples, int k_max)
{
  if (samples.empty())
    throw std::invalid_argument("empirical_moments: no samples");
  if (k_max < 0)
    throw std::invalid_argument("empirical_moments: k_max must be >= 0");
  std::vector<double> m(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (double y : samples) {
    double p = 1.0;
    for (auto& v : m) {
      v += p;
      p *= y;
    }
  }
  for (auto& v : m)
    v /= static_cast<double>(samples.size());
  return m;
}

std::complex<double>
empirical_cf(std::span<const double> samples, double z)
{
  if (samples.empty())
    throw std::invalid_argument("empirical_cf: no samples");
  double re = 0.0;
  double im = 0.0;
  for (double y : samples) {
    re += std::cos(z * y);
    im += std::sin(z * y);
  }
  const auto n = static_cast<double>(samples.size());
  return { re / n, im / n };
}

double
parametric_log_derivative(const DriftShape& shape, std::span<const double> alpha, double y)
{
  double l = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    l -= alpha[i] * basis_function(shape, i, y).first;
  return l;
}

GridFunction
psi_estimate(const GridFunction& l_hat,
             std::span<const double> alpha_hat,
             const DriftShape& shape,
             double epsilon,
             double U)
{
  if (alpha_hat.size() != static_cast<std::size_t>(shape.j))
    throw DimensionError("psi_estimate: alpha_hat must have J entries");
  const double window = epsilon * U;
  if (!(window <= l_hat.half_width()))
    throw DimensionError("psi_estimate: grid does not cover [-eps U, eps U]");
  GridFunction psi(l_hat.shape());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double y = psi.x(i);
    if (std::abs(y) <= window)
      psi[i] = l_hat[i] - parametric_log_derivative(shape, alpha_hat, y);
  }
  return psi;
}

DeconvolutionResult
deconvolve(const GridFunction& psi_hat,
           const CharacteristicFunction& ecf,
           double omega,
           double z_max,
           std::optional<double> dz)
{
  if (!(omega > 0.0))
    throw std::invalid_argument("deconvolve: omega must be positive");
  if (!(z_max > 0.0) || !std::isfinite(z_max))
    throw std::invalid_argument("deconvolve: z_max must be positive and finite");
  const double step = dz.value_or(std::numbers::pi / (8.0 * psi_hat.half_width()));
  if (!(step > 0.0))
    throw std::invalid_argument("deconvolve: dz must be positive");

  const auto n_half = static_cast<std::size_t>(std::ceil(z_max / step));
  const double dz_eff = z_max / static_cast<double>(n_half);
  const std::size_t n_z = 2 * n_half + 1;

  DeconvolutionResult out;
  out.beta_prime = GridFunction(psi_hat.shape());
  out.z.resize(n_z);
  out.spectrum.assign(n_z, { 0.0, 0.0 });

  const auto w = trapezoid_weights(psi_hat.shape());
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < psi_hat.size(); ++k)
    if (psi_hat[k] != 0.0)
      support.push_back(k);

  std::size_t survivors = 0;
  for (std::size_t iz = 0; iz < n_z; ++iz) {
    const double z = (static_cast<double>(iz) - static_cast<double>(n_half)) * dz_eff;
    out.z[iz] = z;
    const auto e = ecf(z);
    const double mag2 = std::norm(e);
    if (!(std::sqrt(mag2) > omega))
      continue;
    ++survivors;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k : support) {
      const double t = z * psi_hat.x(k);
      re += w[k] * psi_hat[k] * std::cos(t);
      im += w[k] * psi_hat[k] * std::sin(t);
    }
    out.spectrum[iz] = -std::complex<double>(re, im) * std::conj(e) / mag2;
  }
  out.surviving_fraction = static_cast<double>(survivors) / static_cast<double>(n_z);
  if (survivors == 0) {
    out.degenerate = true;
    spdlog::warn("deconvolve: no frequency passes |ecf| > {}", omega);
    return out;
  }

  std::vector<double> wz(n_z, dz_eff);
  wz.front() *= 0.5;
  wz.back() *= 0.5;
  const auto n_y = static_cast<std::ptrdiff_t>(psi_hat.size());
  const double scale = 1.0 / (2.0 * std::numbers::pi);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_y; ++i) {
    const double y = psi_hat.x(static_cast<std::size_t>(i));
    double acc = 0.0;
    for (std::size_t iz = 0; iz < n_z; ++iz) {
      const auto& f = out.spectrum[iz];
      if (f == std::complex<double>(0.0, 0.0))
        continue;
      // Re(e^{-i z y} F)
      const double t = out.z[iz] * y;
      acc += wz[iz] * (f.real() * std::cos(t) + f.imag() * std::sin(t));
    }
    out.beta_prime[static_cast<std::size_t>(i)] = scale * acc;
  }
  return out;
}

OracleContext
make_oracle(const DriftSpec& spec, const InvariantSolution& solution)
{
  OracleContext o;
  o.alpha = alpha_from_density(spec, solution.density);
  o.normalizer = solution.normalizer();
  o.beta_sup = spec.beta().sup_norm();
  o.density = solution.density;
  return o;
}

double
default_contrast_range(const AlphaCoefficients& alpha, int m, double n_eff)
{
  const double bar = alpha.polynomial_sum();
  if (!(bar > 0.0))
    throw std::invalid_argument("default_contrast_range: alpha_bar_1 must be positive");
  const double c = static_cast<double>(m) / (4.0 * (m + 2) * bar);
  const double arg = c * std::log(n_eff);
  return std::max(1.0, std::pow(std::max(arg, 0.0), 1.0 / (2.0 * alpha.j1)));
}

double
default_omega(double n_eff)
{
  return std::max(std::pow(n_eff, -0.25), 1e-4);
}

double
oracle_frequency_cutoff(const GridFunction& pi, double omega, double cap)
{
  const double level = 2.0 * omega < 1.0 ? 2.0 * omega : omega;
  auto f = [&](double z) { return std::abs(fourier(pi, z)) - level; };
  constexpr double scan = 0.05;
  double prev = 0.0;
  for (double z = scan; z <= cap; z += scan) {
    if (f(z) <= 0.0) {
      double lo = prev;
      double hi = z;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = z;
  }
  return cap;
}

EstimationResult
run_pipeline(std::span<const double> samples,
             const EstimatorConfig& cfg,
             const DriftShape& shape,
             const OracleContext* oracle)
{
  labelled("config", [&] {
    validate(cfg);
    validate(shape);
    if (samples.empty())
      throw std::invalid_argument("no samples");
    if (cfg.delta_mode == DeltaMode::oracle && !oracle)
      throw std::invalid_argument("delta mode 'oracle' needs a solved invariant density");
    return 0;
  });

  EstimationResult res;
  auto& diag = res.diagnostics;
  diag.n_eff = cfg.n_eff.value_or(static_cast<double>(samples.size()));

  const AlphaCoefficients* reference = nullptr;
  double normalizer = 1.0;
  double beta_sup = 0.0;
  if (cfg.delta_mode == DeltaMode::oracle) {
    reference = &oracle->alpha;
    normalizer = oracle->normalizer;
    beta_sup = oracle->beta_sup;
  } else if (cfg.plugin) {
    reference = &cfg.plugin->alpha;
    normalizer = cfg.plugin->normalizer;
    beta_sup = cfg.plugin->beta_sup;
  } else if (oracle) {
    reference = &oracle->alpha;
  }

  labelled("config", [&] {
    if (cfg.U)
      diag.U = *cfg.U;
    else if (reference)
      diag.U = default_contrast_range(*reference, cfg.m, diag.n_eff);
    else
      throw std::invalid_argument("U is not set and no alpha is available to derive it");
    if (!(cfg.epsilon * diag.U < cfg.grid.half_width) || !(diag.U <= cfg.grid.half_width))
      throw std::invalid_argument("grid half-width " + std::to_string(cfg.grid.half_width) +
                                  " does not cover the contrast window up to U = " + std::to_string(diag.U));
    if (cfg.delta_mode == DeltaMode::fixed)
      diag.delta = *cfg.delta;
    else
      diag.delta = default_delta(*reference, normalizer, beta_sup, diag.U);
    diag.omega = cfg.omega.value_or(default_omega(diag.n_eff));
    if (cfg.z_max)
      diag.z_max = *cfg.z_max;
    else if (cfg.delta_mode == DeltaMode::oracle)
      diag.z_max = oracle_frequency_cutoff(oracle->density, diag.omega);
    else
      diag.z_max = 10.0;
    const auto bw = default_bandwidths(diag.n_eff, cfg.m);
    diag.h0 = cfg.h0.value_or(bw.h0);
    diag.h1 = cfg.h1.value_or(bw.h1);
    return 0;
  });

  labelled("step (i)", [&] {
    const auto kernel = make_kernel(cfg.m);
    res.pi_hat = density_estimate(samples, kernel, diag.h0, cfg.grid);
    const auto d = density_derivative_estimate(samples, kernel, diag.h1, cfg.grid);
    res.l_hat = log_derivative_estimate(res.pi_hat, d, diag.delta);
    return 0;
  });

  labelled("step (ii)", [&] {
    const auto w = weight_function(cfg.weight, cfg.epsilon);
    auto fit = fit_alpha_system(res.l_hat, diag.U, w, shape, cfg.symmetric_contrast);
    diag.condition_number = fit.system.condition_number;
    res.alpha_hat = std::move(fit.alpha);
    AlphaCoefficients ac;
    ac.j1 = shape.j1;
    ac.alpha = res.alpha_hat;
    const auto raw = empirical_moments(samples, 2 * (shape.j1 - 1));
    std::vector<double> even(static_cast<std::size_t>(shape.j1));
    for (std::size_t k = 0; k < even.size(); ++k)
      even[k] = raw[2 * k];
    std::vector<double> cf(shape.n_trig());
    for (std::size_t t = 0; t < cf.size(); ++t)
      cf[t] = empirical_cf(samples, shape.theta[t]).real();
    res.a_hat = a_from_alpha(ac, even, cf);
    return 0;
  });

  labelled("step (iii)", [&] {
    res.psi_hat = psi_estimate(res.l_hat, res.alpha_hat, shape, cfg.epsilon, diag.U);
    return 0;
  });

  labelled("step (iv)", [&] {
    auto ecf = [samples](double z) { return empirical_cf(samples, z); };
    auto dec = deconvolve(res.psi_hat, ecf, diag.omega, diag.z_max);
    diag.surviving_fraction = dec.surviving_fraction;
    diag.degenerate = dec.degenerate;
    res.beta_prime_hat = std::move(dec.beta_prime);
    res.beta_prime_hat.symmetrize_odd();
    return 0;
  });

  return res;
}

} // namespace mvsde
