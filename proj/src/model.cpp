#include "mvsde/model.hpp"

#include "mvsde/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvsde {

namespace {

// sin(u)/u and its first two derivatives. The closed forms cancel badly near
// the origin, where the Taylor series is used instead.
Derivatives
sinc_derivatives(double u)
{
  Derivatives s;
  if (std::abs(u) < 0.5) {
    const double u2 = u * u;
    double coeff = 1.0; // (-1)^n u^{2n-2} / (2n+1)!, starting from n = 0 scaled by u^2
    s.value = 1.0;
    for (int n = 1; n <= 12; ++n) {
      coeff *= (n == 1 ? -1.0 : -u2) / ((2.0 * n) * (2.0 * n + 1.0));
      s.value += coeff * u2;
      s.first += 2.0 * n * coeff * u;
      s.second += 2.0 * n * (2.0 * n - 1.0) * coeff;
    }
    return s;
  }
  const double sn = std::sin(u);
  const double cs = std::cos(u);
  s.value = sn / u;
  s.first = (u * cs - sn) / (u * u);
  s.second = -s.value - 2.0 * s.first / u;
  return s;
}

Derivatives
cos_bump(double b, double y)
{
  // (1 - cos(b y)) / y^2 = (b^2 / 2) sinc(b y / 2)^2
  const auto s = sinc_derivatives(0.5 * b * y);
  const double b2 = b * b;
  return { 0.5 * b2 * s.value * s.value,
           0.5 * b2 * b * s.value * s.first,
           0.25 * b2 * b2 * (s.first * s.first + s.value * s.second) };
}

Derivatives
sinc_power(int k, double y)
{
  const auto s = sinc_derivatives(y);
  const int p = 2 * k;
  const double sp2 = std::pow(s.value, p - 2);
  const double sp1 = sp2 * s.value;
  return { sp1 * s.value,
           p * sp1 * s.first,
           p * (p - 1) * sp2 * s.first * s.first + p * sp1 * s.second };
}

// Five-point central differences in the interior, second-order one-sided
// stencils at the two outermost nodes on each side.
GridFunction
differentiate(const GridFunction& f)
{
  const std::size_t n = f.size();
  const double h = f.spacing();
  GridFunction d(f.shape());
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
  d[1] = (f[2] - f[0]) / (2.0 * h);
  d[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

} // namespace

std::string
to_string(BetaFamily family)
{
  switch (family) {
    case BetaFamily::zero:
      return "zero";
    case BetaFamily::cos_bump:
      return "cos-bump";
    case BetaFamily::sinc_power:
      return "sinc-power";
    case BetaFamily::tabulated:
      return "tabulated";
  }
  return "unknown";
}

BetaFamily
beta_family_from_string(const std::string& name)
{
  if (name == "zero")
    return BetaFamily::zero;
  if (name == "cos-bump")
    return BetaFamily::cos_bump;
  if (name == "sinc-power")
    return BetaFamily::sinc_power;
  if (name == "tabulated")
    return BetaFamily::tabulated;
  throw SpecError("unknown beta family '" + name + "'");
}

BetaSpec
BetaSpec::zero()
{
  return {};
}

BetaSpec
BetaSpec::cos_bump(double b)
{
  if (!(b > 0.0) || !std::isfinite(b))
    throw SpecError("cos-bump beta requires b > 0");
  BetaSpec s;
  s.family_ = BetaFamily::cos_bump;
  s.b_ = b;
  return s;
}

BetaSpec
BetaSpec::sinc_power(int k)
{
  if (k < 1)
    throw SpecError("sinc-power beta requires integer k >= 1");
  BetaSpec s;
  s.family_ = BetaFamily::sinc_power;
  s.k_ = k;
  return s;
}

BetaSpec
BetaSpec::tabulated(GridFunction values)
{
  const std::size_t n = values.size();
  const double scale = 1.0 + values.sup_norm();
  for (std::size_t i = 0; i < n / 2; ++i) {
    if (std::abs(values[i] - values[n - 1 - i]) > 1e-12 * scale)
      throw SpecError("tabulated beta must be even");
    if (!std::isfinite(values[i]))
      throw SpecError("tabulated beta must be finite");
  }
  if (n < 5)
    throw SpecError("tabulated beta needs at least 5 nodes");
  BetaSpec s;
  s.family_ = BetaFamily::tabulated;
  values.symmetrize_even();
  s.table_d1_ = differentiate(values);
  s.table_d1_.symmetrize_odd();
  s.table_d2_ = differentiate(s.table_d1_);
  s.table_d2_.symmetrize_even();
  s.table_ = std::move(values);
  return s;
}

std::vector<double>
BetaSpec::params() const
{
  switch (family_) {
    case BetaFamily::cos_bump:
      return { b_ };
    case BetaFamily::sinc_power:
      return { static_cast<double>(k_) };
    default:
      return {};
  }
}

Derivatives
BetaSpec::eval(double y) const
{
  switch (family_) {
    case BetaFamily::zero:
      return {};
    case BetaFamily::cos_bump:
      return mvsde::cos_bump(b_, y);
    case BetaFamily::sinc_power:
      return mvsde::sinc_power(k_, y);
    case BetaFamily::tabulated: {
      const double L = table_.half_width();
      if (std::abs(y) >= L)
        return { table_[0], 0.0, 0.0 };
      return { table_.at(y), table_d1_.at(y), table_d2_.at(y) };
    }
  }
  return {};
}

double
BetaSpec::sup_norm() const
{
  switch (family_) {
    case BetaFamily::zero:
      return 0.0;
    case BetaFamily::cos_bump:
      return 0.5 * b_ * b_;
    case BetaFamily::sinc_power:
      return 1.0;
    case BetaFamily::tabulated:
      return table_.sup_norm();
  }
  return 0.0;
}

double
BetaSpec::inf_second_derivative() const
{
  switch (family_) {
    case BetaFamily::zero:
      return 0.0;
    case BetaFamily::tabulated: {
      double m = 0.0; // beta'' = 0 outside the table
      for (double v : table_d2_.values())
        m = std::min(m, v);
      return m;
    }
    default:
      break;
  }

  // Even function: scan [0, 50]. Both analytic families have beta'' -> 0 in
  // the tails, so the infimum over the line is min(scan, 0).
  const double freq = family_ == BetaFamily::cos_bump ? std::max(1.0, b_) : 1.0;
  const double step = std::min(1e-3, 1e-2 / freq);
  const auto n = static_cast<std::size_t>(std::ceil(50.0 / step));
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double v = eval(static_cast<double>(i) * step).second;
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  const double lo = best_i == 0 ? 0.0 : (static_cast<double>(best_i) - 1.0) * step;
  const double hi = (static_cast<double>(best_i) + 1.0) * step;
  auto f = [this](double y) { return eval(y).second; };
  const auto refined = boost::math::tools::brent_find_minima(f, lo, hi, 50);
  return std::min({ best, refined.second, 0.0 });
}

void
validate(const DriftShape& shape)
{
  if (shape.j1 < 1)
    throw SpecError("J1 must be >= 1");
  if (shape.j < shape.j1)
    throw SpecError("J must be >= J1");
  if (shape.j1 > 20)
    throw SpecError("J1 > 20 is not supported (binomials of order 2 J1 <= 40)");
  if (shape.theta.size() != shape.n_trig())
    throw SpecError("theta must have J - J1 entries");
  for (std::size_t i = 0; i < shape.theta.size(); ++i) {
    if (!(shape.theta[i] > 0.0) || !std::isfinite(shape.theta[i]))
      throw SpecError("frequencies theta_j must be positive");
    for (std::size_t k = 0; k < i; ++k)
      if (shape.theta[k] == shape.theta[i])
        throw SpecError("frequencies theta_j must be distinct");
  }
}

Derivatives
basis_function(const DriftShape& shape, std::size_t idx, double y)
{
  const auto j1 = static_cast<std::size_t>(shape.j1);
  if (idx < j1) {
    const int p = 2 * static_cast<int>(idx + 1);
    const double yp2 = p >= 2 ? std::pow(y, p - 2) : 1.0;
    return { yp2 * y * y, p * yp2 * y, static_cast<double>(p * (p - 1)) * yp2 };
  }
  const double th = shape.theta[idx - j1];
  const double c = std::cos(th * y);
  return { c, -th * std::sin(th * y), -th * th * c };
}

double
convexity_certificate(const DriftShape& shape, std::span<const double> a, const BetaSpec& beta)
{
  double lam = 2.0 * a[0];
  for (std::size_t i = 0; i < shape.n_trig(); ++i) {
    const double th = shape.theta[i];
    lam -= th * th * std::abs(a[static_cast<std::size_t>(shape.j1) + i]);
  }
  lam += beta.inf_second_derivative();
  if (!(lam > 0.0))
    throw SpecError("convexity certificate " + std::to_string(lam) + " is not positive");
  return lam;
}

double
convexity_certificate(const DriftSpec& spec)
{
  return spec.certificate();
}

DriftSpec::DriftSpec(DriftShape shape, std::vector<double> a, BetaSpec beta, std::optional<double> lambda)
  : shape_(std::move(shape))
  , a_(std::move(a))
  , beta_(std::move(beta))
{
  validate(shape_);
  if (a_.size() != static_cast<std::size_t>(shape_.j))
    throw SpecError("coefficient vector must have J entries");
  for (double v : a_)
    if (!std::isfinite(v))
      throw SpecError("coefficients must be finite");
  const auto j1 = static_cast<std::size_t>(shape_.j1);
  if (!(a_[0] > 0.0))
    throw SpecError("a_1 must be positive");
  if (!(a_[j1 - 1] > 0.0))
    throw SpecError("a_J1 must be positive");
  for (std::size_t i = 1; i + 1 < j1; ++i)
    if (a_[i] < 0.0)
      throw SpecError("a_j must be non-negative for 1 < j < J1");

  certificate_ = convexity_certificate(shape_, a_, beta_);
  if (lambda) {
    if (!(*lambda > 0.0))
      throw SpecError("lambda must be positive");
    if (*lambda > certificate_ * (1.0 + 1e-12))
      throw SpecError("lambda " + std::to_string(*lambda) + " exceeds the convexity certificate " +
                      std::to_string(certificate_));
    lambda_ = *lambda;
  } else {
    lambda_ = certificate_;
  }
}

DriftSpec
DriftSpec::quadratic(double a1)
{
  return DriftSpec(DriftShape{ 1, 1, {} }, { a1 }, BetaSpec::zero());
}

DriftParts
eval_drift_parts(const DriftSpec& spec, double y)
{
  const auto b = spec.beta().eval(y);
  DriftParts p{ b.value, b.first, b.second };
  for (std::size_t i = 0; i < spec.a().size(); ++i) {
    const auto f = basis_function(spec.shape(), i, y);
    p.phi += spec.a()[i] * f.value;
    p.phi_prime += spec.a()[i] * f.first;
    p.phi_double_prime += spec.a()[i] * f.second;
  }
  return p;
}

double
AlphaCoefficients::polynomial_sum() const
{
  double s = 0.0;
  for (int i = 0; i < j1; ++i)
    s += alpha[static_cast<std::size_t>(i)];
  return s;
}

double
AlphaCoefficients::trig_abs_sum() const
{
  double s = 0.0;
  for (std::size_t i = static_cast<std::size_t>(j1); i < alpha.size(); ++i)
    s += std::abs(alpha[i]);
  return s;
}

std::uint64_t
binomial(unsigned n, unsigned k)
{
  if (n > 62)
    throw std::out_of_range("binomial: n > 62");
  if (k > n)
    return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (unsigned i = 0; i < k; ++i)
    c = c * (n - i) / (i + 1);
  return static_cast<std::uint64_t>(c);
}

AlphaCoefficients
alpha_from_a(const DriftShape& shape,
             std::span<const double> a,
             std::span<const double> even_moments,
             std::span<const double> cf_at_theta)
{
  const auto j1 = static_cast<std::size_t>(shape.j1);
  const auto j = static_cast<std::size_t>(shape.j);
  if (a.size() != j)
    throw DimensionError("alpha_from_a: a must have J entries");
  if (even_moments.size() < j1)
    throw DimensionError("alpha_from_a: need even moments m_0..m_{2(J1-1)}");
  if (cf_at_theta.size() != shape.n_trig())
    throw DimensionError("alpha_from_a: need one cf value per frequency");

  AlphaCoefficients out;
  out.j1 = shape.j1;
  out.alpha.assign(j, 0.0);
  // Indices here are 1-based as in alpha_j = sum_{j<=k<=J1} C(2k,2j) m_{2(k-j)} a_k.
  for (std::size_t jj = 1; jj <= j1; ++jj) {
    double s = 0.0;
    for (std::size_t k = jj; k <= j1; ++k)
      s += static_cast<double>(binomial(static_cast<unsigned>(2 * k), static_cast<unsigned>(2 * jj))) *
           even_moments[k - jj] * a[k - 1];
    out.alpha[jj - 1] = s;
  }
  for (std::size_t i = 0; i < shape.n_trig(); ++i)
    out.alpha[j1 + i] = a[j1 + i] * cf_at_theta[i];
  if (even_moments.size() > j1) {
    double s = 0.0;
    for (std::size_t k = 1; k <= j1; ++k)
      s += even_moments[k] * a[k - 1];
    out.alpha0 = s;
  }
  return out;
}

AlphaCoefficients
alpha_from_a(const DriftSpec& spec, std::span<const double> even_moments, std::span<const double> cf_at_theta)
{
  return alpha_from_a(spec.shape(), spec.a(), even_moments, cf_at_theta);
}

std::vector<double>
a_from_alpha(const AlphaCoefficients& alpha,
             std::span<const double> even_moments,
             std::span<const double> cf_at_theta,
             double cf_tolerance)
{
  const auto j1 = static_cast<std::size_t>(alpha.j1);
  const std::size_t j = alpha.alpha.size();
  if (j < j1)
    throw DimensionError("a_from_alpha: alpha shorter than J1");
  if (even_moments.size() < j1)
    throw DimensionError("a_from_alpha: need even moments m_0..m_{2(J1-1)}");
  if (cf_at_theta.size() != j - j1)
    throw DimensionError("a_from_alpha: need one cf value per frequency");
  const double m0 = even_moments[0];
  if (!(m0 > 0.0))
    throw DimensionError("a_from_alpha: m_0 must be positive");

  std::vector<double> a(j, 0.0);
  for (std::size_t jj = j1; jj >= 1; --jj) {
    double s = alpha.alpha[jj - 1];
    for (std::size_t k = jj + 1; k <= j1; ++k)
      s -= static_cast<double>(binomial(static_cast<unsigned>(2 * k), static_cast<unsigned>(2 * jj))) *
           even_moments[k - jj] * a[k - 1];
    a[jj - 1] = s / m0;
  }
  for (std::size_t i = 0; i < j - j1; ++i) {
    if (!(std::abs(cf_at_theta[i]) > cf_tolerance))
      throw NonIdentifiableError("a_from_alpha: |cf(theta)| below tolerance at term " + std::to_string(j1 + i + 1),
                                 j1 + i);
    a[j1 + i] = alpha.alpha[j1 + i] / cf_at_theta[i];
  }
  return a;
}

} // namespace mvsde
