#include "mvsde/convolution.hpp"
#include "mvsde/error.hpp"
#include "mvsde/harness.hpp"
#include "mvsde/invariant.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mvsde;

namespace {

double
normal_pdf(double y, double var)
{
  return std::exp(-0.5 * y * y / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

const DriftSpec&
bump_spec()
{
  static const DriftSpec s(DriftShape{ 1, 1, {} }, { 0.5 }, BetaSpec::cos_bump(1.0));
  return s;
}

} // namespace

TEST_CASE("quadratic potential gives the centered Gaussian")
{
  for (double a1 : { 0.5, 2.0 }) {
    const auto sol = solve_invariant(DriftSpec::quadratic(a1));
    const double var = 1.0 / (2.0 * a1);
    double sup = 0.0;
    for (std::size_t i = 0; i < sol.density.size(); ++i)
      sup = std::max(sup, std::abs(sol.density[i] - normal_pdf(sol.density.x(i), var)));
    CHECK(sup < 1e-8);
    const auto m = moments(sol.density, 4);
    CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m[1] == 0.0);
    CHECK(m[2] == doctest::Approx(var).epsilon(1e-9));
    CHECK(m[4] == doctest::Approx(3 * var * var).epsilon(1e-9));
    CHECK(sol.residual < 1e-10);
  }
  CHECK(default_half_width(DriftSpec::quadratic(0.5)) == doctest::Approx(8.0));
  CHECK(default_half_width(DriftSpec::quadratic(2.0)) == doctest::Approx(4.0));
  const DriftSpec soft(DriftShape{ 1, 1, {} }, { 0.5 }, BetaSpec::zero(), 0.25);
  CHECK(default_half_width(soft) == doctest::Approx(16.0));
}

TEST_CASE("interacting solution is a fixed point")
{
  const auto sol = solve_invariant(bump_spec());
  const auto& pi = sol.density;
  CHECK(sol.iterations > 1);
  CHECK(pi.integral() == doctest::Approx(1.0).epsilon(1e-12));
  // Recompute the map independently with the direct convolution.
  const auto& spec = bump_spec();
  const auto v = convolve_direct(pi, [&](double y) { return eval_drift_parts(spec, y).phi; });
  GridFunction next(pi.shape());
  for (std::size_t i = 0; i < pi.size(); ++i)
    next[i] = std::exp(-v[i]);
  const double z = next.integral();
  double sup = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i)
    sup = std::max(sup, std::abs(next[i] / z - pi[i]));
  CHECK(sup < 1e-9);
  CHECK(std::log(z) == doctest::Approx(sol.log_normalizer).epsilon(1e-8));
  for (std::size_t i = 0; i < pi.size(); ++i)
    REQUIRE(pi[i] == pi[pi.size() - 1 - i]);
}

TEST_CASE("residuals decrease for the interacting example")
{
  const auto sol = solve_invariant(bump_spec());
  REQUIRE(sol.residual_history.size() >= 2);
  for (std::size_t k = 1; k < sol.residual_history.size(); ++k)
    CHECK(sol.residual_history[k] <= sol.residual_history[k - 1]);
}

TEST_CASE("iteration cap raises ConvergenceError")
{
  InvariantOptions o;
  o.max_iter = 2;
  try {
    (void)solve_invariant(bump_spec(), o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 2);
    CHECK(e.last_residual() > o.tol);
  }
}

TEST_CASE("four-parameter overload")
{
  const auto pi = solve_invariant(DriftSpec::quadratic(0.5), 8.0, 1025, 1e-10, 100, 0.5);
  CHECK(pi.size() == 1025);
  CHECK(pi.at(0.0) == doctest::Approx(normal_pdf(0.0, 1.0)).epsilon(1e-8));
}

TEST_CASE("potential convolutions against direct sums")
{
  const DriftSpec spec(DriftShape{ 2, 3, { 1.5 } }, { 0.6, 0.05, 0.2 }, BetaSpec::sinc_power(1));
  const auto pi = solve_invariant(spec, InvariantOptions{ 8.0, 1025 }).density;
  const auto v = potential_convolution(spec, pi);
  const auto dv = potential_derivative_convolution(spec, pi);
  const auto v_ref = convolve_direct(pi, [&](double y) { return eval_drift_parts(spec, y).phi; });
  const auto dv_ref = convolve_direct(pi, [&](double y) { return eval_drift_parts(spec, y).phi_prime; });
  for (std::size_t i = 0; i < pi.size(); i += 16) {
    CHECK(v[i] == doctest::Approx(v_ref[i]).epsilon(1e-10));
    CHECK(dv[i] == doctest::Approx(dv_ref[i]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("log-derivative, Fourier transform and CDF of the Gaussian")
{
  const auto pi = solve_invariant(DriftSpec::quadratic(0.5)).density;
  const auto l = log_density_derivative(pi);
  for (double y : { -5.0, -1.0, 0.0, 0.5, 3.0 })
    CHECK(l.at(y) == doctest::Approx(-y).epsilon(1e-8).scale(1.0));
  for (double z : { 0.0, 0.5, 1.0, 3.0 }) {
    const auto f = fourier(pi, z);
    CHECK(f.real() == doctest::Approx(std::exp(-0.5 * z * z)).epsilon(1e-10));
    CHECK(std::abs(f.imag()) < 1e-14);
  }
  const auto F = cumulative(pi);
  CHECK(F.front() == 0.0);
  CHECK(F.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(F[pi.shape().center()] == doctest::Approx(0.5).epsilon(1e-12));
  const auto m = even_moments(pi, 3);
  CHECK(m[3] == doctest::Approx(15.0).epsilon(1e-8));
}

TEST_CASE("psi oracle is odd and equals minus beta' convolved with pi")
{
  const auto pi = solve_invariant(bump_spec()).density;
  const auto psi = psi_oracle(bump_spec(), pi);
  const auto ref = convolve_direct(pi, [](double y) { return BetaSpec::cos_bump(1.0).prime(y); });
  for (std::size_t i = 0; i < pi.size(); i += 41) {
    CHECK(psi[i] == doctest::Approx(-ref[i]).epsilon(1e-10).scale(1.0));
    CHECK(psi[i] == -psi[pi.size() - 1 - i]);
  }
}

TEST_CASE("alpha from the solved Gaussian")
{
  const auto pi = solve_invariant(DriftSpec::quadratic(0.5)).density;
  const auto alpha = alpha_from_density(DriftSpec::quadratic(0.5), pi);
  CHECK(alpha.alpha[0] == doctest::Approx(0.5));
  REQUIRE(alpha.alpha0);
  CHECK(*alpha.alpha0 == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("inverse-CDF sampling")
{
  const auto pi = solve_invariant(DriftSpec::quadratic(0.5)).density;
  const auto y = sample_from_density(pi, 50000, 3, 1);
  CHECK(y == sample_from_density(pi, 50000, 3, 1));
  CHECK(y != sample_from_density(pi, 50000, 3, 2));
  double s2 = 0.0;
  for (double v : y)
    s2 += v * v;
  CHECK(s2 / 50000.0 == doctest::Approx(1.0).epsilon(0.03));
  CHECK(wasserstein1_to_density(y, pi) < 0.02);
}
