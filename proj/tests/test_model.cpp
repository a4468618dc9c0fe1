#include "mvsde/error.hpp"
#include "mvsde/model.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace mvsde;

namespace {

double
cos_bump(double b, double y)
{
  const double s = std::sin(0.5 * b * y);
  return 2.0 * s * s / (y * y);
}

double
central(const std::function<double(double)>& f, double y, double h = 1e-4)
{
  return (f(y + h) - f(y - h)) / (2.0 * h);
}

} // namespace

TEST_CASE("cos-bump values and derivatives")
{
  for (double b : { 0.5, 1.0, 2.0 }) {
    const auto beta = BetaSpec::cos_bump(b);
    CHECK(beta.eval(0.0).value == doctest::Approx(0.5 * b * b));
    CHECK(beta.eval(0.0).first == 0.0);
    CHECK(beta.eval(0.0).second == doctest::Approx(-b * b * b * b / 12.0));
    for (double y : { 1e-3, 0.3, 0.49, 0.51, 1.7, 6.0, -3.2 }) {
      const auto d = beta.eval(y);
      CHECK(d.value == doctest::Approx(cos_bump(b, y)).epsilon(1e-9));
      CHECK(d.first ==
            doctest::Approx(central([&](double t) { return cos_bump(b, t); }, y, 1e-5)).epsilon(1e-6).scale(1.0));
      CHECK(d.second == doctest::Approx(central([&](double t) { return beta.prime(t); }, y, 1e-5))
                          .epsilon(1e-6)
                          .scale(1.0));
    }
    CHECK(beta.sup_norm() == doctest::Approx(0.5 * b * b));
    CHECK(beta.inf_second_derivative() == doctest::Approx(-b * b * b * b / 12.0).epsilon(1e-8));
  }
}

TEST_CASE("sinc-power values and curvature floor")
{
  const auto s1 = BetaSpec::sinc_power(1);
  const auto s2 = BetaSpec::sinc_power(2);
  for (double y : { 1e-6, 0.2, 0.499, 0.501, 2.0, 7.5 }) {
    const double s = std::sin(y) / y;
    CHECK(s1.eval(y).value == doctest::Approx(s * s).epsilon(1e-12));
    CHECK(s2.eval(y).value == doctest::Approx(s * s * s * s).epsilon(1e-12));
    CHECK(s1.prime(y) ==
          doctest::Approx(central([](double t) { return std::pow(std::sin(t) / t, 2); }, y, 1e-5)).epsilon(1e-6).scale(1.0));
  }
  CHECK(s1.eval(0.0).value == 1.0);
  CHECK(s1.sup_norm() == doctest::Approx(1.0));
  CHECK(s1.inf_second_derivative() == doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
  CHECK(s2.inf_second_derivative() == doctest::Approx(-4.0 / 3.0).epsilon(1e-8));
  CHECK_THROWS(BetaSpec::sinc_power(0));
  CHECK_THROWS(BetaSpec::cos_bump(-1.0));
}

TEST_CASE("tabulated beta follows its table and is flat outside")
{
  const auto table = GridFunction::sample({ 4.0, 801 }, [](double y) { return std::exp(-y * y); });
  const auto beta = BetaSpec::tabulated(table);
  CHECK(beta.eval(0.7).value == doctest::Approx(std::exp(-0.49)).epsilon(1e-6));
  CHECK(beta.prime(0.7) == doctest::Approx(-1.4 * std::exp(-0.49)).epsilon(1e-4));
  CHECK(beta.prime(5.0) == 0.0);
  CHECK(beta.eval(5.0).second == 0.0);
}

TEST_CASE("family names round trip")
{
  for (auto f : { BetaFamily::zero, BetaFamily::cos_bump, BetaFamily::sinc_power, BetaFamily::tabulated })
    CHECK(beta_family_from_string(to_string(f)) == f);
  CHECK_THROWS(beta_family_from_string("gaussian"));
}

TEST_CASE("shape validation")
{
  CHECK_THROWS_AS(validate(DriftShape{ 0, 0, {} }), SpecError);
  CHECK_THROWS_AS(validate(DriftShape{ 2, 1, {} }), SpecError);
  CHECK_THROWS_AS(validate(DriftShape{ 1, 2, {} }), SpecError);
  CHECK_THROWS_AS(validate(DriftShape{ 1, 3, { 1.0, 1.0 } }), SpecError);
  CHECK_THROWS_AS(validate(DriftShape{ 1, 2, { -1.0 } }), SpecError);
  CHECK_NOTHROW(validate(DriftShape{ 2, 4, { 1.0, 2.0 } }));
}

TEST_CASE("basis functions")
{
  const DriftShape shape{ 2, 3, { 1.5 } };
  const auto q = basis_function(shape, 1, 1.3);
  CHECK(q.value == doctest::Approx(std::pow(1.3, 4)));
  CHECK(q.first == doctest::Approx(4 * std::pow(1.3, 3)));
  CHECK(q.second == doctest::Approx(12 * 1.3 * 1.3));
  const auto c = basis_function(shape, 2, 0.4);
  CHECK(c.value == doctest::Approx(std::cos(0.6)));
  CHECK(c.first == doctest::Approx(-1.5 * std::sin(0.6)));
  CHECK(c.second == doctest::Approx(-2.25 * std::cos(0.6)));
}

TEST_CASE("convexity certificate")
{
  const DriftSpec s(DriftShape{ 1, 2, { 2.0 } }, { 1.0, 0.2 }, BetaSpec::cos_bump(1.0));
  CHECK(s.certificate() == doctest::Approx(2.0 - 4.0 * 0.2 - 1.0 / 12.0).epsilon(1e-8));
  CHECK(s.lambda() == s.certificate());
  CHECK(convexity_certificate(DriftSpec::quadratic(0.7)) == doctest::Approx(1.4));
  CHECK_THROWS_AS(DriftSpec(DriftShape{ 1, 2, { 2.0 } }, { 0.5, 0.5 }, BetaSpec::zero()), SpecError);
  CHECK_THROWS_AS(DriftSpec(DriftShape{ 1, 1, {} }, { 0.5 }, BetaSpec::zero(), 2.0), SpecError);
  CHECK(DriftSpec(DriftShape{ 1, 1, {} }, { 0.5 }, BetaSpec::zero(), 0.5).lambda() == 0.5);
  CHECK_THROWS_AS(DriftSpec(DriftShape{ 1, 1, {} }, { 0.5, 1.0 }, BetaSpec::zero()), SpecError);
  CHECK_THROWS_AS(DriftSpec(DriftShape{ 2, 2, {} }, { 0.5, -0.1 }, BetaSpec::zero()), SpecError);
}

TEST_CASE("drift parts sum basis terms and beta")
{
  const DriftSpec s(DriftShape{ 2, 3, { 1.5 } }, { 0.6, 0.05, 0.2 }, BetaSpec::sinc_power(1));
  const double y = 0.8;
  const auto p = eval_drift_parts(s, y);
  const double expect = 0.6 * y * y + 0.05 * std::pow(y, 4) + 0.2 * std::cos(1.5 * y) + std::pow(std::sin(y) / y, 2);
  CHECK(p.phi == doctest::Approx(expect));
  CHECK(p.phi_prime ==
        doctest::Approx(central([&](double t) { return eval_drift_parts(s, t).phi; }, y, 1e-5)).epsilon(1e-7));
}

TEST_CASE("binomial")
{
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(62, 31) == 465428353255261088ULL);
  CHECK(binomial(5, 7) == 0);
  CHECK_THROWS_AS(binomial(63, 2), std::out_of_range);
}

TEST_CASE("a to alpha by hand")
{
  // phi = a1 y^2 + a2 y^4 + a3 cos(theta y) against an even law with
  // moments m2, m4 and characteristic function c at theta.
  const double a1 = 0.7, a2 = 0.1, a3 = 0.3, m2 = 1.3, m4 = 4.1, m6 = 20.0, c = 0.4;
  const DriftSpec s(DriftShape{ 2, 3, { 1.0 } }, { a1, a2, a3 }, BetaSpec::zero());
  const std::vector<double> m{ 1.0, m2, m4, m6 };
  const std::vector<double> cf{ c };
  const auto alpha = alpha_from_a(s, m, cf);
  REQUIRE(alpha.alpha.size() == 3);
  CHECK(alpha.alpha[0] == doctest::Approx(a1 + 6.0 * a2 * m2));
  CHECK(alpha.alpha[1] == doctest::Approx(a2));
  CHECK(alpha.alpha[2] == doctest::Approx(a3 * c));
  REQUIRE(alpha.alpha0);
  CHECK(*alpha.alpha0 == doctest::Approx(a1 * m2 + a2 * m4));
  CHECK(alpha.polynomial_sum() == doctest::Approx(a1 + 6.0 * a2 * m2 + a2));
  CHECK(alpha.trig_abs_sum() == doctest::Approx(a3 * c));

  const auto back = a_from_alpha(alpha, m, cf);
  CHECK(back[0] == doctest::Approx(a1).epsilon(1e-14));
  CHECK(back[1] == doctest::Approx(a2).epsilon(1e-14));
  CHECK(back[2] == doctest::Approx(a3).epsilon(1e-14));

  const std::vector<double> m_short{ 1.0, m2 };
  CHECK(alpha_from_a(DriftSpec::quadratic(a1), m_short, {}).alpha0.has_value());
  CHECK_FALSE(alpha_from_a(s, m_short, cf).alpha0.has_value());
}

TEST_CASE("vanishing characteristic function is not identifiable")
{
  AlphaCoefficients alpha;
  alpha.j1 = 1;
  alpha.alpha = { 0.5, 0.1 };
  const std::vector<double> m{ 1.0, 1.0 };
  const std::vector<double> cf{ 1e-12 };
  try {
    (void)a_from_alpha(alpha, m, cf);
    FAIL("expected NonIdentifiableError");
  } catch (const NonIdentifiableError& e) {
    CHECK(e.index() == 1);
  }
}
