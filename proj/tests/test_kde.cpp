#include "mvsde/kde.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mvsde;

namespace {

double
gauss(double y)
{
  return std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi);
}

std::vector<double>
normals(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> x(n);
  for (auto& v : x)
    v = nd(gen);
  return x;
}

} // namespace

TEST_CASE("kernel polynomials")
{
  CHECK(make_kernel(2).poly == std::vector<double>{ 1.0 });
  const auto k4 = make_kernel(4);
  REQUIRE(k4.poly.size() == 3);
  CHECK(k4.poly[0] == doctest::Approx(1.5));
  CHECK(k4.poly[1] == 0.0);
  CHECK(k4.poly[2] == doctest::Approx(-0.5));
  const auto k6 = make_kernel(6);
  // (15 - 10 y^2 + y^4) / 8
  CHECK(k6.eval(0.7) == doctest::Approx((15 - 10 * 0.49 + 0.2401) / 8.0 * gauss(0.7)));
  CHECK_THROWS(make_kernel(3));
  CHECK_THROWS(make_kernel(0));
  CHECK_THROWS(make_kernel(12));
}

TEST_CASE("kernel moments vanish below the order")
{
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  for (int m : { 2, 4, 6, 8, 10 }) {
    const auto K = make_kernel(m);
    for (int j = 0; j < m; ++j) {
      const double v = GK::integrate([&](double y) { return std::pow(y, j) * K.eval(y); }, -40.0, 40.0, 20, 1e-15);
      CHECK(std::abs(v - (j == 0 ? 1.0 : 0.0)) < 1e-9);
    }
    for (double y : { -2.1, 0.3, 1.7 })
      CHECK(K.derivative(y) == doctest::Approx((K.eval(y + 1e-6) - K.eval(y - 1e-6)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("bandwidth rules")
{
  const auto bw = default_bandwidths(1e4, 2);
  CHECK(bw.h0 == doctest::Approx(0.215443).epsilon(1e-5));
  CHECK(bw.h1 == doctest::Approx(0.316228).epsilon(1e-5));
  CHECK(effective_sample_size(1000, 0.0, 1.0) == doctest::Approx(1.0 / (1e-3 + 1.0)));
  CHECK(effective_sample_size(1000, 1e6, 1.0) == doctest::Approx(1000.0));
}

TEST_CASE("single-sample estimates are the scaled kernel")
{
  const std::vector<double> one{ 0.0 };
  const GridShape g{ 4.0, 81 };
  const auto K = make_kernel(2);
  const auto f = density_estimate(one, K, 1.0, g);
  const auto d = density_derivative_estimate(one, K, 1.0, g);
  CHECK(f.at(1.0) == doctest::Approx(0.24197072451914337));
  CHECK(d.at(1.0) == doctest::Approx(-0.24197072451914337));
  const auto f2 = density_estimate(one, K, 0.5, g);
  CHECK(f2.at(1.0) == doctest::Approx(2.0 * gauss(2.0)));
}

TEST_CASE("gridded estimates agree with the direct sum")
{
  const auto x = normals(3000, 8);
  const GridShape g{ 6.0, 601 };
  for (int m : { 2, 4 }) {
    const auto K = make_kernel(m);
    const double h = 0.3;
    const auto f = density_estimate(x, K, h, g);
    const auto d = density_derivative_estimate(x, K, h, g);
    for (std::size_t i = 0; i < g.n_points; i += 25) {
      double sf = 0.0, sd = 0.0;
      for (double xi : x) {
        sf += K.eval((g.x(i) - xi) / h);
        sd += K.derivative((g.x(i) - xi) / h);
      }
      sf /= x.size() * h;
      sd /= x.size() * h * h;
      CHECK(std::abs(f[i] - sf) < 1e-12);
      CHECK(std::abs(d[i] - sd) < 1e-12);
    }
    CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("thresholded log-derivative")
{
  const GridShape g{ 1.0, 5 };
  const GridFunction p(g, { 0.001, 0.2, 0.4, 0.2, 0.001 });
  const GridFunction dp(g, { 0.01, 0.3, 0.0, -0.3, -0.01 });
  const auto l = log_derivative_estimate(p, dp, 0.01);
  CHECK(l[0] == 0.0);
  CHECK(l[1] == doctest::Approx(1.5));
  CHECK(l[2] == 0.0);
  CHECK(l[3] == doctest::Approx(-1.5));
  CHECK(l[4] == 0.0);
}

TEST_CASE("threshold rule")
{
  AlphaCoefficients a;
  a.j1 = 1;
  a.alpha0 = 0.5;
  a.alpha = { 0.5, -0.2 };
  const double d = default_delta(a, 2.0, 0.3, 1.5);
  CHECK(d == doctest::Approx(std::exp(-0.5 - 0.2 - 0.3) / 4.0 * std::exp(-0.5 * 2.25)));
  a.alpha0.reset();
  CHECK_THROWS(default_delta(a, 2.0, 0.3, 1.5));
}

TEST_CASE("string conversions and validation")
{
  for (auto m : { DeltaMode::oracle, DeltaMode::plugin, DeltaMode::fixed })
    CHECK(delta_mode_from_string(to_string(m)) == m);
  CHECK(to_string(WeightKind::smooth_bump) == "smooth-bump");
  CHECK(weight_kind_from_string("indicator") == WeightKind::indicator);
  CHECK_THROWS(weight_kind_from_string("box"));

  EstimatorConfig c;
  CHECK_NOTHROW(validate(c));
  c.epsilon = 1.0;
  CHECK_THROWS(validate(c));
  c.epsilon = 0.25;
  c.delta_mode = DeltaMode::fixed;
  CHECK_THROWS(validate(c));
  c.delta = 1e-3;
  CHECK_NOTHROW(validate(c));
  c.delta_mode = DeltaMode::plugin;
  CHECK_THROWS(validate(c));
  c.m = 3;
  CHECK_THROWS(validate(c));
}
