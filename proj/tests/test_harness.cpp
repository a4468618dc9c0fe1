#include "mvsde/harness.hpp"
#include "mvsde/invariant.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

using namespace mvsde;

namespace {

// Brute-force integral of |F_x - F_y| on a fine grid.
double
w1_by_cdf(std::vector<double> x, std::vector<double> y)
{
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double lo = std::min(x.front(), y.front()), hi = std::max(x.back(), y.back());
  const int n = 400000;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = lo + (i + 0.5) * h;
    const double fx = double(std::upper_bound(x.begin(), x.end(), t) - x.begin()) / x.size();
    const double fy = double(std::upper_bound(y.begin(), y.end(), t) - y.begin()) / y.size();
    s += std::abs(fx - fy) * h;
  }
  return s;
}

} // namespace

TEST_CASE("empirical W1")
{
  CHECK(wasserstein1_empirical(std::vector<double>{ 0.0 }, std::vector<double>{ 1.0, 2.0 }) == doctest::Approx(1.5));
  CHECK(wasserstein1_empirical(std::vector<double>{ 3.0, 1.0 }, std::vector<double>{ 0.0, 2.0 }) == doctest::Approx(1.0));
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  std::vector<double> x(37), y(53);
  for (auto& v : x)
    v = nd(gen);
  for (auto& v : y)
    v = 0.5 + 2.0 * nd(gen);
  CHECK(wasserstein1_empirical(x, y) == doctest::Approx(w1_by_cdf(x, y)).epsilon(1e-4));
  CHECK(wasserstein1_empirical(x, y) == doctest::Approx(wasserstein1_empirical(y, x)).epsilon(1e-14));
  CHECK_THROWS(wasserstein1_empirical(std::vector<double>{}, y));
}

TEST_CASE("W1 to a density")
{
  const auto pi = solve_invariant(DriftSpec::quadratic(0.5)).density;
  // A point mass at 0 against N(0, 1): E|X|.
  CHECK(wasserstein1_to_density(std::vector<double>{ 0.0 }, pi) == doctest::Approx(0.7978845608028654).epsilon(1e-5));
  CHECK(wasserstein1_to_density(std::vector<double>{ 2.0 }, pi) ==
        doctest::Approx(2.0 * (2.0 * 0.9772498680518208 - 1.0) + 2.0 * 0.05399096651318806).epsilon(1e-5));
}

TEST_CASE("L2 grid error")
{
  const GridShape g{ 1.0, 101 };
  const auto f = GridFunction::sample(g, [](double y) { return y; });
  const GridFunction z(g);
  CHECK(l2_grid_error(f, z) == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
  CHECK_THROWS(l2_grid_error(f, GridFunction(GridShape{ 1.0, 11 })));
}

TEST_CASE("tail functional")
{
  const auto b1 = BetaSpec::cos_bump(1.0);
  // Averaged tails give 2b/(pi y) and b^2/(6 y^3), hence this limit at p = 3/2.
  const double limit = 2.0 / std::numbers::pi + 1.0 / std::sqrt(6.0);
  CHECK(tail_functional_phi(b1, 1.5, 2000.0) == doctest::Approx(limit).epsilon(2e-3));
  CHECK(tail_functional_phi(b1, 1.0, 10.0) < tail_functional_phi(b1, 1.0, 5.0));
  CHECK(tail_functional_phi(BetaSpec::zero(), 1.0, 1.0) == 0.0);
  // Grid version on a grid wide enough that the cut-off tail is negligible.
  const auto s = BetaSpec::sinc_power(2);
  const auto grid = GridFunction::sample({ 400.0, 400001 }, [&](double y) { return s.prime(y); });
  CHECK(tail_functional_phi(grid, 1.0, 3.0) == doctest::Approx(tail_functional_phi(s, 1.0, 3.0)).epsilon(1e-4));
}

TEST_CASE("OLS slope")
{
  const std::vector<double> x{ 1, 2, 3, 4 }, y{ 3, 1, -1, -3 };
  CHECK(ols_slope(x, y) == doctest::Approx(-2.0));
}

TEST_CASE("replication streams are distinct")
{
  std::vector<std::uint64_t> s;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t r = 0; r < 10; ++r)
        s.push_back(replication_stream(i, t, r));
  std::sort(s.begin(), s.end());
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
}

TEST_CASE("metrics round trip and rate report")
{
  std::vector<MetricsRow> rows;
  for (std::size_t n : { 100u, 400u, 1600u })
    for (std::size_t r = 0; r < 3; ++r) {
      MetricsRow m;
      m.n = n;
      m.t = 5.0;
      m.replication = r;
      m.w1_to_oracle = 1.0 / std::sqrt(double(n));
      m.l2_beta_prime_error = 10.0 / double(n);
      m.l2_psi_error = 0.1;
      m.alpha_error_norm = 0.1 / 3.0;
      m.a_error_norm = std::numeric_limits<double>::quiet_NaN();
      m.runtime_seconds = 1.25;
      rows.push_back(m);
    }
  rows[4].status = "error: step (ii): singular";

  std::stringstream ss;
  write_metrics_csv(ss, rows);
  CHECK(ss.str().rfind("# mvsde-metrics v1", 0) == 0);
  CHECK(ss.str().find("runtime") == std::string::npos);
  const auto back = read_metrics_csv(ss);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].status == rows[i].status);
    CHECK(back[i].w1_to_oracle == rows[i].w1_to_oracle);
    CHECK(back[i].alpha_error_norm == rows[i].alpha_error_norm);
    CHECK(std::isnan(back[i].a_error_norm));
  }

  std::stringstream ts;
  write_timings_csv(ts, rows);
  CHECK(ts.str().find("1.25") != std::string::npos);

  const auto rep = rate_report(rows);
  REQUIRE(rep.cells.size() == 3);
  CHECK(rep.cells[1].failures == 1);
  CHECK(rep.cells[1].count == 2);
  CHECK(rep.w1_squared_slope.at(5.0) == doctest::Approx(-1.0).epsilon(1e-10));
  REQUIRE(rep.l2_beta_prime_ratios.at(5.0).size() == 2);
  CHECK(rep.l2_beta_prime_ratios.at(5.0)[0] == doctest::Approx(0.25));
  std::stringstream out;
  write_report(out, rep);
  CHECK_FALSE(out.str().empty());

  rows.resize(3);
  CHECK_THROWS(rate_report(rows));
}

TEST_CASE("small experiment")
{
  ExperimentPlan plan;
  plan.n_list = { 50, 100 };
  plan.t_list = { 0.5 };
  plan.dt = 0.05;
  plan.replications = 2;
  plan.estimator.grid = { 8.0, 513 };
  const auto rows = run_experiment(plan);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].n == 50);
  CHECK(rows[1].replication == 1);
  CHECK(rows[3].n == 100);
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    CHECK(std::isfinite(r.w1_to_oracle));
    CHECK(std::isfinite(r.l2_beta_prime_error));
  }
  const auto again = run_experiment(plan);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].w1_to_oracle == rows[i].w1_to_oracle);
    CHECK(again[i].l2_beta_prime_error == rows[i].l2_beta_prime_error);
  }
  plan.replications = 0;
  CHECK_THROWS(validate(plan));
}
