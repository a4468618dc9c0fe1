#include "mvsde/error.hpp"
#include "mvsde/grid_function.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace mvsde;

TEST_CASE("grid geometry")
{
  const GridShape g{ 2.0, 5 };
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.x(0) == -2.0);
  CHECK(g.x(2) == 0.0);
  CHECK(g.x(4) == 2.0);
  CHECK(g.center() == 2);
  CHECK_THROWS_AS(validate(GridShape{ 1.0, 4 }), std::invalid_argument);
  CHECK_THROWS_AS(validate(GridShape{ -1.0, 5 }), std::invalid_argument);
  CHECK_NOTHROW(validate(GridShape{ 1.0, 3 }));
}

TEST_CASE("trapezoid integral of a Gaussian")
{
  const auto f = GridFunction::sample({ 10.0, 2001 },
                                      [](double y) { return std::exp(-0.5 * y * y) / std::sqrt(2 * std::numbers::pi); });
  CHECK(std::abs(f.integral() - 1.0) < 1e-12);
  CHECK(f.sup_norm() == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
  const auto w = trapezoid_weights(f.shape());
  CHECK(w.front() == doctest::Approx(0.5 * f.spacing()));
  CHECK(w[1] == doctest::Approx(f.spacing()));
}

TEST_CASE("cubic interpolation reproduces cubics and vanishes outside")
{
  auto cubic = [](double y) { return 1.0 - 2.0 * y + 0.5 * y * y * y; };
  const auto f = GridFunction::sample({ 3.0, 61 }, cubic);
  for (double y : { -2.93, -1.01, 0.0, 0.337, 2.5, 2.99 })
    CHECK(f.at(y) == doctest::Approx(cubic(y)).epsilon(1e-12));
  CHECK(f.at(3.5) == 0.0);
  CHECK(f.at(-3.01) == 0.0);
}

TEST_CASE("symmetrization")
{
  auto f = GridFunction::sample({ 1.0, 11 }, [](double y) { return y + y * y; });
  auto even = f;
  even.symmetrize_even();
  auto odd = f;
  odd.symmetrize_odd();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double y = f.x(i);
    CHECK(even[i] == doctest::Approx(y * y));
    CHECK(odd[i] == doctest::Approx(y));
    CHECK(even[i] == even[f.size() - 1 - i]);
    CHECK(odd[i] == -odd[f.size() - 1 - i]);
  }
  CHECK(odd[f.shape().center()] == 0.0);
}

TEST_CASE("grid compatibility")
{
  const GridFunction a(GridShape{ 1.0, 11 }), b(GridShape{ 1.0, 13 });
  CHECK_THROWS_AS(require_same_grid(a, b, "test"), DimensionError);
  CHECK_NOTHROW(require_same_grid(a, a, "test"));
  CHECK_THROWS(GridFunction(GridShape{ 1.0, 11 }, std::vector<double>(10)));
}
