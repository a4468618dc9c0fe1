#include "mvsde/grid_function.hpp"

#include "mvsde/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvsde {

double
GridShape::x(std::size_t i) const
{
  // Anchored at the center node so that mirrored nodes are exact negatives.
  const auto c = static_cast<double>(center());
  return (static_cast<double>(i) - c) * spacing();
}

void
validate(const GridShape& shape)
{
  if (!(shape.half_width > 0.0) || !std::isfinite(shape.half_width))
    throw std::invalid_argument("grid half-width must be positive and finite");
  if (shape.n_points < 3 || shape.n_points % 2 == 0)
    throw std::invalid_argument("grid n_points must be odd and >= 3");
}

GridFunction::GridFunction(GridShape shape)
  : GridFunction(shape, std::vector<double>(shape.n_points, 0.0))
{}

GridFunction::GridFunction(GridShape shape, std::vector<double> values)
  : shape_(shape)
  , values_(std::move(values))
{
  validate(shape_);
  if (values_.size() != shape_.n_points)
    throw DimensionError("grid function has " + std::to_string(values_.size()) +
                         " values for " + std::to_string(shape_.n_points) + " nodes");
}

GridFunction
GridFunction::sample(GridShape shape, const std::function<double(double)>& f)
{
  GridFunction g(shape);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = f(g.x(i));
  return g;
}

double
GridFunction::at(double y) const
{
  const double h = spacing();
  const double L = half_width();
  if (!(std::abs(y) <= L))
    return 0.0;
  const double s = (y + L) / h;
  const auto n = static_cast<std::ptrdiff_t>(size());
  auto k = static_cast<std::ptrdiff_t>(std::floor(s));
  k = std::clamp<std::ptrdiff_t>(k, 0, n - 2);
  const double t = s - static_cast<double>(k);
  if (t == 0.0)
    return values_[static_cast<std::size_t>(k)];

  // Four-point stencil k-1..k+2, shifted inward at the edges.
  std::ptrdiff_t first = std::clamp<std::ptrdiff_t>(k - 1, 0, n - 4);
  const double u = s - static_cast<double>(first);
  double result = 0.0;
  for (int a = 0; a < 4; ++a) {
    double basis = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (b != a)
        basis *= (u - b) / static_cast<double>(a - b);
    }
    result += basis * values_[static_cast<std::size_t>(first + a)];
  }
  return result;
}

double
GridFunction::integral() const
{
  double sum = 0.5 * (values_.front() + values_.back());
  for (std::size_t i = 1; i + 1 < values_.size(); ++i)
    sum += values_[i];
  return sum * spacing();
}

double
GridFunction::sup_norm() const
{
  double m = 0.0;
  for (double v : values_)
    m = std::max(m, std::abs(v));
  return m;
}

void
GridFunction::symmetrize_even()
{
  const std::size_t n = size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double avg = 0.5 * (values_[i] + values_[n - 1 - i]);
    values_[i] = avg;
    values_[n - 1 - i] = avg;
  }
}

void
GridFunction::symmetrize_odd()
{
  const std::size_t n = size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double avg = 0.5 * (values_[n - 1 - i] - values_[i]);
    values_[i] = -avg;
    values_[n - 1 - i] = avg;
  }
  values_[n / 2] = 0.0;
}

std::vector<double>
trapezoid_weights(const GridShape& shape)
{
  std::vector<double> w(shape.n_points, shape.spacing());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

void
require_same_grid(const GridFunction& f, const GridFunction& g, const char* what)
{
  if (!f.same_grid(g))
    throw DimensionError(std::string(what) + ": grid mismatch");
}

} // namespace mvsde
