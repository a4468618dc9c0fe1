#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mvsde {

//! Uniform symmetric grid -L..L with an odd number of points.
struct GridShape
{
  double half_width = 8.0;
  std::size_t n_points = 4097;

  double spacing() const { return 2.0 * half_width / static_cast<double>(n_points - 1); }
  double x(std::size_t i) const;
  std::size_t center() const { return n_points / 2; }
  bool operator==(const GridShape& other) const = default;
};

//! Throws std::invalid_argument unless L > 0 and n_points is odd and >= 3.
void validate(const GridShape& shape);

//! Real function tabulated on a GridShape.
//!
//! Densities, log-derivatives, Psi and beta' estimates all live here. Point
//! evaluation off the nodes uses local cubic Lagrange interpolation; outside
//! [-L, L] the function is taken to be zero.
class GridFunction
{
public:
  GridFunction() = default;
  explicit GridFunction(GridShape shape);
  GridFunction(GridShape shape, std::vector<double> values);

  static GridFunction sample(GridShape shape, const std::function<double(double)>& f);

  const GridShape& shape() const { return shape_; }
  double half_width() const { return shape_.half_width; }
  std::size_t size() const { return values_.size(); }
  double spacing() const { return shape_.spacing(); }
  double x(std::size_t i) const { return shape_.x(i); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double at(double y) const;
  double integral() const;
  double sup_norm() const;

  //! value(-y) = value(y) exactly, by averaging mirrored nodes.
  void symmetrize_even();
  //! value(-y) = -value(y) exactly; the center node becomes 0.
  void symmetrize_odd();

  bool same_grid(const GridFunction& other) const { return shape_ == other.shape_; }

private:
  GridShape shape_;
  std::vector<double> values_;
};

//! Trapezoid weights (times spacing) for an n-point grid.
std::vector<double> trapezoid_weights(const GridShape& shape);

//! Throws DimensionError when the two functions live on different grids.
void require_same_grid(const GridFunction& f, const GridFunction& g, const char* what);

} // namespace mvsde
