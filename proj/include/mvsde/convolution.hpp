#pragma once

#include "mvsde/grid_function.hpp"

#include <functional>
#include <memory>

namespace mvsde {

//! Discrete linear convolution of grid functions against a fixed kernel,
//!
//!   (K * f)(x_i) = sum_k w_k K(x_i - x_k) f(x_k),
//!
//! with trapezoid weights w_k. The kernel is sampled once at all node
//! offsets and the sum is evaluated by zero-padded FFT.
//!
//! An instance owns its FFTW buffers and must not be used from two threads
//! at once; separate instances are independent.
class LinearConvolver
{
public:
  LinearConvolver(GridShape shape, const std::function<double(double)>& kernel);
  ~LinearConvolver();
  LinearConvolver(LinearConvolver&&) noexcept;
  LinearConvolver& operator=(LinearConvolver&&) noexcept;
  LinearConvolver(const LinearConvolver&) = delete;
  LinearConvolver& operator=(const LinearConvolver&) = delete;

  const GridShape& shape() const;
  GridFunction apply(const GridFunction& f);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

//! Same sum evaluated directly in O(n^2); used as a reference.
GridFunction convolve_direct(const GridFunction& f, const std::function<double(double)>& kernel);

} // namespace mvsde
