#include "mvsde/convolution.hpp"

#include "mvsde/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <vector>

namespace mvsde {

namespace {

// FFTW's planner is not re-entrant.
std::mutex&
planner_mutex()
{
  static std::mutex m;
  return m;
}

std::size_t
padded_size(std::size_t n)
{
  std::size_t p = 1;
  while (p < 3 * n - 2)
    p <<= 1;
  return p;
}

} // namespace

struct LinearConvolver::Impl
{
  GridShape shape;
  std::size_t padded = 0;
  std::vector<double> weights;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  std::vector<double> kernel_re;
  std::vector<double> kernel_im;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl()
  {
    std::lock_guard lock(planner_mutex());
    if (forward)
      fftw_destroy_plan(forward);
    if (backward)
      fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spectrum);
  }
};

LinearConvolver::LinearConvolver(GridShape shape, const std::function<double(double)>& kernel)
  : impl_(std::make_unique<Impl>())
{
  validate(shape);
  auto& s = *impl_;
  s.shape = shape;
  const std::size_t n = shape.n_points;
  s.padded = padded_size(n);
  s.weights = trapezoid_weights(shape);
  const std::size_t n_freq = s.padded / 2 + 1;
  s.real = fftw_alloc_real(s.padded);
  s.spectrum = fftw_alloc_complex(n_freq);
  {
    std::lock_guard lock(planner_mutex());
    const int p = static_cast<int>(s.padded);
    s.forward = fftw_plan_dft_r2c_1d(p, s.real, s.spectrum, FFTW_ESTIMATE);
    s.backward = fftw_plan_dft_c2r_1d(p, s.spectrum, s.real, FFTW_ESTIMATE);
  }

  // Kernel at offsets d = -(n-1) .. n-1, stored at index d + n - 1.
  const double h = shape.spacing();
  std::fill(s.real, s.real + s.padded, 0.0);
  const auto ni = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t d = -(ni - 1); d <= ni - 1; ++d)
    s.real[d + ni - 1] = kernel(static_cast<double>(d) * h);
  fftw_execute(s.forward);
  s.kernel_re.resize(n_freq);
  s.kernel_im.resize(n_freq);
  for (std::size_t k = 0; k < n_freq; ++k) {
    s.kernel_re[k] = s.spectrum[k][0];
    s.kernel_im[k] = s.spectrum[k][1];
  }
}

LinearConvolver::~LinearConvolver() = default;
LinearConvolver::LinearConvolver(LinearConvolver&&) noexcept = default;
LinearConvolver& LinearConvolver::operator=(LinearConvolver&&) noexcept = default;

const GridShape&
LinearConvolver::shape() const
{
  return impl_->shape;
}

GridFunction
LinearConvolver::apply(const GridFunction& f)
{
  auto& s = *impl_;
  if (!(f.shape() == s.shape))
    throw DimensionError("LinearConvolver: grid mismatch");
  const std::size_t n = s.shape.n_points;
  std::fill(s.real, s.real + s.padded, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    s.real[k] = s.weights[k] * f[k];
  fftw_execute(s.forward);
  const std::size_t n_freq = s.padded / 2 + 1;
  for (std::size_t k = 0; k < n_freq; ++k) {
    const double re = s.spectrum[k][0];
    const double im = s.spectrum[k][1];
    s.spectrum[k][0] = re * s.kernel_re[k] - im * s.kernel_im[k];
    s.spectrum[k][1] = re * s.kernel_im[k] + im * s.kernel_re[k];
  }
  fftw_execute(s.backward);
  GridFunction out(s.shape);
  const double scale = 1.0 / static_cast<double>(s.padded);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = s.real[i + n - 1] * scale;
  return out;
}

GridFunction
convolve_direct(const GridFunction& f, const std::function<double(double)>& kernel)
{
  const std::size_t n = f.size();
  const auto w = trapezoid_weights(f.shape());
  GridFunction out(f.shape());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      s += w[k] * f[k] * kernel(f.x(i) - f.x(k));
    out[i] = s;
  }
  return out;
}

} // namespace mvsde
