#pragma once

#include "mvsde/grid_function.hpp"
#include "mvsde/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvsde {

//! Gaussian-based kernel of even order m, K(y) = P(y) g(y) with g the
//! standard normal density and P = sum_{j < m/2} (-1)^j He_{2j} / (2^j j!).
struct KernelSpec
{
  int order = 2;
  //! Coefficients of P in increasing powers of y.
  std::vector<double> poly;

  double eval(double y) const;
  double derivative(double y) const;
};

//! Throws std::invalid_argument unless m is even and 2 <= m <= 10.
KernelSpec make_kernel(int m);

struct Bandwidths
{
  double h0 = 1.0;
  double h1 = 1.0;
};

//! h0 = n_eff^{-1/(2(m+1))}, h1 = n_eff^{-1/(2(m+2))}.
Bandwidths default_bandwidths(double n_eff, int m);

//! (1/N + exp(-lambda T))^{-1}.
double effective_sample_size(std::size_t n_particles, double horizon, double lambda);

//! (1/N) sum_i K_h(y - Y_i) on the grid.
GridFunction density_estimate(std::span<const double> samples, const KernelSpec& kernel, double h, const GridShape& grid);

//! Exact y-derivative of density_estimate at bandwidth h.
GridFunction density_derivative_estimate(std::span<const double> samples,
                                         const KernelSpec& kernel,
                                         double h,
                                         const GridShape& grid);

//! (pi'/pi) 1{pi > delta}; exactly 0 where pi <= delta.
GridFunction log_derivative_estimate(const GridFunction& pi_hat, const GridFunction& pi_prime_hat, double delta);

//! delta_0 exp(-alpha_bar_1 U^{2 J1}) with
//! delta_0 = exp(-alpha_0 - sum_{j > J1} |alpha_j| - ||beta||_inf) / (2 Z).
//! Requires alpha.alpha0.
double default_delta(const AlphaCoefficients& alpha, double normalizer, double beta_sup, double U);

enum class DeltaMode
{
  oracle,
  plugin,
  fixed
};

std::string to_string(DeltaMode mode);
DeltaMode delta_mode_from_string(const std::string& name);

enum class WeightKind
{
  indicator,
  smooth_bump
};

std::string to_string(WeightKind kind);
WeightKind weight_kind_from_string(const std::string& name);

//! Quantities behind the delta rule when they are not taken from a solved
//! density: alpha (with alpha0), Z and a bound on ||beta||_inf.
struct PluginInputs
{
  AlphaCoefficients alpha;
  double normalizer = 1.0;
  double beta_sup = 0.0;
};

//! Tuning of the four-step estimator. Unset fields are resolved by
//! run_pipeline from the data size, the oracle or the plug-in inputs.
struct EstimatorConfig
{
  int m = 4;
  std::optional<double> h0;
  std::optional<double> h1;
  DeltaMode delta_mode = DeltaMode::oracle;
  std::optional<double> delta;
  std::optional<PluginInputs> plugin;
  std::optional<double> U;
  double epsilon = 0.25;
  WeightKind weight = WeightKind::indicator;
  //! Use both sides of the contrast window (antisymmetrized l_hat).
  bool symmetric_contrast = false;
  std::optional<double> omega;
  std::optional<double> z_max;
  std::optional<double> n_eff;
  GridShape grid{};
};

//! Throws std::invalid_argument for values out of their stated ranges.
void validate(const EstimatorConfig& cfg);

} // namespace mvsde
