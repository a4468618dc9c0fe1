#pragma once

#include "mvsde/grid_function.hpp"
#include "mvsde/model.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace mvsde {

struct InvariantOptions
{
  //! Grid half-width; default_half_width(spec) when unset.
  std::optional<double> half_width;
  std::size_t n_points = 4097;
  double tol = 1e-10;
  int max_iter = 500;
  double damping = 0.5;
};

struct InvariantSolution
{
  GridFunction density;
  //! Sup-norm fixed-point residual of `density`.
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
  //! log of Z = integral of exp(-(phi * pi)).
  double log_normalizer = 0.0;

  double normalizer() const;
};

//! 8 (2 a_1)^{-1/2} max(1, lambda^{-1/2}).
double default_half_width(const DriftSpec& spec);

//! Damped Picard iteration for pi = Z^{-1} exp(-(phi * pi)) starting from the
//! Gaussian with variance 1/(2 a_1). Every iterate is renormalized and made
//! exactly even. Throws ConvergenceError after max_iter.
InvariantSolution solve_invariant(const DriftSpec& spec, const InvariantOptions& options = {});

//! Convenience overload returning only the density.
GridFunction solve_invariant(const DriftSpec& spec,
                             double half_width,
                             std::size_t n_points,
                             double tol,
                             int max_iter,
                             double damping);

//! (phi * pi) on the grid of `pi`.
GridFunction potential_convolution(const DriftSpec& spec, const GridFunction& pi);
//! (phi' * pi) on the grid of `pi`.
GridFunction potential_derivative_convolution(const DriftSpec& spec, const GridFunction& pi);

//! pi'/pi with fourth-order central differences. Nodes where pi <= floor
//! are set to 0.
GridFunction log_density_derivative(const GridFunction& pi, double floor = 1e-250);

//! m_k = integral of y^k pi(y) for k = 0 .. k_max; odd moments are 0.
//! Logs a warning when tail mass beyond the grid could exceed 1e-10.
std::vector<double> moments(const GridFunction& pi, int k_max);

//! Even moments m_0, m_2, .., m_{2 k_max}.
std::vector<double> even_moments(const GridFunction& pi, int k_max);

//! Trapezoid approximation of the integral of e^{i z y} f(y).
std::complex<double> fourier(const GridFunction& f, double z);

//! Psi(y) = -(beta' * pi)(y).
GridFunction psi_oracle(const DriftSpec& spec, const GridFunction& pi);

//! alpha coefficients of phi * pi computed from the solved density.
AlphaCoefficients alpha_from_density(const DriftSpec& spec, const GridFunction& pi);

//! Trapezoid CDF of a density-role grid function at the nodes.
std::vector<double> cumulative(const GridFunction& pi);

//! Inverse-CDF draws from the piecewise-linear density through the nodes.
//! Draw i uses the counter (seed, stream, oracle_sample, 0, i).
std::vector<double> sample_from_density(const GridFunction& pi,
                                        std::size_t n,
                                        std::uint64_t seed,
                                        std::uint64_t stream = 0);

} // namespace mvsde
