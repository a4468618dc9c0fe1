#pragma once

#include "mvsde/grid_function.hpp"
#include "mvsde/invariant.hpp"
#include "mvsde/kde.hpp"
#include "mvsde/model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace mvsde {

//! Weight w on the rescaled contrast window; supported exactly on [eps, 1].
struct WeightFunction
{
  WeightKind kind = WeightKind::indicator;
  double epsilon = 0.25;

  double operator()(double s) const;
  //! Integral of w over [eps, 1].
  double integral() const;
};

//! Indicator of [eps, 1], or the C-infinity bump
//! exp(-1/((s - eps)(1 - s))) rescaled to peak value 1.
WeightFunction weight_function(WeightKind kind, double epsilon);

struct ContrastSystem
{
  Eigen::MatrixXd Q;
  Eigen::VectorXd rhs;
  double U = 1.0;
  double epsilon = 0.25;
  WeightFunction weight;
  double condition_number = 0.0;
};

//! Contrast functions at s:
//! -(phi_1'(s), .., phi_J1'(s), phi_{J1+1}'(U s), .., phi_J'(U s)).
Eigen::VectorXd contrast_functions(const DriftShape& shape, double U, double s);

//! Q = integral over [eps, 1] of l(s) l(s)^T w(s) by adaptive Gauss-Kronrod.
//! Warns above condition number 1e12. rhs is left empty.
ContrastSystem contrast_matrix(const DriftShape& shape, double U, const WeightFunction& weight);

struct AlphaFit
{
  std::vector<double> alpha;
  ContrastSystem system;
};

//! Minimum-contrast fit on the window [eps U, U]; with `symmetric` the
//! antisymmetrized l_hat is used, which folds in [-U, -eps U] as well.
//! Throws IllConditionedError when Q is not numerically positive definite.
AlphaFit fit_alpha_system(const GridFunction& l_hat,
                          double U,
                          const WeightFunction& weight,
                          const DriftShape& shape,
                          bool symmetric = false);

std::vector<double> fit_alpha(const GridFunction& l_hat,
                              double U,
                              const WeightFunction& weight,
                              const DriftShape& shape,
                              bool symmetric = false);

//! (1/N) sum_i Y_i^k, k = 0 .. k_max.
std::vector<double> empirical_moments(std::span<const double> samples, int k_max);

//! (1/N) sum_i exp(i z Y_i).
std::complex<double> empirical_cf(std::span<const double> samples, double z);

//! l(y, alpha) = -sum_j alpha_j phi_j'(y).
double parametric_log_derivative(const DriftShape& shape, std::span<const double> alpha, double y);

//! (l_hat - l(., alpha_hat)) 1{|y| <= eps U}.
GridFunction psi_estimate(const GridFunction& l_hat,
                          std::span<const double> alpha_hat,
                          const DriftShape& shape,
                          double epsilon,
                          double U);

using CharacteristicFunction = std::function<std::complex<double>(double)>;

struct DeconvolutionResult
{
  GridFunction beta_prime;
  std::vector<double> z;
  //! Estimated F(beta') at each z (zero where thresholded out).
  std::vector<std::complex<double>> spectrum;
  double surviving_fraction = 0.0;
  bool degenerate = false;
};

//! F(beta') = -F(Psi) conj(ecf) / |ecf|^2 on |z| <= z_max where |ecf| > omega,
//! inverted by the trapezoid rule on a uniform z grid of step at most dz
//! (default pi / (8 L)).
DeconvolutionResult deconvolve(const GridFunction& psi_hat,
                               const CharacteristicFunction& ecf,
                               double omega,
                               double z_max,
                               std::optional<double> dz = std::nullopt);

//! Quantities taken from a solved invariant density in oracle mode.
struct OracleContext
{
  AlphaCoefficients alpha;
  double normalizer = 1.0;
  double beta_sup = 0.0;
  GridFunction density;
};

OracleContext make_oracle(const DriftSpec& spec, const InvariantSolution& solution);

//! (c log n_eff)^{1/(2 J1)} with c = m / (4 (m + 2) alpha_bar_1), at least 1.
double default_contrast_range(const AlphaCoefficients& alpha, int m, double n_eff);
//! max(n_eff^{-1/4}, 1e-4).
double default_omega(double n_eff);
//! Smallest z > 0 with |F(pi)(z)| = 2 omega (omega when 2 omega >= 1);
//! `cap` when no crossing is found below it.
double oracle_frequency_cutoff(const GridFunction& pi, double omega, double cap = 50.0);

struct EstimationDiagnostics
{
  double condition_number = 0.0;
  double surviving_fraction = 0.0;
  bool degenerate = false;
  double delta = 0.0;
  double n_eff = 0.0;
  double h0 = 0.0;
  double h1 = 0.0;
  double U = 0.0;
  double omega = 0.0;
  double z_max = 0.0;
};

struct EstimationResult
{
  std::vector<double> alpha_hat;
  std::vector<double> a_hat;
  GridFunction pi_hat;
  GridFunction l_hat;
  GridFunction psi_hat;
  GridFunction beta_prime_hat;
  EstimationDiagnostics diagnostics;
};

//! Steps (i)-(iv). `oracle` is required when cfg.delta_mode is oracle and is
//! otherwise only used to fill unset tuning values. Sub-step failures are
//! rethrown as PipelineError labelled with the step.
EstimationResult run_pipeline(std::span<const double> samples,
                              const EstimatorConfig& cfg,
                              const DriftShape& shape,
                              const OracleContext* oracle = nullptr);

} // namespace mvsde
