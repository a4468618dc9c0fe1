#pragma once

#include "mvsde/grid_function.hpp"
#include "mvsde/kde.hpp"
#include "mvsde/model.hpp"
#include "mvsde/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvsde {

//! W1 between two empirical measures. Equal sizes use the sorted coupling;
//! otherwise the quantile functions are compared exactly on the merged
//! breakpoints. Throws std::invalid_argument on empty input.
double wasserstein1_empirical(std::span<const double> x, std::span<const double> y);

//! Integral of |F_N(t) - F_pi(t)| with F_pi the trapezoid CDF of `pi`
//! (piecewise quadratic between nodes).
double wasserstein1_to_density(std::span<const double> samples, const GridFunction& pi);

//! Trapezoid integral of |f - g|^2.
double l2_grid_error(const GridFunction& f, const GridFunction& g);

//! y^{p - 1/2} int_y^inf |beta'| + y^p (int_y^inf |beta'|^2)^{1/2} over the
//! grid (no contribution beyond L).
double tail_functional_phi(const GridFunction& beta_prime, double p, double y);

//! Same functional for an analytic beta: adaptive quadrature up to a far
//! point, then the averaged asymptotic tail of |beta'| and |beta'|^2.
double tail_functional_phi(const BetaSpec& beta, double p, double y);

struct ExperimentPlan
{
  DriftSpec spec = DriftSpec::quadratic(0.5);
  std::vector<std::size_t> n_list{ 100 };
  std::vector<double> t_list{ 10.0 };
  double dt = 0.01;
  std::size_t replications = 1;
  InitialLaw mu0{};
  EstimatorConfig estimator{};
  //! Skip steps (i)-(iv) and record W1 only.
  bool run_estimator = true;
  std::uint64_t base_seed = 1;
  std::string outputs = ".";
};

void validate(const ExperimentPlan& plan);

struct MetricsRow
{
  std::size_t n = 0;
  double t = 0.0;
  std::size_t replication = 0;
  //! "ok", or a label for the failure that produced the row.
  std::string status = "ok";
  double w1_to_oracle = 0.0;
  double l2_beta_prime_error = 0.0;
  double l2_psi_error = 0.0;
  double alpha_error_norm = 0.0;
  double a_error_norm = 0.0;
  double runtime_seconds = 0.0;
};

//! Stream id of replication r at (N index, T index).
std::uint64_t replication_stream(std::size_t n_index, std::size_t t_index, std::size_t replication);

//! simulate -> project -> run_pipeline -> metrics against the solved
//! oracle, for every (N, T, replication). Replications run concurrently;
//! rows come back ordered by (N index, T index, replication). A failed
//! replication yields a row whose status names the error and whose metrics
//! are NaN.
std::vector<MetricsRow> run_experiment(const ExperimentPlan& plan);

//! Metrics CSV (versioned header comment, no timings) and the matching
//! timings CSV. Doubles are written with 17 significant digits.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
void write_timings_csv(std::ostream& out, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

struct CellSummary
{
  std::size_t n = 0;
  double t = 0.0;
  //! Successful replications; failed ones are counted separately.
  std::size_t count = 0;
  std::size_t failures = 0;
  double mean_w1_squared = 0.0;
  double median_w1 = 0.0;
  double median_l2_beta_prime = 0.0;
  double median_l2_psi = 0.0;
  double median_alpha_error = 0.0;
  double median_a_error = 0.0;
};

struct RateReport
{
  std::vector<CellSummary> cells;
  //! OLS slope of log(mean W1^2) on log N, per T.
  std::map<double, double> w1_squared_slope;
  //! Consecutive ratios of median L2 beta' error across increasing N, per T.
  std::map<double, std::vector<double>> l2_beta_prime_ratios;
};

//! Throws std::invalid_argument when fewer than 2 distinct N are present.
RateReport rate_report(std::span<const MetricsRow> rows);
void write_report(std::ostream& out, const RateReport& report);

//! Ordinary least squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

} // namespace mvsde
