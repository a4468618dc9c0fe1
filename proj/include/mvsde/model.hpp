#pragma once

#include "mvsde/grid_function.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvsde {

//! Value and first two derivatives of a scalar function at one point.
struct Derivatives
{
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

enum class BetaFamily
{
  zero,
  cos_bump,   //!< (1 - cos(b y)) / y^2
  sinc_power, //!< sin^{2k}(y) / y^{2k}
  tabulated
};

std::string to_string(BetaFamily family);
BetaFamily beta_family_from_string(const std::string& name);

//! Nonparametric, even component beta of the interaction potential.
class BetaSpec
{
public:
  BetaSpec() = default;

  static BetaSpec zero();
  static BetaSpec cos_bump(double b);
  static BetaSpec sinc_power(int k);
  //! Tabulated even profile. Outside the table beta is held at its edge
  //! value, so beta' and beta'' vanish there.
  static BetaSpec tabulated(GridFunction values);

  BetaFamily family() const { return family_; }
  double b() const { return b_; }
  int k() const { return k_; }
  const GridFunction& table() const { return table_; }
  //! Family parameters as serialized: {b}, {k}, or {} for zero/tabulated.
  std::vector<double> params() const;

  Derivatives eval(double y) const;
  double prime(double y) const { return eval(y).first; }

  //! ||beta||_inf.
  double sup_norm() const;
  //! inf_y beta''(y): dense search on [-50, 50], refined locally, combined
  //! with the tail limit 0 for the analytic families.
  double inf_second_derivative() const;

private:
  BetaFamily family_ = BetaFamily::zero;
  double b_ = 0.0;
  int k_ = 0;
  GridFunction table_;
  GridFunction table_d1_;
  GridFunction table_d2_;
};

//! Structural part of the drift needed by the estimator: J1 polynomial
//! terms (degrees 2, 4, ..., 2 J1) and J - J1 cosine terms with known
//! frequencies.
struct DriftShape
{
  int j1 = 1;
  int j = 1;
  std::vector<double> theta;

  std::size_t n_trig() const { return static_cast<std::size_t>(j - j1); }
};

//! Throws SpecError if J1 < 1, J < J1, or theta has the wrong length,
//! non-positive or repeated entries.
void validate(const DriftShape& shape);

//! Basis function phi_idx (idx is 0-based, so idx = 0 is y^2) and its
//! first two derivatives.
Derivatives basis_function(const DriftShape& shape, std::size_t idx, double y);

//! Semiparametric interaction potential
//!   phi(y) = sum_j a_j phi_j(y) + beta(y).
//!
//! Construction validates sign constraints and the convexity certificate;
//! a spec that exists is usable.
class DriftSpec
{
public:
  //! `lambda` is the convexity floor supplied by the user; when omitted it
  //! defaults to the certificate. Throws SpecError when the certificate is
  //! non-positive or below the supplied lambda.
  DriftSpec(DriftShape shape,
            std::vector<double> a,
            BetaSpec beta,
            std::optional<double> lambda = std::nullopt);

  //! Quadratic potential a1 y^2 with beta = 0.
  static DriftSpec quadratic(double a1);

  const DriftShape& shape() const { return shape_; }
  int j1() const { return shape_.j1; }
  int j() const { return shape_.j; }
  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& theta() const { return shape_.theta; }
  const BetaSpec& beta() const { return beta_; }
  double lambda() const { return lambda_; }
  //! 2 a_1 - sum theta_j^2 |a_j| + inf beta''.
  double certificate() const { return certificate_; }
  bool is_parametric() const { return beta_.family() == BetaFamily::zero; }

private:
  DriftShape shape_;
  std::vector<double> a_;
  BetaSpec beta_;
  double lambda_;
  double certificate_;
};

struct DriftParts
{
  double phi = 0.0;
  double phi_prime = 0.0;
  double phi_double_prime = 0.0;
};

DriftParts eval_drift_parts(const DriftSpec& spec, double y);

//! Lower bound on phi'' implied by the coefficients and inf beta''.
//! Throws SpecError when it is not strictly positive.
double convexity_certificate(const DriftShape& shape, std::span<const double> a, const BetaSpec& beta);
double convexity_certificate(const DriftSpec& spec);

//! Coefficients of phi * pi in the basis phi_j (plus the constant alpha0).
struct AlphaCoefficients
{
  int j1 = 1;
  std::optional<double> alpha0;
  std::vector<double> alpha;

  //! sum_{j <= J1} alpha_j.
  double polynomial_sum() const;
  //! sum_{j > J1} |alpha_j|.
  double trig_abs_sum() const;
};

//! Exact binomial coefficient, n <= 62 (throws std::out_of_range beyond).
std::uint64_t binomial(unsigned n, unsigned k);

//! a -> alpha.
//!
//! `even_moments[k]` is m_{2k}; at least m_0 .. m_{2(J1-1)} must be given.
//! alpha0 is filled only when m_{2 J1} is also supplied. `cf_at_theta[i]` is
//! F(pi)(theta_{J1+1+i}).
AlphaCoefficients alpha_from_a(const DriftSpec& spec,
                               std::span<const double> even_moments,
                               std::span<const double> cf_at_theta);
AlphaCoefficients alpha_from_a(const DriftShape& shape,
                               std::span<const double> a,
                               std::span<const double> even_moments,
                               std::span<const double> cf_at_theta);

//! alpha -> a by back-substitution of the triangular moment system and
//! division by the empirical characteristic function at each theta_j.
//! Throws NonIdentifiableError when |cf(theta_j)| <= cf_tolerance.
std::vector<double> a_from_alpha(const AlphaCoefficients& alpha,
                                 std::span<const double> even_moments,
                                 std::span<const double> cf_at_theta,
                                 double cf_tolerance = 1e-8);

} // namespace mvsde
