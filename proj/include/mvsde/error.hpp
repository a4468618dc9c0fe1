#pragma once

#include <stdexcept>
#include <string>

namespace mvsde {

//! Drift specification violates a structural or convexity requirement.
class SpecError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Grid shapes of two operands disagree, or a vector has the wrong length.
class DimensionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Fixed-point iteration stopped at max_iter above tolerance.
class ConvergenceError : public std::runtime_error
{
public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
    : std::runtime_error(what)
    , last_residual_(last_residual)
    , iterations_(iterations)
  {}

  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

private:
  double last_residual_;
  int iterations_;
};

//! A particle position became non-finite during time stepping.
class BlowUpError : public std::runtime_error
{
public:
  BlowUpError(const std::string& what, std::size_t step, std::size_t particle)
    : std::runtime_error(what)
    , step_(step)
    , particle_(particle)
  {}

  std::size_t step() const { return step_; }
  std::size_t particle() const { return particle_; }

private:
  std::size_t step_;
  std::size_t particle_;
};

//! Contrast matrix is singular or numerically unusable.
class IllConditionedError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Empirical characteristic function too small at a trigonometric frequency
//! to recover the corresponding raw coefficient.
class NonIdentifiableError : public std::runtime_error
{
public:
  NonIdentifiableError(const std::string& what, std::size_t index)
    : std::runtime_error(what)
    , index_(index)
  {}

  //! Index j (0-based, into the full coefficient vector) of the offending term.
  std::size_t index() const { return index_; }

private:
  std::size_t index_;
};

//! Failure inside one of the four estimation steps; the message carries the
//! step label.
class PipelineError : public std::runtime_error
{
public:
  PipelineError(const std::string& step, const std::string& what)
    : std::runtime_error(step + ": " + what)
    , step_(step)
  {}

  const std::string& step() const { return step_; }

private:
  std::string step_;
};

} // namespace mvsde
