#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rrsgd {

// Base for every error raised by the library. The CLI maps the subclasses
// onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, violated preconditions, malformed inputs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidModelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class StrongConvexityError : public InvalidModelError {
 public:
  using InvalidModelError::InvalidModelError;
};

class IndexOutOfRangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedKindError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A predictor cannot be evaluated reliably for the given inputs.
class ConditioningError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class StepSizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Eigen::VectorXd best, double best_grad_norm)
      : Error(what), best_(std::move(best)), best_grad_norm_(best_grad_norm) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_; }
  double best_grad_norm() const noexcept { return best_grad_norm_; }

 private:
  Eigen::VectorXd best_;
  double best_grad_norm_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::uint64_t iteration)
      : Error(what), iteration_(iteration) {}

  std::uint64_t iteration() const noexcept { return iteration_; }

 private:
  std::uint64_t iteration_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rrsgd
