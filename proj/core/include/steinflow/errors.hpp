#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace steinflow {

// Base for every error raised by the library. Callers that only need to
// report a failure can catch this; the subclasses carry structured detail.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InsufficientParticles : public Error {
 public:
  using Error::Error;
};

class DegenerateEnsemble : public Error {
 public:
  using Error::Error;
};

class NotSpd : public Error {
 public:
  explicit NotSpd(std::size_t index)
      : Error("matrix is not positive definite (pivot " + std::to_string(index) + ")"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class MaxIterExceeded : public Error {
 public:
  explicit MaxIterExceeded(double residual)
      : Error("conjugate gradients did not converge (relative residual " +
              std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

class DegenerateSchedule : public Error {
 public:
  using Error::Error;
};

class ScheduleInvalid : public Error {
 public:
  using Error::Error;
};

class ScheduleExhausted : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace steinflow
