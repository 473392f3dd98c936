#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gridmh {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sufficient statistics s(y): the only per-sample artifact the library stores.
using SuffStats = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state whose shape does not match its model.
class InvalidState : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when an exact normalizing constant is requested for a model that has none.
class IntractableModel : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A ratio or density evaluated to a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DisconnectedGrid : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// Bad user input: configuration, CLI arguments, mismatched files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

inline void require_dims(const Vector& v, Eigen::Index d, const char* what) {
  if (v.size() != d) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(d) +
                            ", got " + std::to_string(v.size()));
  }
}

}  // namespace gridmh
