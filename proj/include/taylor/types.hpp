#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace taylor {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned closed box [lo, hi] in R^n.
struct Box {
  Vector lo;
  Vector hi;

  Box() = default;
  Box(Vector lower, Vector upper);

  int dimension() const { return static_cast<int>(lo.size()); }
  bool contains(const Vector& x, double tol = 0.0) const;
  Vector clamp(const Vector& x) const;
  Vector center() const { return 0.5 * (lo + hi); }
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a grid offers no neighbor inside the requested radius.
class DegenerateGridError : public Error {
 public:
  using Error::Error;
};

/// Raised when a sampled hypothesis (error bound, KL inequality) fails.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Raised when a descriptor or trace cannot be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Build a Vector from an initializer list, mostly for tests and fixtures.
Vector vec(std::initializer_list<double> values);

}  // namespace taylor
