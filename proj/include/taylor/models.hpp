#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "taylor/types.hpp"

namespace taylor {

/// Growth function w with w(0) = w'(0) = 0 and w' > 0 on (0, inf).
///
/// The power form w(t) = (eta / r) t^r with r > 1 is always proper. Custom
/// growth functions are accepted as (value, derivative) callables and their
/// defining properties are only checked on samples.
class GrowthFunction {
 public:
  using Fn = std::function<double(double)>;

  static GrowthFunction power(double eta, double r);
  /// w(t) = (eta / 2) t^2.
  static GrowthFunction quadratic(double eta) { return power(eta, 2.0); }
  /// Checks w(0) = w'(0) = 0 and w' > 0 on a sample ladder; throws on failure.
  static GrowthFunction custom(Fn value, Fn derivative, std::string label = "custom");

  double value(double t) const;
  double derivative(double t) const;
  /// w(t) / w'(t) under the convention 0/0 = 0.
  double proximity_ratio(double t) const;

  bool is_power() const { return !custom_value_; }
  bool is_quadratic() const { return is_power() && exponent_ == 2.0; }
  double eta() const { return eta_; }
  double exponent() const { return exponent_; }
  const std::string& label() const { return label_; }
  /// Power form: r > 1. Custom: w'(t) -> 0 and w(t)/w'(t) -> 0 on t = 2^-k.
  bool proper() const { return proper_; }

 private:
  GrowthFunction() = default;

  double eta_ = 0.0;
  double exponent_ = 2.0;
  Fn custom_value_;
  Fn custom_derivative_;
  std::string label_ = "power";
  bool proper_ = true;
};

enum class MinimizeHint { ClosedForm, Piecewise1d, DualSolver, Generic };

std::string to_string(MinimizeHint hint);

/// A model f_x based at x together with the growth function certifying
/// |f_x(y) - f(y)| <= w(||y - x||).
struct TaylorModel {
  Vector base_point;
  std::function<double(const Vector&)> evaluate;
  GrowthFunction error_bound = GrowthFunction::quadratic(0.0);
  MinimizeHint hint = MinimizeHint::Generic;
  std::string kind = "generic";

  double operator()(const Vector& y) const { return evaluate(y); }
};

/// Smooth quadratic model f(x) + <grad f(x), y - x> + <B (y - x), y - x> / 2.
struct QuadraticModel {
  TaylorModel model;
  Vector gradient;
  Matrix curvature;

  /// Unique minimizer when B is positive definite.
  std::optional<Vector> minimizer() const;
};

/// Throws std::invalid_argument when B has a negative eigenvalue.
QuadraticModel build_quadratic_model(const std::function<double(const Vector&)>& f,
                                     const std::function<Vector(const Vector&)>& gradient,
                                     const Vector& x, const Matrix& curvature, double eta);

struct ModelErrorReport {
  /// max over samples of (|m(y) - f(y)| - w(||y - x||))+.
  double max_violation = 0.0;
  Vector worst_point;
  /// max over samples of |m(y) - f(y)| / ||y - x||^2, handy for picking eta.
  double max_quadratic_ratio = 0.0;

  bool holds() const { return max_violation == 0.0; }
};

ModelErrorReport verify_model_error(const std::function<double(const Vector&)>& f,
                                    const TaylorModel& model, const std::vector<Vector>& samples);

/// Uniform samples in a box drawn from a seeded mt19937_64.
std::vector<Vector> uniform_samples(const Box& box, int count, std::uint64_t seed);

}  // namespace taylor
