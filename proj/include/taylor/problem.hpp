#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "taylor/support_set.hpp"
#include "taylor/types.hpp"

namespace taylor {

/// The closed convex term g, accessed through its value and proximal map.
class ProximableTerm {
 public:
  enum class Kind { Zero, Box, L1, Custom };

  using ValueFn = std::function<double(const Vector&)>;
  /// prox(v, t) = argmin_y g(y) + ||y - v||^2 / (2t).
  using ProxFn = std::function<Vector(const Vector&, double)>;

  static ProximableTerm zero();
  static ProximableTerm box_indicator(Box box);
  static ProximableTerm l1(double weight);
  static ProximableTerm custom(ValueFn value, ProxFn prox, std::string label = "custom");

  Kind kind() const { return kind_; }
  std::string tag() const;

  /// +inf outside the domain.
  double value(const Vector& y) const;
  Vector prox(const Vector& v, double t) const;

  const Box& box() const { return box_; }
  double weight() const { return weight_; }

 private:
  explicit ProximableTerm(Kind kind) : kind_(kind) {}

  Kind kind_;
  Box box_;
  double weight_ = 0.0;
  ValueFn custom_value_;
  ProxFn custom_prox_;
  std::string label_;
};

/// The finite convex outer function h.
class OuterFunction {
 public:
  enum class Kind { Abs, Norm2, L1Norm, MaxCoord, Identity, Support, SquaredNorm };

  static OuterFunction abs() { return OuterFunction(Kind::Abs); }
  static OuterFunction norm2() { return OuterFunction(Kind::Norm2); }
  static OuterFunction l1_norm() { return OuterFunction(Kind::L1Norm); }
  static OuterFunction max_coordinate() { return OuterFunction(Kind::MaxCoord); }
  static OuterFunction identity() { return OuterFunction(Kind::Identity); }
  static OuterFunction squared_norm() { return OuterFunction(Kind::SquaredNorm); }
  static OuterFunction support(SupportSet set);

  Kind kind() const { return kind_; }
  std::string tag() const;

  double value(const Vector& u) const;
  /// Z with h = sup_{z in Z} <z, .>, when h is a support function.
  std::optional<SupportSet> support_set(int output_dim) const;
  /// Lipschitz constant of h when globally Lipschitz (not for SquaredNorm).
  std::optional<double> natural_lipschitz(int output_dim) const;

 private:
  explicit OuterFunction(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::optional<SupportSet> set_;
};

/// Smooth map c: R^n -> R^m with a supplied Jacobian.
struct SmoothMap {
  std::string name;
  int input_dim = 0;
  int output_dim = 0;
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;
};

/// f = g + h o c with l = Lip(h) and beta = Lip(Jacobian of c).
struct CompositeProblem {
  std::string name;
  ProximableTerm g = ProximableTerm::zero();
  OuterFunction h = OuterFunction::abs();
  SmoothMap c;
  double l = 1.0;
  double beta = 1.0;
  Box working_box;

  int dimension() const { return c.input_dim; }
  double objective(const Vector& x) const;
  /// l * beta, the curvature of the prox-linear quadratic term.
  double curvature() const { return l * beta; }
  /// Throws std::invalid_argument on inconsistent dimensions or constants.
  void check() const;
};

/// c(x), its Jacobian and the curvature rho = l * beta at a base point x.
struct Linearization {
  Vector x;
  Vector cx;
  Matrix J;
  double rho = 1.0;

  /// c(x) - J x, the constant term of the linearization in y.
  Vector offset() const { return cx - J * x; }
};

Linearization linearize(const CompositeProblem& p, const Vector& x);
/// g(y) + h(c(x) + J (y - x)) + (rho / 2) ||y - x||^2.
double model_value(const CompositeProblem& p, const Linearization& lin, const Vector& y);

/// Result of the sampled structural checks on a problem.
struct ProblemAudit {
  double worst_prox_expansion = 0.0;   // max (||prox u - prox v|| - ||u - v||)+
  double worst_convexity_gap = 0.0;    // max (h(mid) - (h(u) + h(v))/2)+
  double worst_lipschitz_excess = 0.0; // max (|h(u) - h(v)| - l ||u - v||)+
  bool ok(double tol = 1e-10) const {
    return worst_prox_expansion <= tol && worst_convexity_gap <= tol &&
           worst_lipschitz_excess <= tol;
  }
};

/// Sampled prox nonexpansiveness, midpoint convexity and Lipschitz checks.
ProblemAudit audit_problem(const CompositeProblem& p, int samples, std::uint64_t seed);

}  // namespace taylor
