#pragma once

#include <string>

#include "taylor/types.hpp"

namespace taylor {

/// Closed bounded convex set Z whose support function y -> sup_{z in Z} <z, y>
/// serves as the outer function h of a composite problem.
class SupportSet {
 public:
  enum class Kind { Interval, Box, Ball, Simplex };

  /// [-a, a] in R.
  static SupportSet interval(double half_width);
  /// Product of intervals [lo_i, hi_i]; lo == hi gives a singleton.
  static SupportSet box(Vector lo, Vector hi);
  /// Euclidean ball of the given radius centred at the origin.
  static SupportSet ball(int dimension, double radius);
  /// Unit simplex {z >= 0, sum z = 1}; its support function is max coordinate.
  static SupportSet simplex(int dimension);

  Kind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  std::string tag() const;

  Vector project(const Vector& z) const;
  bool contains(const Vector& z, double tol = 1e-12) const;
  double diameter() const;
  /// Largest Euclidean norm of a point in Z; the Lipschitz constant of the support function.
  double max_norm() const;
  double support(const Vector& y) const;
  /// A maximizer of <z, y> over Z.
  Vector argmax(const Vector& y) const;

  const Vector& lower() const { return lo_; }
  const Vector& upper() const { return hi_; }
  double radius() const { return radius_; }

 private:
  SupportSet(Kind kind, int dimension) : kind_(kind), dimension_(dimension) {}

  Kind kind_;
  int dimension_;
  Vector lo_;
  Vector hi_;
  double radius_ = 0.0;
};

}  // namespace taylor
