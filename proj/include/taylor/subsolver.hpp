#pragma once

#include <vector>

#include "taylor/problem.hpp"
#include "taylor/support_set.hpp"

namespace taylor {

struct DualValue {
  double phi = 0.0;
  /// Unique minimizer of the Lagrangian at z, recovered through one prox call.
  Vector y;
};

/// phi(z) = <c(x) - J x, z> - (g + (rho/2)||. - x||^2)^*(-J^T z), evaluated through
/// y* = prox_g(x - J^T z / rho, 1 / rho).
DualValue dual_value(const CompositeProblem& p, const Linearization& lin, const Vector& z);

struct DualState {
  Vector z;
  Vector y;
  double phi = 0.0;
  double primal = 0.0;
  double gap = 0.0;
  int iteration = 0;
  /// Signed gap of the current iterate pair at each iteration, starting at 0.
  std::vector<double> gap_trace;
  /// Largest excess of gap_trace[k] over the rate bound at k.
  double worst_rate_excess = 0.0;
};

struct DualOptions {
  double eps = 1e-8;
  int max_iterations = 200000;
};

/// 4 (||J||^2 / rho + ||c(x) - J x||) diam(Z), the numerator of the gap rate.
double dual_rate_constant(const CompositeProblem& p, const Linearization& lin);
/// dual_rate_constant / ((k + 1)(k + 2)).
double dual_rate_bound(double constant, int k);

/// Accelerated (excessive-gap) ascent on the smooth concave dual with primal
/// recovery. Throws SubsolverError carrying the best state when the cap is hit.
DualState solve_dual_accelerated(const CompositeProblem& p, const Linearization& lin,
                                 const DualOptions& options);

class SubsolverError : public Error {
 public:
  SubsolverError(const std::string& what, DualState best)
      : Error(what), best_(std::move(best)) {}
  const DualState& best() const { return best_; }

 private:
  DualState best_;
};

/// Smallest k >= 1 with constant / ((k + 1)(k + 2)) <= eps.
int iterations_for_gap(double constant, double eps);
int iterations_for_gap(const CompositeProblem& p, const Linearization& lin, double eps);

}  // namespace taylor
