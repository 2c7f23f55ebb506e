#include "taylor/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

namespace taylor {

namespace {

SupportSet support_of(const CompositeProblem& p) {
  auto set = p.h.support_set(p.c.output_dim);
  if (!set) throw std::invalid_argument("outer function '" + p.h.tag() + "' is not a support function");
  return *set;
}

double spectral_norm(const Matrix& J) {
  if (J.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(J);
  return svd.singularValues()(0);
}

}  // namespace

DualValue dual_value(const CompositeProblem& p, const Linearization& lin, const Vector& z) {
  DualValue out;
  const double t = 1.0 / lin.rho;
  out.y = p.g.prox(lin.x - t * (lin.J.transpose() * z), t);
  const Vector s = out.y - lin.x;
  out.phi = z.dot(lin.cx + lin.J * s) + p.g.value(out.y) + 0.5 * lin.rho * s.squaredNorm();
  return out;
}

double dual_rate_constant(const CompositeProblem& p, const Linearization& lin) {
  const SupportSet Z = support_of(p);
  const double nj = spectral_norm(lin.J);
  return 4.0 * (nj * nj / lin.rho + lin.offset().norm()) * Z.diameter();
}

double dual_rate_bound(double constant, int k) {
  return constant / ((static_cast<double>(k) + 1.0) * (static_cast<double>(k) + 2.0));
}

DualState solve_dual_accelerated(const CompositeProblem& p, const Linearization& lin,
                                 const DualOptions& options) {
  if (!(options.eps > 0.0)) throw std::invalid_argument("dual solver needs eps > 0");
  const SupportSet Z = support_of(p);
  const double nj = spectral_norm(lin.J);
  const double L = nj * nj / lin.rho;
  const double rate_constant = dual_rate_constant(p, lin);
  const Vector b = lin.offset();

  DualState state;
  double best_primal = std::numeric_limits<double>::infinity();
  Vector best_y;
  double best_phi = -std::numeric_limits<double>::infinity();
  Vector best_z;

  // Record one iterate pair; returns true once the certified gap reaches eps.
  auto record = [&](int k, const Vector& z_bar, const Vector& y_bar) {
    const DualValue dv = dual_value(p, lin, z_bar);
    const double fy_bar = model_value(p, lin, y_bar);
    const double fy_rec = model_value(p, lin, dv.y);
    const double primal = std::min(fy_bar, fy_rec);
    const double gap = primal - dv.phi;
    state.gap_trace.push_back(gap);
    state.worst_rate_excess = std::max(state.worst_rate_excess, gap - dual_rate_bound(rate_constant, k));
    if (primal < best_primal) {
      best_primal = primal;
      best_y = fy_bar <= fy_rec ? y_bar : dv.y;
    }
    if (dv.phi > best_phi) {
      best_phi = dv.phi;
      best_z = z_bar;
    }
    state.iteration = k;
    state.z = best_z;
    state.y = best_y;
    state.phi = best_phi;
    state.primal = best_primal;
    state.gap = std::max(0.0, best_primal - best_phi);
    return state.gap <= options.eps;
  };

  const Vector z0 = Z.project(Vector::Zero(Z.dimension()));
  if (L == 0.0) {
    // Linear dual: phi(z) = <z, c(x)> + const.
    const Vector z = Z.argmax(lin.cx);
    record(0, z, dual_value(p, lin, z).y);
    return state;
  }

  auto y_of = [&](const Vector& z) { return dual_value(p, lin, z).y; };
  auto grad_phi = [&](const Vector& z) -> Vector { return b + lin.J * y_of(z); };

  double mu = 2.0 * L;
  Vector y_bar = y_of(z0);
  Vector z_bar = Z.project(z0 + grad_phi(z0) / L);
  if (record(0, z_bar, y_bar)) return state;

  for (int k = 0; k < options.max_iterations; ++k) {
    const double tau = 2.0 / (k + 3.0);
    const Vector u_mu = Z.project(z0 + (lin.J * y_bar + b) / mu);
    const Vector u_hat = (1.0 - tau) * z_bar + tau * u_mu;
    y_bar = (1.0 - tau) * y_bar + tau * y_of(u_hat);
    z_bar = Z.project(u_hat + grad_phi(u_hat) / L);
    mu *= 1.0 - tau;
    if (record(k + 1, z_bar, y_bar)) return state;
  }
  throw SubsolverError("dual solver reached " + std::to_string(options.max_iterations) +
                           " iterations with gap " + std::to_string(state.gap) + " > eps " +
                           std::to_string(options.eps),
                       state);
}

int iterations_for_gap(double constant, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(constant > 0.0)) return 1;
  // (k+1)(k+2) >= C/eps; start from the closed-form root and fix up rounding.
  const double target = constant / eps;
  double k = std::ceil((-3.0 + std::sqrt(1.0 + 4.0 * target)) / 2.0);
  k = std::max(k, 1.0);
  while (k > 1.0 && dual_rate_bound(constant, static_cast<int>(k) - 1) <= eps) k -= 1.0;
  while (dual_rate_bound(constant, static_cast<int>(k)) > eps) k += 1.0;
  return static_cast<int>(k);
}

int iterations_for_gap(const CompositeProblem& p, const Linearization& lin, double eps) {
  return iterations_for_gap(dual_rate_constant(p, lin), eps);
}

}  // namespace taylor
