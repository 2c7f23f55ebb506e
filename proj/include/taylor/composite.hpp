#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taylor/certificates.hpp"
#include "taylor/models.hpp"
#include "taylor/problem.hpp"
#include "taylor/subsolver.hpp"

namespace taylor {

/// Default inflation of l * beta when certifying the prox-linear model error.
/// |f_x(y) - f(y)| reaches l * beta * ||y - x||^2 in general, twice the nominal
/// (l * beta / 2) constant.
inline constexpr double kDefaultEtaSafety = 2.0;

struct ProxLinearModel {
  TaylorModel model;
  Linearization lin;
  /// Certified error constant: |f_x(y) - f(y)| <= (eta / 2) ||y - x||^2.
  double eta = 0.0;
};

MinimizeHint hint_for(const CompositeProblem& p);
ProxLinearModel build_prox_linear_model(const CompositeProblem& p, const Vector& x,
                                        double eta_safety = kDefaultEtaSafety);

/// Exact minimizer of the model from a structural solver (kink enumeration,
/// trust-region dual, normal equations, active sets, prox closed form), or the
/// dual solver at 1e-13 when none applies. Throws when the model is out of reach.
Vector minimize_model_exact(const CompositeProblem& p, const Linearization& lin);
/// True when minimize_model_exact uses a structural solver for this problem.
bool has_structural_solver(const CompositeProblem& p);

struct StepMode {
  bool exact = true;
  double eps = 0.0;

  static StepMode exact_mode() { return {true, 0.0}; }
  static StepMode inexact_mode(double eps) { return {false, eps}; }
};

struct StepResult {
  Vector x_plus;
  double model_value = 0.0;
  /// Certified bound on f_x(x_plus) - inf f_x (0 for exact steps).
  double achieved_tolerance = 0.0;
  int subsolver_iterations = 0;
  /// Largest excess of the dual gap over the displayed rate bound, if the dual ran.
  double worst_rate_excess = 0.0;
};

StepResult prox_linear_step(const CompositeProblem& p, const Vector& x, const StepMode& mode);
StepResult prox_linear_step(const CompositeProblem& p, const Linearization& lin,
                            const StepMode& mode);

/// eps_k = eps0 * k^-(1 + q), k >= 1.
struct ToleranceSchedule {
  double eps0 = 1.0;
  double q = 0.5;

  double at(int k) const;
  /// eps0 (1 + 1/q) >= sum_k eps_k.
  double tail_bound() const { return eps0 * (1.0 + 1.0 / q); }
};

struct StoppingRule {
  double step_tol = 1e-8;
  double decrease_tol = 1e-12;
  int max_iter = 100000;
  /// f below this is treated as unbounded below.
  double value_floor = -1e12;
};

struct SolveOptions {
  StoppingRule stop;
  std::optional<ToleranceSchedule> schedule;
  double eta_safety = kDefaultEtaSafety;
  int model_samples = 1000;
  std::uint64_t seed = 0;
};

struct IterateRecord {
  int k = 0;
  Vector x;
  double f = 0.0;
  double model_value = 0.0;
  Vector x_next;
  double step = 0.0;
  /// Scheduled tolerance (0 in exact mode).
  double eps = 0.0;
  double achieved_eps = 0.0;
  /// Upper bound on f(x) - inf f_x.
  double delta = 0.0;
  /// ||x_bar - x|| for the exact model minimizer x_bar (equals step in exact mode).
  double reference_step = 0.0;
  StationarityCertificate certificate;
  StationarityCertificate decrease_certificate;
  double sum_sq = 0.0;
  /// 2 (f(x_1) - f(x_{k+1})) / (l beta) - sum_sq (exact); inexact min form otherwise.
  double ledger_slack = 0.0;
  /// 2 (f(x_1) - f(x_{k+1})) (+ sum eps) / (l beta k) - min_i step_i^2.
  double min_ledger_slack = 0.0;
  bool model_verified = true;
  double model_violation = 0.0;
  int subsolver_iterations = 0;
  double rate_excess = 0.0;

  bool operator==(const IterateRecord&) const;
};

struct SolveReport {
  std::string problem;
  Vector x0;
  double eta = 0.0;
  double curvature = 0.0;
  std::optional<ToleranceSchedule> schedule;
  StoppingRule stop;
  std::uint64_t seed = 0;
  std::vector<IterateRecord> iterates;
  Vector x_final;
  double f_final = 0.0;
  double f_star_estimate = 0.0;
  std::string stop_reason;
  double sum_sq = 0.0;
  double min_ledger_slack = 0.0;
  double wall_time_s = 0.0;

  bool operator==(const SolveReport&) const;
};

/// Throws std::runtime_error when f drops below the value floor.
SolveReport run_prox_linear(const CompositeProblem& p, const Vector& x0,
                            const SolveOptions& options = {});

struct ComplexityEstimate {
  double q = 0.0;
  double exponent = 0.0;
  double prefactor = 0.0;
  double count = 0.0;
};

/// eps^-(3+q) q^-((1+q)/2), q defaulting to 1 / (2 ln(1/eps)).
ComplexityEstimate complexity_estimate(double eps_target, std::optional<double> q = std::nullopt);

}  // namespace taylor
