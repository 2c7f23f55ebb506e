#include "taylor/composite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace taylor {

MinimizeHint hint_for(const CompositeProblem& p) {
  using OK = OuterFunction::Kind;
  if (p.dimension() == 1 && has_structural_solver(p) && p.h.kind() != OK::Identity &&
      p.h.kind() != OK::SquaredNorm) {
    return MinimizeHint::Piecewise1d;
  }
  if (has_structural_solver(p)) return MinimizeHint::ClosedForm;
  if (p.h.support_set(p.c.output_dim)) return MinimizeHint::DualSolver;
  return MinimizeHint::Generic;
}

ProxLinearModel build_prox_linear_model(const CompositeProblem& p, const Vector& x,
                                        double eta_safety) {
  if (!(eta_safety > 0.0)) throw std::invalid_argument("eta safety factor must be positive");
  ProxLinearModel out;
  out.lin = linearize(p, x);
  out.eta = eta_safety * p.curvature();
  const CompositeProblem* prob = &p;
  const Linearization lin = out.lin;
  out.model.base_point = x;
  out.model.evaluate = [prob, lin](const Vector& y) { return model_value(*prob, lin, y); };
  out.model.error_bound = GrowthFunction::quadratic(out.eta);
  out.model.hint = hint_for(p);
  out.model.kind = "prox_linear";
  return out;
}

StepResult prox_linear_step(const CompositeProblem& p, const Vector& x, const StepMode& mode) {
  return prox_linear_step(p, linearize(p, x), mode);
}

StepResult prox_linear_step(const CompositeProblem& p, const Linearization& lin,
                            const StepMode& mode) {
  StepResult out;
  if (mode.exact) {
    out.x_plus = minimize_model_exact(p, lin);
  } else {
    if (!(mode.eps > 0.0)) throw std::invalid_argument("inexact steps need eps > 0");
    if (p.h.support_set(p.c.output_dim)) {
      DualOptions opts;
      opts.eps = mode.eps;
      const DualState st = solve_dual_accelerated(p, lin, opts);
      out.x_plus = st.y;
      out.achieved_tolerance = st.gap;
      out.subsolver_iterations = st.iteration;
      out.worst_rate_excess = st.worst_rate_excess;
    } else {
      // No dual available; an exact step meets any tolerance.
      out.x_plus = minimize_model_exact(p, lin);
    }
  }
  out.model_value = model_value(p, lin, out.x_plus);
  return out;
}

double ToleranceSchedule::at(int k) const {
  if (k < 1) throw std::invalid_argument("schedule index starts at 1");
  return eps0 * std::pow(static_cast<double>(k), -(1.0 + q));
}

SolveReport run_prox_linear(const CompositeProblem& p, const Vector& x0,
                            const SolveOptions& options) {
  p.check();
  if (x0.size() != p.dimension()) throw std::invalid_argument("x0 has the wrong dimension");
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  report.problem = p.name;
  report.x0 = x0;
  report.curvature = p.curvature();
  report.eta = options.eta_safety * p.curvature();
  report.schedule = options.schedule;
  report.stop = options.stop;
  report.seed = options.seed;

  Vector x = x0;
  double fx = p.objective(x);
  if (!std::isfinite(fx)) throw std::invalid_argument("f(x0) is not finite");
  const double f1 = fx;
  double best = fx;
  double sum_sq = 0.0;
  double sum_eps = 0.0;
  double min_step_sq = std::numeric_limits<double>::infinity();
  double min_ref_sq = std::numeric_limits<double>::infinity();
  double min_slack = std::numeric_limits<double>::infinity();
  report.stop_reason = "max_iterations";

  auto objective = [&p](const Vector& y) { return p.objective(y); };

  for (int k = 1; k <= options.stop.max_iter; ++k) {
    const ProxLinearModel pm = build_prox_linear_model(p, x, options.eta_safety);
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.f = fx;

    const bool inexact = options.schedule.has_value();
    rec.eps = inexact ? options.schedule->at(k) : 0.0;
    const StepResult step = prox_linear_step(
        p, pm.lin, inexact ? StepMode::inexact_mode(rec.eps) : StepMode::exact_mode());
    rec.x_next = step.x_plus;
    rec.model_value = step.model_value;
    rec.achieved_eps = step.achieved_tolerance;
    rec.subsolver_iterations = step.subsolver_iterations;
    rec.rate_excess = step.worst_rate_excess;
    rec.step = (step.x_plus - x).norm();
    rec.delta = std::max(0.0, fx - step.model_value + step.achieved_tolerance);
    if (inexact) {
      rec.reference_step = (minimize_model_exact(p, pm.lin) - x).norm();
    } else {
      rec.reference_step = rec.step;
    }

    if (options.model_samples > 0) {
      const auto samples =
          uniform_samples(p.working_box, options.model_samples, options.seed * 1000003ULL + k);
      const ModelErrorReport mr = verify_model_error(objective, pm.model, samples);
      rec.model_verified = mr.holds();
      rec.model_violation = mr.max_violation;
    }

    rec.certificate = inexact ? cert_inexact_optimal(pm.eta, rec.achieved_eps, rec.step)
                              : cert_exact_quadratic(pm.eta, rec.step);
    rec.decrease_certificate = cert_model_decrease(pm.eta, rec.delta);

    const double f_next = p.objective(step.x_plus);
    if (f_next < options.stop.value_floor) {
      throw std::runtime_error("objective fell below the floor " +
                               std::to_string(options.stop.value_floor) +
                               "; problem looks unbounded below");
    }
    best = std::min(best, f_next);
    sum_sq += rec.step * rec.step;
    sum_eps += rec.eps;
    min_step_sq = std::min(min_step_sq, rec.step * rec.step);
    min_ref_sq = std::min(min_ref_sq, rec.reference_step * rec.reference_step);
    rec.sum_sq = sum_sq;
    const double drop = 2.0 * (f1 - f_next);
    if (inexact) {
      rec.min_ledger_slack = (drop + sum_eps) / (p.curvature() * k) - min_ref_sq;
      rec.ledger_slack = rec.min_ledger_slack;
    } else {
      rec.ledger_slack = drop / p.curvature() - sum_sq;
      rec.min_ledger_slack = drop / (p.curvature() * k) - min_step_sq;
    }
    min_slack = std::min(min_slack, rec.ledger_slack);
    report.iterates.push_back(rec);

    x = step.x_plus;
    fx = f_next;
    // An inexact step only pins the true prox step to within sqrt(2 eps / rho).
    const double step_slack = inexact ? std::sqrt(2.0 * rec.achieved_eps / p.curvature()) : 0.0;
    if (rec.step + step_slack <= options.stop.step_tol) {
      report.stop_reason = "step_tolerance";
      break;
    }
    if (rec.delta <= options.stop.decrease_tol) {
      report.stop_reason = "model_decrease";
      break;
    }
  }
  report.x_final = x;
  report.f_final = fx;
  report.f_star_estimate = best;
  report.sum_sq = sum_sq;
  report.min_ledger_slack = report.iterates.empty() ? 0.0 : min_slack;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ComplexityEstimate complexity_estimate(double eps_target, std::optional<double> q) {
  if (!(eps_target > 0.0) || !(eps_target < 1.0)) {
    throw std::invalid_argument("complexity estimate needs 0 < eps < 1");
  }
  ComplexityEstimate out;
  out.q = q ? *q : 1.0 / (2.0 * std::log(1.0 / eps_target));
  if (!(out.q > 0.0)) throw std::invalid_argument("q must be positive");
  out.exponent = 3.0 + out.q;
  out.prefactor = std::pow(out.q, -(1.0 + out.q) / 2.0);
  out.count = out.prefactor * std::pow(eps_target, -out.exponent);
  return out;
}

namespace {

bool same(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

bool same(const StationarityCertificate& a, const StationarityCertificate& b) {
  return a.regime == b.regime && a.inputs == b.inputs && a.point_radius == b.point_radius &&
         a.value_gap == b.value_gap && a.slope_bound == b.slope_bound &&
         a.validity_flags == b.validity_flags;
}

}  // namespace

bool IterateRecord::operator==(const IterateRecord& o) const {
  return k == o.k && same(x, o.x) && f == o.f && model_value == o.model_value &&
         same(x_next, o.x_next) && step == o.step && eps == o.eps &&
         achieved_eps == o.achieved_eps && delta == o.delta &&
         reference_step == o.reference_step && same(certificate, o.certificate) &&
         same(decrease_certificate, o.decrease_certificate) && sum_sq == o.sum_sq &&
         ledger_slack == o.ledger_slack && min_ledger_slack == o.min_ledger_slack &&
         model_verified == o.model_verified && model_violation == o.model_violation &&
         subsolver_iterations == o.subsolver_iterations && rate_excess == o.rate_excess;
}

bool SolveReport::operator==(const SolveReport& o) const {
  auto same_schedule = [](const std::optional<ToleranceSchedule>& a,
                          const std::optional<ToleranceSchedule>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->eps0 == b->eps0 && a->q == b->q);
  };
  return problem == o.problem && same(x0, o.x0) && eta == o.eta && curvature == o.curvature &&
         same_schedule(schedule, o.schedule) && stop.step_tol == o.stop.step_tol &&
         stop.decrease_tol == o.stop.decrease_tol && stop.max_iter == o.stop.max_iter &&
         stop.value_floor == o.stop.value_floor && seed == o.seed && iterates == o.iterates &&
         same(x_final, o.x_final) && f_final == o.f_final &&
         f_star_estimate == o.f_star_estimate && stop_reason == o.stop_reason &&
         sum_sq == o.sum_sq && min_ledger_slack == o.min_ledger_slack &&
         wall_time_s == o.wall_time_s;
}

}  // namespace taylor
