// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "taylor/certificates.hpp"
#include "taylor/composite.hpp"
#include "taylor/problems.hpp"
#include "taylor/slope_oracle.hpp"
#include "taylor/subsolver.hpp"
#include "taylor/verification.hpp"

using namespace taylor;

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("AC%d %s %s: %s\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Slope at an off-lattice point: sample a small grid with x as its center node.
double local_slope(const CompositeProblem& p, double x) {
  const double s = std::min(1e-3, std::abs(x) / 10.0);
  const GridFunction g = GridFunction::sample([&p](const Vector& y) { return p.objective(y); },
                                              Box(vec({x - 8 * s}), vec({x + 8 * s})), s);
  return slope(g, g.nearest_node(vec({x})));
}

std::vector<ProblemSpec> gridded() {
  std::vector<ProblemSpec> out;
  for (const auto& name : builtin_problem_names()) {
    ProblemSpec s = make_problem(name);
    if (s.grid && s.grid->spacing <= 1e-3) out.push_back(std::move(s));
  }
  return out;
}

void ac1() {
  const auto t0 = Clock::now();
  const ProblemSpec s = make_problem("footnote");
  SolveOptions o;
  o.stop.max_iter = 10;
  o.stop.step_tol = -1.0;
  o.stop.decrease_tol = -1.0;
  const SolveReport r = run_prox_linear(s.problem, vec({1.0}), o);
  bool ok = r.iterates.size() == 10;
  double worst_dev = 0.0;
  double worst_slope = 0.0;
  double prev_bound = std::numeric_limits<double>::infinity();
  double x = 1.0;
  bool bounds_shrink = true;
  for (const IterateRecord& rec : r.iterates) {
    worst_dev = std::max(worst_dev, std::abs(rec.x[0] - x));
    x = x - (0.5 * x * x + x) / (x + 1.0);
    worst_dev = std::max(worst_dev, std::abs(rec.x_next[0] - x));
    if (rec.x[0] != 0.0 && std::abs(rec.x[0]) <= 1e-2) {
      worst_slope = std::max(worst_slope, std::abs(local_slope(s.problem, rec.x[0]) - 1.0));
    }
    const double b = 5.0 * r.eta * rec.step;
    bounds_shrink = bounds_shrink && b <= prev_bound && std::abs(rec.certificate.slope_bound - b) <= 1e-15;
    prev_bound = b;
  }
  const double secs = seconds_since(t0);
  ok = ok && worst_dev <= 1e-10 && worst_slope <= 1e-2 && bounds_shrink && prev_bound < 1e-12 && secs < 1.0;
  report(1, ok, "footnote reproduction",
         fmt("max |x_k - newton_k| = %.2e, max |slope(x_k) - 1| = %.2e, final 5*eta*d = %.2e, %.3fs",
             worst_dev, worst_slope, prev_bound, secs));
}

void ac2() {
  long checked = 0;
  long bad = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& name : builtin_problem_names()) {
    const ProblemSpec s = make_problem(name);
    for (const Vector& x0 : s.sweep_starts) {
      SolveOptions o;
      o.stop.max_iter = 500;
      const SolveReport r = run_prox_linear(s.problem, x0, o);
      const double rho = s.problem.curvature();
      double sum = 0.0;
      double min_sq = std::numeric_limits<double>::infinity();
      for (const IterateRecord& rec : r.iterates) {
        sum += rec.step * rec.step;
        min_sq = std::min(min_sq, rec.step * rec.step);
        const double drop = 2.0 * (r.iterates.front().f - s.problem.objective(rec.x_next));
        const double s1 = drop / rho - sum;
        const double s2 = drop / (rho * rec.k) - min_sq;
        worst = std::min({worst, s1, s2});
        if (s1 < -1e-10 || s2 < -1e-10) ++bad;
        ++checked;
      }
    }
  }
  report(2, bad == 0 && checked > 0, "rate ledger",
         fmt("%.0f iterates checked, %.0f violations, smallest slack %.3e", checked, bad, worst));
}

void ac3() {
  const auto t0 = Clock::now();
  long pairs[3] = {0, 0, 0};
  long found[3] = {0, 0, 0};
  for (const ProblemSpec& s : gridded()) {
    const GridFunction g = s.make_grid();
    for (const Vector& x0 : s.sweep_starts) {
      for (bool inexact : {false, true}) {
        if (inexact && !s.problem.h.support_set(s.problem.c.output_dim)) continue;
        SolveOptions o;
        o.stop.max_iter = inexact ? 400 : 200;
        if (inexact) o.schedule = ToleranceSchedule{1.0, 0.5};
        const SolveReport r = run_prox_linear(s.problem, x0, o);
        for (const IterateRecord& rec : r.iterates) {
          const int step_kind = inexact ? 2 : 0;
          const WitnessOutcome a = check_certificate_witness(g, rec.certificate, rec.x, rec.x_next);
          if (a.in_grid) {
            ++pairs[step_kind];
            found[step_kind] += a.witness.has_value();
          }
          const WitnessOutcome b = check_certificate_witness(g, rec.decrease_certificate, rec.x, rec.x_next);
          if (b.in_grid) {
            ++pairs[1];
            found[1] += b.witness.has_value();
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  const long total = pairs[0] + pairs[1] + pairs[2];
  const bool ok = total >= 500 && pairs[0] > 0 && pairs[1] > 0 && pairs[2] > 0 && found[0] == pairs[0] &&
                  found[1] == pairs[1] && found[2] == pairs[2] && secs < 120.0;
  report(3, ok, "certificate soundness",
         fmt("exact-step %.0f/%.0f, model-decrease %.0f/%.0f", found[0], pairs[0], found[1], pairs[1]) +
             fmt(", inexact-optimal %.0f/%.0f, %.1fs", found[2], pairs[2], secs));
}

void ac4() {
  const ProblemSpec s = make_problem("support_l1");
  long iterations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (const Vector& x : uniform_samples(s.problem.working_box, 40, 7)) {
    const Linearization lin = linearize(s.problem, x);
    for (double eps : {1e-4, 1e-8, 1e-12}) {
      const DualState st = solve_dual_accelerated(s.problem, lin, DualOptions{eps, 1000000});
      const double C = dual_rate_constant(s.problem, lin);
      for (std::size_t k = 0; k < st.gap_trace.size(); ++k) {
        worst_excess = std::max(worst_excess, st.gap_trace[k] - dual_rate_bound(C, static_cast<int>(k)));
        ++iterations;
      }
    }
  }
  // Inexact steps along runs, checked against the exact piecewise solver.
  long steps = 0;
  double worst_acc = -std::numeric_limits<double>::infinity();
  for (const auto& name : builtin_problem_names()) {
    const ProblemSpec p = make_problem(name);
    if (p.problem.dimension() != 1 || !p.problem.h.support_set(1) || !has_structural_solver(p.problem)) continue;
    for (const Vector& x0 : p.sweep_starts) {
      SolveOptions o;
      o.stop.max_iter = 300;
      o.schedule = ToleranceSchedule{1.0, 0.5};
      const SolveReport r = run_prox_linear(p.problem, x0, o);
      for (const IterateRecord& rec : r.iterates) {
        const Linearization lin = linearize(p.problem, rec.x);
        const double inf_model = model_value(p.problem, lin, minimize_model_exact(p.problem, lin));
        worst_acc = std::max(worst_acc, rec.model_value - inf_model - rec.eps);
        if (name == "support_l1") worst_excess = std::max(worst_excess, rec.rate_excess);
        ++steps;
      }
    }
  }
  const bool ok = iterations > 0 && worst_excess <= 1e-10 && steps > 0 && worst_acc <= 1e-8;
  report(4, ok, "dual gap rate",
         fmt("%.0f dual iterations, max gap - bound = %.2e; %.0f inexact steps, max f_x(x+) - inf - eps = %.2e",
             iterations, worst_excess, steps, worst_acc));
}

void ac5() {
  const ComplexityEstimate c = complexity_estimate(1e-3);
  const bool ok = c.exponent >= 3.07 && c.exponent <= 3.08 && c.prefactor >= 3.9 && c.prefactor <= 4.3;
  report(5, ok, "complexity formula",
         fmt("q = %.4f, exponent 3+q = %.4f, prefactor = %.3f, count = %.3e", c.q, c.exponent, c.prefactor, c.count));
}

void ac6() {
  long step_checks = 0, model_checks = 0, bad = 0;
  double worst_step = 0.0, worst_model = 0.0;
  for (const ProblemSpec& s : gridded()) {
    if (!s.stationary_set || !s.x_star || !(s.gamma > 0.0)) continue;
    const GridFunction g = s.make_grid();
    ErrorBoundEstimate e;
    e.L = estimate_slope_error_bound_L(g, *s.stationary_set, *s.x_star, s.gamma);
    e.gamma = s.gamma;
    e.x_star = *s.x_star;
    e.eta = kDefaultEtaSafety * s.problem.curvature();
    for (const Vector& x0 : s.sweep_starts) {
      SolveOptions o;
      o.stop.max_iter = 200;
      const SolveReport r = run_prox_linear(s.problem, x0, o);
      for (const IterateRecord& rec : r.iterates) {
        const double dist = dist_to_set(rec.x, *s.stationary_set);
        if (step_bound_valid(e, rec.x, rec.x_next)) {
          const double b = step_error_bound(e.L, e.eta, rec.step);
          if (dist > b) ++bad;
          if (b > 0) worst_step = std::max(worst_step, dist / b);
          ++step_checks;
        }
        if (model_bound_valid(e, rec.x, rec.delta)) {
          const double b = model_error_bound(e.L, e.eta, rec.delta);
          if (dist > b) ++bad;
          if (b > 0) worst_model = std::max(worst_model, dist / b);
          ++model_checks;
        }
      }
    }
  }
  const bool ok = bad == 0 && step_checks > 0 && model_checks > 0;
  report(6, ok, "error-bound chain",
         fmt("%.0f step and %.0f model checks in region, %.0f violations, max dist/bound %.3f",
             step_checks, model_checks, bad, std::max(worst_step, worst_model)));
}

void ac7() {
  const double h = 1e-3;
  const GridFunction g = GridFunction::sample([](const Vector& x) { return x[0] * x[0]; },
                                              Box(vec({-1.0}), vec({1.0})), h);
  std::vector<double> thetas;
  for (int i = 1; i < 20; ++i) thetas.push_back(0.05 * i);
  const KlEstimate e = estimate_kl_parameters(g, 0.0, g.box(), thetas);
  const KlToSlope fwd = kl_to_slope_bound(e.theta, e.alpha);
  const PointSet S{{vec({0.0})}};
  double fwd_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.value(k) <= 0.0) continue;
    const double s = slope(g, k);
    fwd_excess = std::max(fwd_excess, dist_to_set(g.node(k), S) - fwd.constant * std::pow(s, fwd.exponent));
  }
  const double L = estimate_slope_error_bound_L(g, S, vec({0.0}), 1.0);
  const SlopeToKl conv = slope_bound_to_kl(L, 0.0);
  double conv_excess = -std::numeric_limits<double>::infinity();
  long conv_nodes = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.value(k) <= 0.0) continue;
    conv_excess = std::max(conv_excess, std::sqrt(g.value(k)) - conv.constant * slope(g, k));
    ++conv_nodes;
  }
  const bool ok = std::abs(e.theta - 0.5) <= 0.05 + 1e-12 && std::abs(e.alpha - 0.5) <= 0.025 &&
                  fwd_excess <= h && conv_excess <= h;
  report(7, ok, "KL checks",
         fmt("theta = %.3f, alpha = %.4f, forward C = %.4f, forward excess %.2e", e.theta, e.alpha, fwd.constant,
             fwd_excess) +
             fmt(", L = %.4f, converse K = %.4f, converse excess %.2e on %.0f nodes", L, conv.constant, conv_excess,
                 conv_nodes));
}

void ac8() {
  long runs = 0, by_tolerance = 0, bad = 0;
  double worst = 0.0;
  for (const ProblemSpec& s : gridded()) {
    if (!s.problem.h.support_set(s.problem.c.output_dim)) continue;
    const GridFunction g = s.make_grid();
    for (const Vector& x0 : s.sweep_starts) {
      SolveOptions o;
      o.stop.max_iter = 3000;
      o.schedule = ToleranceSchedule{1.0, 0.5};
      const SolveReport r = run_prox_linear(s.problem, x0, o);
      ++runs;
      by_tolerance += r.stop_reason != "max_iterations";
      if (!g.box().contains(r.x_final, 1e-12)) {
        ++bad;
        continue;
      }
      const double ls = limiting_slope_at(g, r.x_final);
      worst = std::max(worst, ls / g.spacing());
      if (ls > 10.0 * g.spacing()) ++bad;
    }
  }
  report(8, bad == 0 && runs > 0, "inexact subsequence convergence",
         fmt("%.0f runs with eps_k = k^-1.5, %.0f stopped by tolerance, %.0f violations, max limiting slope %.2f h",
             runs, by_tolerance, bad, worst));
}

}  // namespace

int main() {
  try {
    ac1();
    ac2();
    ac3();
    ac4();
    ac5();
    ac6();
    ac7();
    ac8();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
