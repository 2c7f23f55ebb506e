#include "taylor/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "taylor/trace.hpp"

namespace taylor {

namespace {

using nlohmann::json;

constexpr double kLedgerSlack = 1e-10;
constexpr double kGapSlack = 1e-10;

double rel_tol(double v) { return 1e-12 * (1.0 + std::abs(v)); }

// One-sided directional derivative of h at u in direction w.
double outer_directional(const OuterFunction& h, int m, const Vector& u, const Vector& w) {
  constexpr double kink = 1e-12;
  using K = OuterFunction::Kind;
  if (h.kind() == K::SquaredNorm) return 2.0 * u.dot(w);
  if (h.kind() == K::Identity) return w[0];
  const SupportSet Z = *h.support_set(m);
  switch (Z.kind()) {
    case SupportSet::Kind::Interval:
    case SupportSet::Kind::Box: {
      double total = 0.0;
      for (int i = 0; i < u.size(); ++i) {
        const double lo = Z.lower()[i];
        const double hi = Z.upper()[i];
        if (u[i] > kink) {
          total += hi * w[i];
        } else if (u[i] < -kink) {
          total += lo * w[i];
        } else {
          total += std::max(lo * w[i], hi * w[i]);
        }
      }
      return total;
    }
    case SupportSet::Kind::Ball: {
      const double nu = u.norm();
      return nu > kink ? Z.radius() * u.dot(w) / nu : Z.radius() * w.norm();
    }
    case SupportSet::Kind::Simplex: {
      const double top = u.maxCoeff();
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < u.size(); ++i) {
        if (u[i] >= top - kink) best = std::max(best, w[i]);
      }
      return best;
    }
  }
  return 0.0;
}

double inner_directional(const ProximableTerm& g, const Vector& x, const Vector& v) {
  using K = ProximableTerm::Kind;
  switch (g.kind()) {
    case K::Zero: return 0.0;
    case K::L1: {
      double total = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        total += x[i] > 0 ? v[i] : (x[i] < 0 ? -v[i] : std::abs(v[i]));
      }
      return g.weight() * total;
    }
    case K::Box: {
      for (int i = 0; i < x.size(); ++i) {
        if ((x[i] <= g.box().lo[i] && v[i] < 0) || (x[i] >= g.box().hi[i] && v[i] > 0)) {
          return std::numeric_limits<double>::infinity();
        }
      }
      return 0.0;
    }
    case K::Custom: break;
  }
  throw std::invalid_argument("directional derivative unavailable for custom g");
}

double directional(const CompositeProblem& p, const Vector& x, const Vector& v) {
  const Linearization lin = linearize(p, x);
  return outer_directional(p.h, p.c.output_dim, lin.cx, lin.J * v) + inner_directional(p.g, x, v);
}

json point_json(const Vector& v) { return to_json(v); }

struct RunContext {
  const ProblemSpec* spec;
  const GridFunction* grid;
  std::optional<ErrorBoundEstimate> eb;
};

}  // namespace

void TheoremCheck::record(bool pass, const json& detail) {
  ++instances;
  if (pass) {
    ++passes;
  } else if (failures.size() < max_listed) {
    failures.push_back(detail);
  }
}

json TheoremCheck::to_json() const {
  return json{{"theorem", theorem},
              {"instances", instances},
              {"passes", passes},
              {"failures", failures}};
}

WitnessOutcome check_certificate_witness(const GridFunction& f, const StationarityCertificate& c,
                                         const Vector& x, const Vector& x_plus) {
  WitnessOutcome out;
  const Vector& anchor = anchor_of(c.regime) == Anchor::BasePoint ? x : x_plus;
  out.in_grid = f.box().contains(anchor, 1e-12);
  if (!out.in_grid) return out;
  out.query = certificate_query(f, c, anchor);
  out.witness = find_witness(f, out.query);
  return out;
}

double convex_subgradient_distance(const CompositeProblem& p, const Vector& x) {
  const int n = p.dimension();
  double worst = std::numeric_limits<double>::infinity();
  if (n == 1) {
    worst = std::min(directional(p, x, Vector::Constant(1, 1.0)),
                     directional(p, x, Vector::Constant(1, -1.0)));
  } else if (n == 2) {
    const int count = 3600;
    Vector v(2);
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * M_PI * i / count;
      v << std::cos(a), std::sin(a);
      worst = std::min(worst, directional(p, x, v));
    }
  } else {
    throw std::invalid_argument("subgradient distance is available in 1-d and 2-d");
  }
  return std::max(0.0, -worst);
}

bool VerificationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const TheoremCheck& c) { return c.ok(); });
}

const TheoremCheck* VerificationReport::find(const std::string& theorem) const {
  for (const TheoremCheck& c : checks) {
    if (c.theorem == theorem) return &c;
  }
  return nullptr;
}

json VerificationReport::to_json() const {
  json out;
  out["ok"] = ok();
  out["problems"] = problems;
  out["checks"] = json::array();
  for (const TheoremCheck& c : checks) out["checks"].push_back(c.to_json());
  return out;
}

namespace {

class Suite {
 public:
  TheoremCheck& operator[](const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      it = index_.emplace(name, checks_.size()).first;
      TheoremCheck fresh;
      fresh.theorem = name;
      checks_.push_back(fresh);
    }
    return checks_[it->second];
  }
  std::vector<TheoremCheck> take() { return std::move(checks_); }

 private:
  std::vector<TheoremCheck> checks_;
  std::map<std::string, std::size_t> index_;
};

json where(const ProblemSpec& s, const Vector& x0, int k) {
  return json{{"problem", s.name()}, {"x0", point_json(x0)}, {"k", k}};
}

void check_witness(Suite& suite, const std::string& name, const GridFunction& grid,
                   const StationarityCertificate& cert, const IterateRecord& rec,
                   const json& loc) {
  const WitnessOutcome w = check_certificate_witness(grid, cert, rec.x, rec.x_next);
  if (!w.in_grid) return;
  json detail = loc;
  detail["certificate"] = to_json(cert);
  suite[name].record(w.witness.has_value(), detail);
}

void check_run(Suite& suite, const RunContext& ctx, const SolveReport& run, bool inexact) {
  const ProblemSpec& spec = *ctx.spec;
  const CompositeProblem& p = spec.problem;
  for (const IterateRecord& rec : run.iterates) {
    const json loc = where(spec, run.x0, rec.k);
    {
      json d = loc;
      d["violation"] = rec.model_violation;
      suite["model_error"].record(rec.model_verified, d);
    }
    const double f_next = p.objective(rec.x_next);
    if (!inexact) {
      const bool chain = f_next <= rec.model_value + rel_tol(rec.model_value) &&
                         rec.model_value <= rec.f + rel_tol(rec.f);
      json d = loc;
      d["f"] = rec.f;
      d["model_value"] = rec.model_value;
      d["f_next"] = f_next;
      suite["descent_chain"].record(chain, d);
      json l = loc;
      l["slack"] = rec.ledger_slack;
      l["min_slack"] = rec.min_ledger_slack;
      suite["rate_ledger_sum"].record(rec.ledger_slack >= -kLedgerSlack, l);
      suite["rate_ledger_min"].record(rec.min_ledger_slack >= -kLedgerSlack, l);
    } else {
      json l = loc;
      l["slack"] = rec.min_ledger_slack;
      suite["rate_ledger_inexact"].record(rec.min_ledger_slack >= -kLedgerSlack, l);
      if (p.h.support_set(p.c.output_dim)) {
        json r = loc;
        r["rate_excess"] = rec.rate_excess;
        suite["dual_gap_rate"].record(rec.rate_excess <= kGapSlack, r);
      }
      if (p.dimension() == 1 && has_structural_solver(p)) {
        const Linearization lin = linearize(p, rec.x);
        const double inf_model = model_value(p, lin, minimize_model_exact(p, lin));
        const double excess = rec.model_value - inf_model;
        json a = loc;
        a["excess"] = excess;
        a["eps"] = rec.eps;
        a["achieved"] = rec.achieved_eps;
        suite["inexact_accuracy"].record(excess <= rec.eps + 1e-8 && excess <= rec.achieved_eps + 1e-8, a);
      }
    }

    if (ctx.grid) {
      check_witness(suite, inexact ? "witness_inexact_optimal" : "witness_exact_step", *ctx.grid,
                    rec.certificate, rec, loc);
      check_witness(suite, "witness_model_decrease", *ctx.grid, rec.decrease_certificate, rec, loc);
    }

    if (ctx.eb) {
      const ErrorBoundEstimate& e = *ctx.eb;
      const double dist = dist_to_set(rec.x, *spec.stationary_set);
      if (!inexact && step_bound_valid(e, rec.x, rec.x_next)) {
        const double bound = step_error_bound(e.L, e.eta, rec.step);
        json d = loc;
        d["dist"] = dist;
        d["bound"] = bound;
        suite["error_bound_step"].record(dist <= bound, d);
      }
      if (!inexact && model_bound_valid(e, rec.x, rec.delta)) {
        const double bound = model_error_bound(e.L, e.eta, rec.delta);
        json d = loc;
        d["dist"] = dist;
        d["bound"] = bound;
        suite["error_bound_model"].record(dist <= bound, d);
      }
      if (inexact && inexact_bound_valid(e, rec.x, rec.x_next, rec.achieved_eps)) {
        const double bound = inexact_error_bound(e.L, e.eta, rec.achieved_eps, rec.step);
        json d = loc;
        d["dist"] = dist;
        d["bound"] = bound;
        suite["error_bound_inexact"].record(dist <= bound, d);
      }
    }
  }

  if (ctx.grid && ctx.grid->box().contains(run.x_final, 1e-12)) {
    const bool converged = run.stop_reason != "max_iterations" || inexact;
    if (converged && !run.iterates.empty()) {
      const double ls = limiting_slope_at(*ctx.grid, run.x_final);
      json d = where(spec, run.x0, static_cast<int>(run.iterates.size()));
      d["limiting_slope"] = ls;
      d["x_final"] = point_json(run.x_final);
      d["stop_reason"] = run.stop_reason;
      suite[inexact ? "stationarity_inexact" : "stationarity_exact"].record(
          ls <= 10.0 * ctx.grid->spacing(), d);
    }
  }
}

void check_kl(Suite& suite, const ProblemSpec& spec, const GridFunction& grid) {
  const double h = grid.spacing();
  const Vector& xs = *spec.x_star;
  Box region(xs.array() - spec.gamma, xs.array() + spec.gamma);
  region = Box(region.lo.cwiseMax(grid.box().lo), region.hi.cwiseMin(grid.box().hi));
  std::vector<double> thetas;
  for (int i = 1; i < 20; ++i) thetas.push_back(0.05 * i);
  json base{{"problem", spec.name()}};
  KlEstimate est;
  try {
    est = estimate_kl_parameters(grid, *spec.f_star, region, thetas);
  } catch (const Error& e) {
    json d = base;
    d["error"] = e.what();
    suite["kl_to_slope_bound"].record(false, d);
    return;
  }
  // [f <= f*]: the known minimizers when listed, grid nodes otherwise.
  PointSet sub;
  if (spec.stationary_set) {
    for (const Vector& s : spec.stationary_set->points) {
      if (spec.problem.objective(s) <= *spec.f_star + 1e-9) sub.points.push_back(s);
    }
  }
  if (sub.empty()) sub = sublevel_nodes(grid, *spec.f_star, 1e-12);
  if (sub.empty()) {
    json d = base;
    d["error"] = "no grid node attains f*";
    suite["kl_to_slope_bound"].record(false, d);
    return;
  }
  const KlToSlope fwd = kl_to_slope_bound(est.theta, est.alpha);
  const double tol = 2.0 * h;
  int bad = 0;
  json worst;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid.value(k) - *spec.f_star > 1e-12)) continue;
    const Vector y = grid.node(k);
    if (!region.contains(y, 1e-12)) continue;
    const double s = slope(grid, k);
    const double excess = dist_to_set(y, sub) - fwd.constant * std::pow(s, fwd.exponent);
    if (excess > worst_excess) {
      worst_excess = excess;
      worst = json{{"node", point_json(y)}, {"excess", excess}};
    }
    if (excess > tol) ++bad;
  }
  json d = base;
  d["theta"] = est.theta;
  d["alpha"] = est.alpha;
  d["constant"] = fwd.constant;
  d["exponent"] = fwd.exponent;
  d["violations"] = bad;
  d["worst"] = worst;
  suite["kl_to_slope_bound"].record(bad == 0, d);

  // Converse at theta = 1/2 through the slope error-bound modulus on the same ball.
  double L = 0.0;
  try {
    L = estimate_slope_error_bound_L(grid, sub, xs, spec.gamma);
  } catch (const Error& e) {
    json c = base;
    c["error"] = e.what();
    suite["slope_bound_to_kl"].record(false, c);
    return;
  }
  const double l_prox = spec.convex ? 0.0 : spec.problem.curvature();
  const SlopeToKl conv = slope_bound_to_kl(L, l_prox);
  double max_slope = 0.0;
  grid.for_each_node_within(xs, spec.gamma, [&](std::size_t k, const Vector&, double) {
    max_slope = std::max(max_slope, slope(grid, k));
  });
  const double r_hat = conv.threshold(std::numeric_limits<double>::infinity(), max_slope);
  bad = 0;
  worst_excess = -std::numeric_limits<double>::infinity();
  grid.for_each_node_within(xs, spec.gamma, [&](std::size_t k, const Vector& y, double) {
    const double gap = grid.value(k) - *spec.f_star;
    if (!(gap > 1e-12) || !(gap < r_hat)) return;
    if (dist_to_set(y, sub) < 0.05 * spec.gamma) return;
    const double excess = std::sqrt(gap) - conv.constant * slope(grid, k);
    if (excess > worst_excess) {
      worst_excess = excess;
      worst = json{{"node", point_json(y)}, {"excess", excess}};
    }
    if (excess > tol) ++bad;
  });
  json c = base;
  c["L"] = L;
  c["l_proxreg"] = l_prox;
  c["constant"] = conv.constant;
  c["violations"] = bad;
  c["worst"] = worst;
  suite["slope_bound_to_kl"].record(bad == 0, c);
}

void check_dual(Suite& suite, const ProblemSpec& spec, std::uint64_t seed) {
  const CompositeProblem& p = spec.problem;
  const auto bases = uniform_samples(p.working_box, 8, seed + 17);
  for (const Vector& x : bases) {
    const Linearization lin = linearize(p, x);
    DualOptions opts;
    opts.eps = 1e-10;
    json loc{{"problem", spec.name()}, {"x", point_json(x)}};
    DualState st;
    try {
      st = solve_dual_accelerated(p, lin, opts);
    } catch (const SubsolverError& e) {
      json d = loc;
      d["error"] = e.what();
      suite["dual_gap_rate"].record(false, d);
      continue;
    }
    json r = loc;
    r["rate_excess"] = st.worst_rate_excess;
    r["iterations"] = st.iteration;
    suite["dual_gap_rate"].record(st.worst_rate_excess <= kGapSlack, r);

    const auto probes = uniform_samples(p.working_box, 200, seed + 31);
    const DualValue dv = dual_value(p, lin, st.z);
    double worst = -std::numeric_limits<double>::infinity();
    for (const Vector& y : probes) worst = std::max(worst, dv.phi - model_value(p, lin, y));
    r["weak_duality_excess"] = worst;
    suite["dual_weak_duality"].record(worst <= kGapSlack, r);

    if (p.dimension() == 1 && has_structural_solver(p)) {
      const Vector exact = minimize_model_exact(p, lin);
      const double dist = (st.y - exact).norm();
      const double bound = std::sqrt(2.0 * opts.eps / lin.rho) + 1e-12;
      json e = loc;
      e["distance"] = dist;
      e["bound"] = bound;
      suite["dual_exactness"].record(dist <= bound, e);
    }
  }
}

void check_subdifferential(Suite& suite, const ProblemSpec& spec, const GridFunction& grid) {
  const CompositeProblem& p = spec.problem;
  const double h = grid.spacing();
  const double tol = 10.0 * h * (1.0 + p.curvature());
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / 400);
  for (std::size_t k = 0; k < grid.size(); k += stride) {
    const Vector y = grid.node(k);
    if (!p.working_box.contains(y, 1e-12)) continue;
    const double s = slope(grid, k);
    const double dist = convex_subgradient_distance(p, y);
    json d{{"problem", spec.name()}, {"node", point_json(y)}, {"slope", s}, {"dist", dist}};
    suite["slope_below_subgradient_distance"].record(s <= dist + tol, d);
  }
  if (spec.stationary_set) {
    for (const Vector& x : spec.stationary_set->points) {
      if (!grid.box().contains(x, 1e-12)) continue;
      const double ls = limiting_slope_at(grid, x);
      const double dist = convex_subgradient_distance(p, x);
      json d{{"problem", spec.name()}, {"point", point_json(x)}, {"limiting_slope", ls}, {"dist", dist}};
      suite["limiting_slope_equals_subgradient_distance"].record(std::abs(ls - dist) <= tol, d);
    }
  }
}

}  // namespace

VerificationReport verify_theorems(const VerifyOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<ProblemSpec> corpus = select_corpus(options.selector);
  if (corpus.empty()) {
    throw std::invalid_argument("corpus selector '" + options.selector + "' matches no problem");
  }
  VerificationReport report;
  Suite suite;
  for (const ProblemSpec& spec : corpus) {
    report.problems.push_back(spec.name());
    const CompositeProblem& p = spec.problem;
    std::optional<GridFunction> grid;
    if (spec.grid) grid = spec.make_grid();

    {
      const ProblemAudit audit = audit_problem(p, 500, options.seed + 3);
      json d{{"problem", spec.name()},
             {"prox_expansion", audit.worst_prox_expansion},
             {"convexity_gap", audit.worst_convexity_gap},
             {"lipschitz_excess", audit.worst_lipschitz_excess}};
      suite["problem_audit"].record(audit.ok(), d);
    }

    RunContext ctx{&spec, grid ? &*grid : nullptr, std::nullopt};
    if (grid && spec.stationary_set && spec.x_star && spec.gamma > 0.0) {
      try {
        ErrorBoundEstimate e;
        e.L = estimate_slope_error_bound_L(*grid, *spec.stationary_set, *spec.x_star, spec.gamma);
        e.gamma = spec.gamma;
        e.x_star = *spec.x_star;
        e.eta = kDefaultEtaSafety * p.curvature();
        ctx.eb = e;
      } catch (const Error& err) {
        suite["slope_error_bound_estimate"].record(false, json{{"problem", spec.name()}, {"error", err.what()}});
      }
      if (ctx.eb) {
        suite["slope_error_bound_estimate"].record(true, json{{"problem", spec.name()}, {"L", ctx.eb->L}});
      }
    }

    std::vector<Vector> starts = spec.sweep_starts;
    if (options.max_starts > 0 && static_cast<int>(starts.size()) > options.max_starts) {
      starts.resize(static_cast<std::size_t>(options.max_starts));
    }
    const bool dual_capable = p.h.support_set(p.c.output_dim).has_value();
    for (const Vector& x0 : starts) {
      SolveOptions so;
      so.stop.max_iter = options.max_iter;
      so.seed = options.seed;
      try {
        const SolveReport run = run_prox_linear(p, x0, so);
        suite["run_completion"].record(true, json{});
        check_run(suite, ctx, run, false);
      } catch (const std::exception& e) {
        suite["run_completion"].record(false, json{{"problem", spec.name()}, {"x0", point_json(x0)}, {"error", e.what()}});
      }
      if (!dual_capable) continue;
      SolveOptions si = so;
      si.stop.max_iter = options.inexact_max_iter;
      si.schedule = options.schedule;
      try {
        const SolveReport run = run_prox_linear(p, x0, si);
        suite["run_completion"].record(true, json{});
        check_run(suite, ctx, run, true);
      } catch (const std::exception& e) {
        suite["run_completion"].record(false, json{{"problem", spec.name()}, {"x0", point_json(x0)}, {"mode", "inexact"}, {"error", e.what()}});
      }
    }

    if (grid && spec.f_star && spec.x_star && spec.gamma > 0.0) check_kl(suite, spec, *grid);
    if (dual_capable) check_dual(suite, spec, options.seed);
    if (grid && spec.convex) check_subdifferential(suite, spec, *grid);
  }
  report.checks = suite.take();
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

json CertifyReport::to_json() const {
  json out;
  out["problem"] = problem;
  out["grid_checked"] = grid_checked;
  out["passes"] = passes;
  out["failures"] = failures;
  out["iterates"] = json::array();
  for (const CertifyRecord& r : records) {
    json j;
    j["k"] = r.k;
    j["pass"] = r.pass;
    j["recorded_matches"] = r.recorded_matches;
    j["certificate"] = taylor::to_json(r.certificate);
    j["decrease_certificate"] = taylor::to_json(r.decrease_certificate);
    auto witness = [](const std::optional<WitnessOutcome>& w) -> json {
      if (!w || !w->in_grid) return nullptr;
      if (!w->witness) return json{{"found", false}};
      return json{{"found", true},
                  {"point", taylor::to_json(w->witness->point)},
                  {"value", w->witness->value},
                  {"slope", w->witness->slope}};
    };
    j["step_witness"] = witness(r.step_witness);
    j["decrease_witness"] = witness(r.decrease_witness);
    out["iterates"].push_back(j);
  }
  return out;
}

CertifyReport certify_trace(const SolveReport& trace, const ProblemSpec* spec) {
  CertifyReport out;
  out.problem = trace.problem;
  std::optional<GridFunction> grid;
  if (spec && spec->grid) grid = spec->make_grid();
  out.grid_checked = grid.has_value();
  const double eta = trace.eta;
  for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
    const IterateRecord& rec = trace.iterates[i];
    CertifyRecord cr;
    cr.k = rec.k;
    Vector x_next = rec.x_next;
    if (x_next.size() == 0) {
      x_next = i + 1 < trace.iterates.size() ? trace.iterates[i + 1].x : trace.x_final;
    }
    const bool inexact = rec.certificate.regime == Regime::InexactOptimal;
    cr.certificate = inexact ? cert_inexact_optimal(eta, rec.achieved_eps, rec.step)
                             : cert_exact_quadratic(eta, rec.step);
    cr.decrease_certificate = cert_model_decrease(eta, rec.delta);
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)); };
    cr.recorded_matches = close(cr.certificate.slope_bound, rec.certificate.slope_bound) &&
                          close(cr.certificate.point_radius, rec.certificate.point_radius) &&
                          close(cr.certificate.value_gap, rec.certificate.value_gap);
    if (grid) {
      cr.step_witness = check_certificate_witness(*grid, cr.certificate, rec.x, x_next);
      cr.decrease_witness = check_certificate_witness(*grid, cr.decrease_certificate, rec.x, x_next);
      const bool step_ok = !cr.step_witness->in_grid || cr.step_witness->witness.has_value();
      const bool dec_ok = !cr.decrease_witness->in_grid || cr.decrease_witness->witness.has_value();
      cr.pass = step_ok && dec_ok;
    } else {
      cr.pass = std::isfinite(cr.certificate.slope_bound) && std::isfinite(cr.decrease_certificate.slope_bound);
    }
    if (cr.pass) {
      ++out.passes;
    } else {
      ++out.failures;
    }
    out.records.push_back(std::move(cr));
  }
  return out;
}

}  // namespace taylor
