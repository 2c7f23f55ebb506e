#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "taylor/certificates.hpp"
#include "taylor/composite.hpp"
#include "taylor/problems.hpp"
#include "taylor/slope_oracle.hpp"
#include "taylor/trace.hpp"
#include "taylor/verification.hpp"

using namespace taylor;

namespace {

// 0 ok, 1 failed invariant, 2 bad input, 3 witness failures, 4 budget exhausted.
constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitInput = 2;
constexpr int kExitWitness = 3;
constexpr int kExitBudget = 4;

Vector parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw std::invalid_argument("bad coordinate '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty point");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Writes to the file when a path is given, stdout otherwise.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  fn(out);
}

struct SolveArgs {
  std::string problem;
  std::string x0;
  double step_tol = 1e-8;
  double decrease_tol = 1e-12;
  int max_iter = 1000;
  double eps0 = 0.0;
  double q = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string csv;
  bool deterministic = false;
  double eta_safety = kDefaultEtaSafety;
  int model_samples = 1000;
};

int run_solve(const SolveArgs& a, const CLI::App& cmd) {
  const ProblemSpec spec = resolve_problem(a.problem);
  const Vector x0 = a.x0.empty() ? spec.default_x0 : parse_point(a.x0);
  if (x0.size() != spec.problem.dimension()) {
    throw std::invalid_argument("x0 has dimension " + std::to_string(x0.size()) + ", problem '" +
                                spec.name() + "' needs " + std::to_string(spec.problem.dimension()));
  }
  if (!(a.step_tol >= 0.0) || !(a.decrease_tol >= 0.0)) {
    throw std::invalid_argument("tolerances must be >= 0");
  }
  if (a.max_iter < 0) throw std::invalid_argument("--max-iter must be >= 0");

  SolveOptions opts;
  opts.stop.step_tol = a.step_tol;
  opts.stop.decrease_tol = a.decrease_tol;
  opts.stop.max_iter = a.max_iter;
  opts.seed = a.seed;
  opts.eta_safety = a.eta_safety;
  opts.model_samples = a.model_samples;
  if (cmd.count("--inexact-eps0") > 0 || cmd.count("--inexact-q") > 0) {
    ToleranceSchedule s;
    if (cmd.count("--inexact-eps0") > 0) s.eps0 = a.eps0;
    if (cmd.count("--inexact-q") > 0) s.q = a.q;
    if (!(s.eps0 > 0.0) || !(s.q > 0.0)) {
      throw std::invalid_argument("inexact schedule needs eps0 > 0 and q > 0");
    }
    opts.schedule = s;
  }

  const SolveReport report = run_prox_linear(spec.problem, x0, opts);
  TraceOptions topts;
  topts.deterministic = a.deterministic;
  emit(a.out, [&](std::ostream& os) { write_trace(os, report, topts); });
  if (!a.csv.empty()) emit(a.csv, [&](std::ostream& os) { write_csv(os, report); });

  if (report.stop_reason == "max_iterations" && a.max_iter > 0) {
    std::cerr << "taylorcert: stopping tolerance not reached within " << a.max_iter
              << " iterations (step " << report.iterates.back().step << ")\n";
    return kExitBudget;
  }
  return kExitOk;
}

struct CertifyArgs {
  std::string trace;
  std::string problem;
  std::string out;
};

int run_certify(const CertifyArgs& a) {
  std::ifstream in(a.trace);
  if (!in) throw std::invalid_argument("cannot read trace '" + a.trace + "'");
  const SolveReport trace = read_trace(in);
  std::optional<ProblemSpec> spec;
  const std::string name = a.problem.empty() ? trace.problem : a.problem;
  try {
    spec = resolve_problem(name);
  } catch (const std::out_of_range&) {
    std::cerr << "taylorcert: problem '" << name << "' unknown, skipping grid witnesses\n";
  }
  const CertifyReport report = certify_trace(trace, spec ? &*spec : nullptr);
  emit(a.out, [&](std::ostream& os) { os << report.to_json().dump(2) << "\n"; });
  for (const CertifyRecord& r : report.records) {
    if (!r.pass) std::cerr << "taylorcert: no witness for iterate " << r.k << "\n";
  }
  return report.ok() ? kExitOk : kExitWitness;
}

struct VerifyArgs {
  std::string corpus = "all";
  std::uint64_t seed = 0;
  int max_iter = 500;
  int inexact_max_iter = 3000;
  int max_starts = 0;
  double eps0 = 1.0;
  double q = 0.5;
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  VerifyOptions opts;
  opts.selector = a.corpus;
  opts.seed = a.seed;
  opts.max_iter = a.max_iter;
  opts.inexact_max_iter = a.inexact_max_iter;
  opts.max_starts = a.max_starts;
  opts.schedule = ToleranceSchedule{a.eps0, a.q};
  VerificationReport report;
  try {
    report = verify_theorems(opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "taylorcert: " << e.what() << "\n";
    return kExitInput;
  }
  emit(a.out, [&](std::ostream& os) { os << report.to_json().dump(2) << "\n"; });
  for (const TheoremCheck& c : report.checks) {
    std::cerr << (c.ok() ? "ok   " : "FAIL ") << c.theorem << " " << c.passes << "/"
              << c.instances << "\n";
    for (const auto& f : c.failures) std::cerr << "     " << f.dump() << "\n";
  }
  return report.ok() ? kExitOk : kExitInvariant;
}

struct KlArgs {
  std::string problem;
  std::string grid;
  double f_star = 0.0;
  std::string center;
  double radius = 0.0;
  std::string out;
};

int run_kl(const KlArgs& a, const CLI::App& cmd) {
  std::optional<ProblemSpec> spec;
  std::optional<GridFunction> grid;
  if (!a.grid.empty()) {
    std::ifstream in(a.grid);
    if (!in) throw std::invalid_argument("cannot read grid '" + a.grid + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw FormatError(std::string("grid file: ") + e.what());
    }
    grid = grid_from_json(j);
  } else {
    if (a.problem.empty()) throw std::invalid_argument("kl-estimate needs --problem or --grid");
    spec = resolve_problem(a.problem);
    if (!spec->grid) throw std::invalid_argument("problem '" + spec->name() + "' has no grid");
    grid = spec->make_grid();
  }
  double f_star = a.f_star;
  if (cmd.count("--f-star") == 0) {
    if (!spec || !spec->f_star) throw std::invalid_argument("f* unknown; pass --f-star");
    f_star = *spec->f_star;
  }
  Box region = grid->box();
  if (!a.center.empty() || (spec && spec->x_star)) {
    const Vector c = a.center.empty() ? *spec->x_star : parse_point(a.center);
    const double r = a.radius > 0.0 ? a.radius : (spec && spec->gamma > 0.0 ? spec->gamma : 0.0);
    if (r > 0.0) {
      region = Box(c.array() - r, c.array() + r);
      region = Box(region.lo.cwiseMax(grid->box().lo), region.hi.cwiseMin(grid->box().hi));
    }
  }
  std::vector<double> thetas;
  for (int i = 1; i < 20; ++i) thetas.push_back(0.05 * i);
  const KlEstimate est = estimate_kl_parameters(*grid, f_star, region, thetas);
  const KlToSlope fwd = kl_to_slope_bound(est.theta, est.alpha);
  json out{{"theta", est.theta},
           {"alpha", est.alpha},
           {"residual", est.residual},
           {"loglog_slope", est.loglog_slope},
           {"admissible_nodes", est.admissible_nodes},
           {"zero_slope_nodes", est.zero_slope_nodes},
           {"f_star", f_star},
           {"region", {{"lo", to_json(region.lo)}, {"hi", to_json(region.hi)}}},
           {"slope_error_bound", {{"constant", fwd.constant}, {"exponent", fwd.exponent}}}};
  emit(a.out, [&](std::ostream& os) { os << out.dump(2) << "\n"; });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prox-linear solver with stationarity certificates"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "run the prox-linear method and write a JSON-lines trace");
  solve->add_option("problem_pos", sa.problem, "problem name or descriptor path");
  solve->add_option("--problem", sa.problem, "problem name or descriptor path");
  solve->add_option("--x0", sa.x0, "starting point, comma separated");
  solve->add_option("--step-tol", sa.step_tol, "stop when the step is at most this")->capture_default_str();
  solve->add_option("--decrease-tol", sa.decrease_tol, "stop when the model decrease is at most this")->capture_default_str();
  solve->add_option("--max-iter", sa.max_iter, "iteration cap")->capture_default_str();
  solve->add_option("--inexact-eps0", sa.eps0, "inexact schedule eps_k = eps0 k^-(1+q)");
  solve->add_option("--inexact-q", sa.q, "inexact schedule exponent q > 0");
  solve->add_option("--seed", sa.seed, "seed for model-error sampling")->capture_default_str();
  solve->add_option("--out", sa.out, "trace path (stdout when absent)");
  solve->add_option("--csv", sa.csv, "also write a CSV table here");
  solve->add_option("--eta-safety", sa.eta_safety, "eta = safety * l * beta")->capture_default_str();
  solve->add_option("--model-samples", sa.model_samples, "samples per model-error check")->capture_default_str();
  solve->add_flag("--deterministic", sa.deterministic, "omit wall time so reruns are byte-identical");

  CertifyArgs ca;
  auto* certify = app.add_subcommand("certify", "recompute certificates from a trace and search for witnesses");
  certify->add_option("trace", ca.trace, "trace path")->required();
  certify->add_option("--problem", ca.problem, "override the problem named in the trace");
  certify->add_option("--out", ca.out, "report path (stdout when absent)");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify-theorems", "run the invariant suite over the corpus");
  verify->add_option("corpus_pos", va.corpus, "corpus selector");
  verify->add_option("--corpus", va.corpus, "'all', 'convex' or a name substring")->capture_default_str();
  verify->add_option("--seed", va.seed)->capture_default_str();
  verify->add_option("--max-iter", va.max_iter, "iteration cap for exact runs")->capture_default_str();
  verify->add_option("--inexact-max-iter", va.inexact_max_iter)->capture_default_str();
  verify->add_option("--inexact-eps0", va.eps0)->capture_default_str();
  verify->add_option("--inexact-q", va.q)->capture_default_str();
  verify->add_option("--max-starts", va.max_starts, "starting points per problem, 0 for all")->capture_default_str();
  verify->add_option("--out", va.out, "report path (stdout when absent)");

  KlArgs ka;
  auto* kl = app.add_subcommand("kl-estimate", "fit KL parameters on a grid and convert to a slope error bound");
  kl->add_option("problem_pos", ka.problem, "problem name or descriptor path");
  kl->add_option("--problem", ka.problem);
  kl->add_option("--grid", ka.grid, "grid JSON {dimension, box, spacing, values_row_major}");
  kl->add_option("--f-star", ka.f_star, "minimum value; defaults to the problem's");
  kl->add_option("--center", ka.center, "region center, comma separated");
  kl->add_option("--radius", ka.radius, "region half-width");
  kl->add_option("--out", ka.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*solve) return run_solve(sa, *solve);
    if (*certify) return run_certify(ca);
    if (*verify) return run_verify(va);
    if (*kl) return run_kl(ka, *kl);
  } catch (const FormatError& e) {
    std::cerr << "taylorcert: malformed input: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::out_of_range& e) {
    std::cerr << "taylorcert: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "taylorcert: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "taylorcert: error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitInput;
}
