#include "taylor/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>

namespace taylor {

namespace {

using json = nlohmann::json;

// Built-in corpus as descriptors, so built-ins and user files share one loader.
const char* const kBuiltins = R"JSON([
{
  "name": "footnote",
  "description": "f(t) = |t^2/2 + t|; prox-linear iterates reach 0 while |f'(x_k)| -> 1",
  "g": {"tag": "zero"},
  "h": {"tag": "abs"},
  "c": {"name": "scalar_quadratic", "params": {"a": 1.0, "b": 1.0, "c0": 0.0}},
  "l": 1.0, "beta": 1.0,
  "box": {"lo": [-3.0], "hi": [3.0]},
  "stationary_set": [[-2.0], [-1.0], [0.0]],
  "f_star": 0.0,
  "grid": {"spacing": 1e-3},
  "x0": [1.0],
  "starts": [[1.0], [2.0], [2.5], [0.5], [0.05], [-0.5], [-0.7], [-1.5], [-2.5], [1.3], [2.9], [-2.9]],
  "x_star": [0.0], "gamma": 0.5
},
{
  "name": "rosen_ls",
  "description": "||(x1^2 - x2, x2 - 1)||, a Gauss-Newton instance with S = {(1,1), (-1,1), (0,1/2)}",
  "g": {"tag": "zero"},
  "h": {"tag": "norm2"},
  "c": {"name": "rosenbrock_residual"},
  "l": 1.0, "beta": 2.0,
  "box": {"lo": [0.5, 0.5], "hi": [1.5, 1.5]},
  "stationary_set": [[1.0, 1.0], [-1.0, 1.0], [0.0, 0.5]],
  "f_star": 0.0,
  "grid": {"spacing": 1e-3},
  "x0": [1.3, 0.8],
  "starts": [[1.3, 0.8], [0.7, 1.2], [1.2, 1.3], [0.8, 0.7], [1.1, 1.05]],
  "x_star": [1.0, 1.0], "gamma": 0.3
},
{
  "name": "l1_scalar",
  "description": "0.5|t| + |t^2/2 - 1|, an l1-regularized scalar composite",
  "g": {"tag": "l1", "weight": 0.5},
  "h": {"tag": "abs"},
  "c": {"name": "scalar_quadratic", "params": {"a": 1.0, "b": 0.0, "c0": -1.0}},
  "l": 1.0, "beta": 1.0,
  "box": {"lo": [-3.0], "hi": [3.0]},
  "stationary_set": [[-1.4142135623730951], [-0.5], [0.0], [0.5], [1.4142135623730951]],
  "f_star": 0.7071067811865476,
  "grid": {"spacing": 1e-3},
  "x0": [2.5],
  "starts": [[2.5], [2.0], [1.0], [0.3], [-0.2], [-1.0], [-2.2], [-2.9], [1.7], [-1.6]],
  "x_star": [1.4142135623730951], "gamma": 0.5
},
{
  "name": "support_l1",
  "description": "support function of [-1,1]^2 applied to (t^2/2 + t, t - 1/2); exercises the dual subsolver",
  "g": {"tag": "zero"},
  "h": {"tag": "support", "set": {"tag": "box", "lo": [-1.0, -1.0], "hi": [1.0, 1.0]}},
  "c": {"name": "support_pair"},
  "l": 1.4142135623730951, "beta": 1.0,
  "box": {"lo": [-3.0], "hi": [3.0]},
  "stationary_set": [[-2.0], [0.0]],
  "f_star": 0.5,
  "grid": {"spacing": 1e-3},
  "x0": [1.5],
  "starts": [[1.5], [2.5], [0.8], [0.2], [-0.4], [-1.0], [-2.6], [2.9]],
  "x_star": [0.0], "gamma": 0.5
},
{
  "name": "quadratic2d",
  "description": "x1^2/2 + 2 x2^2 through h = identity: proximal gradient with step 1/4",
  "g": {"tag": "zero"},
  "h": {"tag": "identity"},
  "c": {"name": "diag_quadratic", "params": {"d": [1.0, 4.0]}},
  "l": 1.0, "beta": 4.0,
  "box": {"lo": [-0.2, -0.2], "hi": [1.2, 0.2]},
  "stationary_set": [[0.0, 0.0]],
  "f_star": 0.0,
  "convex": true,
  "grid": {"spacing": 1e-3},
  "x0": [1.0, 0.15],
  "starts": [[1.0, 0.15], [0.6, -0.1], [1.1, -0.18]],
  "x_star": [0.0, 0.0], "gamma": 0.2
},
{
  "name": "gd_scalar",
  "description": "t^2/2 through h = identity: one gradient step reaches the minimizer",
  "g": {"tag": "zero"},
  "h": {"tag": "identity"},
  "c": {"name": "scalar_quadratic", "params": {"a": 1.0, "b": 0.0, "c0": 0.0}},
  "l": 1.0, "beta": 1.0,
  "box": {"lo": [-2.0], "hi": [2.0]},
  "stationary_set": [[0.0]],
  "f_star": 0.0,
  "convex": true,
  "grid": {"spacing": 1e-3},
  "x0": [1.0],
  "starts": [[1.0], [-1.5]],
  "x_star": [0.0], "gamma": 0.5
},
{
  "name": "abs_shift",
  "description": "|t - 0.3|, a convex sharp instance",
  "g": {"tag": "zero"},
  "h": {"tag": "abs"},
  "c": {"name": "scalar_quadratic", "params": {"a": 0.0, "b": 1.0, "c0": -0.3}},
  "l": 1.0, "beta": 1.0,
  "box": {"lo": [-1.0], "hi": [1.0]},
  "stationary_set": [[0.3]],
  "f_star": 0.0,
  "convex": true,
  "grid": {"spacing": 1e-3},
  "x0": [0.9],
  "starts": [[0.9], [-0.8]],
  "x_star": [0.3], "gamma": 0.5
},
{
  "name": "boxls",
  "description": "box-constrained Levenberg-Marquardt on [0,1]^2 with l = 2 (sup ||c|| + sup ||J|| diam) sampled",
  "g": {"tag": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
  "h": {"tag": "squared_norm"},
  "c": {"name": "boxls_residual"},
  "l": "auto", "beta": 1.0,
  "box": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]},
  "x0": [0.2, 0.2],
  "starts": [[0.2, 0.2], [0.9, 0.1], [0.5, 0.9]]
}
])JSON";

const json& builtin_descriptors() {
  static const json all = json::parse(kBuiltins);
  return all;
}

Vector to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(what + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw FormatError(where + ": numeric field '" + key + "' required");
  }
  return j.at(key).get<double>();
}

double param(const json& params, const char* key, double fallback) {
  if (!params.is_object() || !params.contains(key)) return fallback;
  if (!params.at(key).is_number()) throw FormatError(std::string("c param '") + key + "' must be a number");
  return params.at(key).get<double>();
}

// Returns the map and its Jacobian Lipschitz constant.
std::pair<SmoothMap, double> smooth_map(const json& c) {
  if (!c.is_object() || !c.contains("name") || !c.at("name").is_string()) {
    throw FormatError("c must be an object with a string 'name'");
  }
  const std::string name = c.at("name").get<std::string>();
  const json params = c.value("params", json::object());
  SmoothMap m;
  m.name = name;
  if (name == "scalar_quadratic") {
    const double a = param(params, "a", 1.0);
    const double b = param(params, "b", 0.0);
    const double c0 = param(params, "c0", 0.0);
    m.input_dim = 1;
    m.output_dim = 1;
    m.value = [=](const Vector& x) { return Vector::Constant(1, 0.5 * a * x[0] * x[0] + b * x[0] + c0); };
    m.jacobian = [=](const Vector& x) { return Matrix::Constant(1, 1, a * x[0] + b); };
    return {m, std::abs(a)};
  }
  if (name == "rosenbrock_residual") {
    m.input_dim = 2;
    m.output_dim = 2;
    m.value = [](const Vector& x) {
      Vector r(2);
      r << x[0] * x[0] - x[1], x[1] - 1.0;
      return r;
    };
    m.jacobian = [](const Vector& x) {
      Matrix J(2, 2);
      J << 2.0 * x[0], -1.0, 0.0, 1.0;
      return J;
    };
    return {m, 2.0};
  }
  if (name == "support_pair") {
    m.input_dim = 1;
    m.output_dim = 2;
    m.value = [](const Vector& x) {
      Vector r(2);
      r << 0.5 * x[0] * x[0] + x[0], x[0] - 0.5;
      return r;
    };
    m.jacobian = [](const Vector& x) {
      Matrix J(2, 1);
      J << x[0] + 1.0, 1.0;
      return J;
    };
    return {m, 1.0};
  }
  if (name == "diag_quadratic") {
    if (!params.contains("d")) throw FormatError("diag_quadratic needs params.d");
    const Vector d = to_vector(params.at("d"), "params.d");
    if (d.size() < 1) throw FormatError("params.d must be nonempty");
    m.input_dim = static_cast<int>(d.size());
    m.output_dim = 1;
    m.value = [d](const Vector& x) { return Vector::Constant(1, 0.5 * (d.array() * x.array().square()).sum()); };
    m.jacobian = [d](const Vector& x) { return Matrix((d.array() * x.array()).matrix().transpose()); };
    return {m, d.cwiseAbs().maxCoeff()};
  }
  if (name == "boxls_residual") {
    m.input_dim = 2;
    m.output_dim = 2;
    m.value = [](const Vector& x) {
      Vector r(2);
      r << 0.5 * x[0] * x[0] + x[1] - 2.0, x[0] - 0.5 * x[1] * x[1] - 0.5;
      return r;
    };
    m.jacobian = [](const Vector& x) {
      Matrix J(2, 2);
      J << x[0], 1.0, 1.0, -x[1];
      return J;
    };
    return {m, 1.0};
  }
  throw FormatError("unknown smooth map '" + name + "'");
}

SupportSet support_set_from_json(const json& s) {
  const std::string tag = s.value("tag", "");
  if (tag == "interval") return SupportSet::interval(number(s, "half_width", "h.set"));
  if (tag == "box") return SupportSet::box(to_vector(s.at("lo"), "h.set.lo"), to_vector(s.at("hi"), "h.set.hi"));
  if (tag == "ball") {
    return SupportSet::ball(static_cast<int>(number(s, "dim", "h.set")), number(s, "radius", "h.set"));
  }
  if (tag == "simplex") return SupportSet::simplex(static_cast<int>(number(s, "dim", "h.set")));
  throw FormatError("unknown support set tag '" + tag + "'");
}

OuterFunction outer_from_json(const json& h) {
  const std::string tag = h.value("tag", "");
  if (tag == "abs") return OuterFunction::abs();
  if (tag == "norm2") return OuterFunction::norm2();
  if (tag == "l1_norm") return OuterFunction::l1_norm();
  if (tag == "max") return OuterFunction::max_coordinate();
  if (tag == "identity") return OuterFunction::identity();
  if (tag == "squared_norm") return OuterFunction::squared_norm();
  if (tag == "support") {
    if (!h.contains("set")) throw FormatError("support outer function needs 'set'");
    return OuterFunction::support(support_set_from_json(h.at("set")));
  }
  throw FormatError("unknown outer function tag '" + tag + "'");
}

ProximableTerm inner_from_json(const json& g) {
  const std::string tag = g.value("tag", "");
  if (tag == "zero") return ProximableTerm::zero();
  if (tag == "box") return ProximableTerm::box_indicator(Box(to_vector(g.at("lo"), "g.lo"), to_vector(g.at("hi"), "g.hi")));
  if (tag == "l1") return ProximableTerm::l1(number(g, "weight", "g"));
  throw FormatError("unknown g tag '" + tag + "'");
}

// 2 sup ||c|| over seeded samples and corners of the box.
// Lipschitz constant of ||u||^2 on a ball holding both c(box) and every
// linearization c(x) + J(x)(y - x) with x, y in the box: 2 (sup|c| + sup|J| diam).
double local_squared_norm_lipschitz(const SmoothMap& c, const Box& box) {
  double sup_c = 0.0;
  double sup_j = 0.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = box.dimension();
  auto visit = [&](const Vector& x) {
    sup_c = std::max(sup_c, c.value(x).norm());
    sup_j = std::max(sup_j, Eigen::JacobiSVD<Matrix>(c.jacobian(x)).singularValues()(0));
  };
  for (int s = 0; s < 4096; ++s) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = box.lo[i] + unit(rng) * (box.hi[i] - box.lo[i]);
    visit(x);
  }
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? box.hi[i] : box.lo[i];
    visit(x);
  }
  const double diam = (box.hi - box.lo).norm();
  return 2.0 * (sup_c + sup_j * diam);
}

}  // namespace

GridFunction ProblemSpec::make_grid() const {
  if (!grid) throw std::invalid_argument("problem '" + name() + "' has no grid");
  const CompositeProblem p = problem;
  return GridFunction::sample([p](const Vector& x) { return p.objective(x); }, grid->box,
                              grid->spacing);
}

ProblemSpec problem_from_json(const json& d) {
  if (!d.is_object()) throw FormatError("problem descriptor must be a JSON object");
  ProblemSpec spec;
  spec.descriptor = d;
  try {
    CompositeProblem& p = spec.problem;
    p.name = d.value("name", "unnamed");
    spec.description = d.value("description", "");
    if (!d.contains("g") || !d.contains("h") || !d.contains("c") || !d.contains("box")) {
      throw FormatError("descriptor needs g, h, c and box");
    }
    p.g = inner_from_json(d.at("g"));
    p.h = outer_from_json(d.at("h"));
    auto [map, beta_default] = smooth_map(d.at("c"));
    p.c = map;
    const json& box = d.at("box");
    p.working_box = Box(to_vector(box.at("lo"), "box.lo"), to_vector(box.at("hi"), "box.hi"));
    p.beta = d.contains("beta") ? number(d, "beta", p.name) : beta_default;
    if (d.contains("l") && d.at("l").is_string() && d.at("l").get<std::string>() == "auto") {
      if (p.h.kind() == OuterFunction::Kind::SquaredNorm) {
        p.l = local_squared_norm_lipschitz(p.c, p.working_box);
      } else {
        p.l = *p.h.natural_lipschitz(p.c.output_dim);
      }
    } else if (d.contains("l")) {
      p.l = number(d, "l", p.name);
    } else {
      auto nat = p.h.natural_lipschitz(p.c.output_dim);
      if (!nat) throw FormatError(p.name + ": l required for squared_norm");
      p.l = *nat;
    }
    p.check();

    if (d.contains("stationary_set")) {
      PointSet S;
      for (const json& pt : d.at("stationary_set")) S.points.push_back(to_vector(pt, "stationary_set"));
      S.tolerance = d.value("stationary_tolerance", 0.0);
      spec.stationary_set = S;
    }
    if (d.contains("f_star")) spec.f_star = number(d, "f_star", p.name);
    if (d.contains("grid")) {
      const json& g = d.at("grid");
      GridSpec gs;
      gs.spacing = number(g, "spacing", p.name + ".grid");
      gs.box = Box(g.contains("lo") ? to_vector(g.at("lo"), "grid.lo") : p.working_box.lo,
                   g.contains("hi") ? to_vector(g.at("hi"), "grid.hi") : p.working_box.hi);
      if (gs.box.dimension() != p.dimension() || p.dimension() > 2) {
        throw FormatError(p.name + ": grids are 1-d or 2-d and match the problem dimension");
      }
      spec.grid = gs;
    }
    spec.default_x0 = d.contains("x0") ? to_vector(d.at("x0"), "x0") : p.working_box.center();
    if (spec.default_x0.size() != p.dimension()) throw FormatError(p.name + ": x0 dimension mismatch");
    if (d.contains("starts")) {
      for (const json& s : d.at("starts")) spec.sweep_starts.push_back(to_vector(s, "starts"));
    } else {
      spec.sweep_starts.push_back(spec.default_x0);
    }
    spec.convex = d.value("convex", false);
    if (d.contains("x_star")) spec.x_star = to_vector(d.at("x_star"), "x_star");
    spec.gamma = d.value("gamma", 0.0);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed problem descriptor: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid problem descriptor: ") + e.what());
  }
  return spec;
}

ProblemSpec load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open problem file '" + path + "'");
  json d;
  try {
    in >> d;
  } catch (const json::exception& e) {
    throw FormatError("problem file '" + path + "' is not valid JSON: " + e.what());
  }
  return problem_from_json(d);
}

std::vector<std::string> builtin_problem_names() {
  std::vector<std::string> names;
  for (const json& d : builtin_descriptors()) names.push_back(d.at("name").get<std::string>());
  return names;
}

bool is_builtin_problem(const std::string& name) {
  const auto names = builtin_problem_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ProblemSpec make_problem(const std::string& name) {
  for (const json& d : builtin_descriptors()) {
    if (d.at("name") == name) return problem_from_json(d);
  }
  throw std::out_of_range("unknown problem '" + name + "'");
}

namespace {

std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> files;
  const char* dir = std::getenv(kCorpusDirEnv);
  if (!dir || !*dir) return files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

ProblemSpec resolve_problem(const std::string& name_or_path) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(name_or_path, ec)) return load_problem_file(name_or_path);
  if (const char* dir = std::getenv(kCorpusDirEnv); dir && *dir) {
    const auto candidate = std::filesystem::path(dir) / (name_or_path + ".json");
    if (std::filesystem::is_regular_file(candidate, ec)) return load_problem_file(candidate.string());
  }
  return make_problem(name_or_path);
}

std::vector<ProblemSpec> select_corpus(const std::string& selector) {
  const bool all = selector.empty() || selector == "all";
  auto match = [&](const ProblemSpec& s) {
    if (all) return true;
    if (selector == "convex") return s.convex;
    return s.name().find(selector) != std::string::npos;
  };
  std::vector<ProblemSpec> out;
  for (const json& d : builtin_descriptors()) {
    ProblemSpec s = problem_from_json(d);
    if (match(s)) out.push_back(std::move(s));
  }
  for (const auto& file : corpus_files()) {
    ProblemSpec s = load_problem_file(file.string());
    if (match(s)) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace taylor
