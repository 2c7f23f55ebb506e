#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "taylor/problem.hpp"
#include "taylor/slope_oracle.hpp"

namespace taylor {

/// Box and spacing of the grid rendering used by the slope oracle.
struct GridSpec {
  Box box;
  double spacing = 1e-3;
};

struct ProblemSpec {
  CompositeProblem problem;
  std::optional<PointSet> stationary_set;
  std::optional<double> f_star;
  std::optional<GridSpec> grid;
  Vector default_x0;
  /// Starting points used by corpus sweeps.
  std::vector<Vector> sweep_starts;
  bool convex = false;
  /// Error-bound reference point and radius (defaults to the nearest point of S).
  std::optional<Vector> x_star;
  double gamma = 0.0;
  std::string description;
  /// Source descriptor, kept for JSON round trips.
  nlohmann::json descriptor;

  const std::string& name() const { return problem.name; }
  /// Sample f on the grid; throws when there is no grid.
  GridFunction make_grid() const;
};

/// Names of the built-in corpus, in registry order.
std::vector<std::string> builtin_problem_names();
bool is_builtin_problem(const std::string& name);

/// Build a problem from a JSON descriptor
/// {name, g, h, c: {name, params}, l, beta, box, ...}. Throws FormatError.
ProblemSpec problem_from_json(const nlohmann::json& descriptor);
ProblemSpec load_problem_file(const std::string& path);

/// Built-in problem by name; throws std::out_of_range on an unknown name.
ProblemSpec make_problem(const std::string& name);

/// Environment variable naming a directory of extra problem descriptors.
inline constexpr const char* kCorpusDirEnv = "TAYLORCERT_CORPUS_DIR";

/// Resolve a name or a path: an existing .json path first, then
/// $TAYLORCERT_CORPUS_DIR/<name>.json, then the built-in registry.
ProblemSpec resolve_problem(const std::string& name_or_path);

/// Every problem whose name contains the selector ("all" or "" matches all),
/// built-ins followed by descriptors from the corpus directory.
std::vector<ProblemSpec> select_corpus(const std::string& selector);

}  // namespace taylor
