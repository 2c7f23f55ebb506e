#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "taylor/types.hpp"

namespace taylor {

/// A function sampled on a uniform grid over a 1-d or 2-d box.
///
/// Values are stored row-major: the last axis varies fastest. The grid may
/// keep the function it was sampled from, which lets the oracle evaluate f
/// exactly at off-grid points (iterates are rarely grid nodes).
class GridFunction {
 public:
  using Fn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;

  GridFunction(Box box, double spacing, std::vector<double> values, Fn source = {},
               GradFn gradient = {});

  static GridFunction sample(const Fn& f, const Box& box, double spacing, GradFn gradient = {});

  int dimension() const { return box_.dimension(); }
  const Box& box() const { return box_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return values_.size(); }
  int count(int axis) const { return counts_[static_cast<std::size_t>(axis)]; }
  const std::vector<double>& values() const { return values_; }
  bool has_source() const { return static_cast<bool>(source_); }
  const GradFn& gradient() const { return gradient_; }

  Vector node(std::size_t index) const;
  double value(std::size_t index) const { return values_[index]; }
  std::size_t nearest_node(const Vector& x) const;
  /// Exact source value when available, else the stored value at a node, else
  /// multilinear interpolation.
  double value_at(const Vector& x) const;

  /// Visit every node y with ||y - x|| <= radius; visitor(index, y, distance).
  void for_each_node_within(const Vector& x, double radius,
                            const std::function<void(std::size_t, const Vector&, double)>& visitor) const;

 private:
  std::size_t flat(int i0, int i1) const;
  double interpolate(const Vector& x) const;

  Box box_;
  double spacing_;
  std::vector<int> counts_;
  std::vector<double> values_;
  Fn source_;
  GradFn gradient_;
};

/// Finite explicit point set S, e.g. a known stationary set.
struct PointSet {
  std::vector<Vector> points;
  double tolerance = 0.0;

  bool empty() const { return points.empty(); }
};

/// Radius schedule {8, 4, 2, 1} * spacing.
std::vector<double> default_radius_schedule(const GridFunction& f);
/// Radius used by slope(): the schedule's last entry in 1-d, its first in 2-d.
double default_slope_radius(const GridFunction& f);

/// max over grid nodes y != x with ||x - y|| <= radius of (f(x) - f(y))+ / ||x - y||.
/// Throws DegenerateGridError when no node other than x falls within radius.
double slope_at(const GridFunction& f, const Vector& x, double radius);
double slope_at(const GridFunction& f, std::size_t node, double radius);
double slope(const GridFunction& f, const Vector& x);
double slope(const GridFunction& f, std::size_t node);

/// min of slope() over nodes y with ||y - x|| <= r and |f(y) - f(x)| <= r
/// (r the smallest schedule radius), the base point x included.
double limiting_slope_at(const GridFunction& f, const Vector& x,
                         const std::vector<double>& radius_schedule);
double limiting_slope_at(const GridFunction& f, const Vector& x);

/// Exact minimum Euclidean distance from x to S; throws on empty S.
double dist_to_set(const Vector& x, const PointSet& set);

/// Three bounds a witness x_hat must satisfy, plus the additive grid slack.
struct WitnessQuery {
  Vector center;          // x+ (step regimes) or x (model-decrease regimes)
  double point_radius = 0.0;
  double value_ceiling = 0.0;
  double slope_ceiling = 0.0;
  double slack = 0.0;
};

struct Witness {
  std::size_t node = 0;
  Vector point;
  double value = 0.0;
  double slope = 0.0;
};

/// Additive slack 5 * eta * spacing + spacing applied to each bound.
double witness_slack(double eta, double spacing);

/// Exhaustive grid search for a node satisfying the three bounds of the query.
/// Candidates passing the distance and value bounds are tried in increasing
/// order of f, so the first hit is the lowest-valued witness.
std::optional<Witness> find_witness(const GridFunction& f, const WitnessQuery& query);

/// Witness search for the exact-step quadratic certificate:
/// d(x+, x_hat) <= d, f(x_hat) <= f(x+) + eta d^2 / 2, slope(x_hat) <= 5 eta d.
std::optional<Witness> find_certificate_witness(const GridFunction& f, const Vector& x,
                                                const Vector& x_plus, double eta);
WitnessQuery exact_step_query(const GridFunction& f, const Vector& x, const Vector& x_plus,
                              double eta);

struct KlOptions {
  /// Nodes with f - f* below this fraction of the regional maximum are left
  /// out of the fit; the one-sided slope proxy is biased there.
  double floor_fraction = 1e-2;
  /// theta is the smallest candidate >= (log-log slope - tolerance).
  double theta_tolerance = 0.02;
};

struct KlEstimate {
  double theta = 0.0;
  double alpha = 0.0;
  /// Worst violation max (f - f*)^theta - alpha * slope over every region node with f > f*.
  double residual = 0.0;
  double loglog_slope = 0.0;
  std::size_t admissible_nodes = 0;
  std::size_t zero_slope_nodes = 0;
};

/// Fit (f(x) - f*)^theta <= alpha * slope(x) on region nodes with f > f*.
KlEstimate estimate_kl_parameters(const GridFunction& f, double f_star, const Box& region,
                                  const std::vector<double>& theta_grid,
                                  const KlOptions& options = {});

/// Nodes of the grid with f <= level + tol, used as the sublevel set [f <= f*].
PointSet sublevel_nodes(const GridFunction& f, double level, double tol);

}  // namespace taylor
