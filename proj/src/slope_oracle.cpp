#include "taylor/slope_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace taylor {

namespace {

constexpr double kIndexEps = 1e-9;

}  // namespace

GridFunction::GridFunction(Box box, double spacing, std::vector<double> values, Fn source,
                           GradFn gradient)
    : box_(std::move(box)),
      spacing_(spacing),
      values_(std::move(values)),
      source_(std::move(source)),
      gradient_(std::move(gradient)) {
  const int dim = box_.dimension();
  if (dim < 1 || dim > 2) throw std::invalid_argument("grid functions are 1-d or 2-d");
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) {
    throw std::invalid_argument("grid spacing must be positive");
  }
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) {
    const double extent = box_.hi[a] - box_.lo[a];
    if (!(extent > 0.0)) throw std::invalid_argument("grid box must have positive volume");
    const int n = static_cast<int>(std::floor(extent / spacing_ + kIndexEps)) + 1;
    counts_.push_back(n);
    total *= static_cast<std::size_t>(n);
  }
  if (values_.size() != total) {
    throw std::invalid_argument("grid values length " + std::to_string(values_.size()) +
                                " does not match node count " + std::to_string(total));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("grid values must be finite");
  }
}

GridFunction GridFunction::sample(const Fn& f, const Box& box, double spacing, GradFn gradient) {
  const int dim = box.dimension();
  if (dim < 1 || dim > 2) throw std::invalid_argument("grid functions are 1-d or 2-d");
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  std::vector<int> counts;
  for (int a = 0; a < dim; ++a) {
    counts.push_back(static_cast<int>(std::floor((box.hi[a] - box.lo[a]) / spacing + kIndexEps)) + 1);
  }
  std::vector<double> values;
  Vector y(dim);
  if (dim == 1) {
    values.reserve(static_cast<std::size_t>(counts[0]));
    for (int i = 0; i < counts[0]; ++i) {
      y[0] = box.lo[0] + i * spacing;
      values.push_back(f(y));
    }
  } else {
    values.reserve(static_cast<std::size_t>(counts[0]) * static_cast<std::size_t>(counts[1]));
    for (int i = 0; i < counts[0]; ++i) {
      for (int j = 0; j < counts[1]; ++j) {
        y[0] = box.lo[0] + i * spacing;
        y[1] = box.lo[1] + j * spacing;
        values.push_back(f(y));
      }
    }
  }
  return GridFunction(box, spacing, std::move(values), f, std::move(gradient));
}

std::size_t GridFunction::flat(int i0, int i1) const {
  if (dimension() == 1) return static_cast<std::size_t>(i0);
  return static_cast<std::size_t>(i0) * static_cast<std::size_t>(counts_[1]) +
         static_cast<std::size_t>(i1);
}

Vector GridFunction::node(std::size_t index) const {
  Vector y(dimension());
  if (dimension() == 1) {
    y[0] = box_.lo[0] + static_cast<double>(index) * spacing_;
  } else {
    const std::size_t n1 = static_cast<std::size_t>(counts_[1]);
    y[0] = box_.lo[0] + static_cast<double>(index / n1) * spacing_;
    y[1] = box_.lo[1] + static_cast<double>(index % n1) * spacing_;
  }
  return y;
}

std::size_t GridFunction::nearest_node(const Vector& x) const {
  int idx[2] = {0, 0};
  for (int a = 0; a < dimension(); ++a) {
    const long i = std::lround((x[a] - box_.lo[a]) / spacing_);
    idx[a] = static_cast<int>(std::clamp<long>(i, 0, counts_[static_cast<std::size_t>(a)] - 1));
  }
  return flat(idx[0], idx[1]);
}

double GridFunction::interpolate(const Vector& x) const {
  const int dim = dimension();
  int base[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const double u = std::clamp((x[a] - box_.lo[a]) / spacing_, 0.0,
                                static_cast<double>(counts_[static_cast<std::size_t>(a)] - 1));
    base[a] = std::min(static_cast<int>(std::floor(u)), counts_[static_cast<std::size_t>(a)] - 2);
    base[a] = std::max(base[a], 0);
    frac[a] = u - base[a];
  }
  if (dim == 1) {
    if (counts_[0] == 1) return values_[0];
    return (1.0 - frac[0]) * values_[flat(base[0], 0)] + frac[0] * values_[flat(base[0] + 1, 0)];
  }
  const int i1 = std::min(base[0] + 1, counts_[0] - 1);
  const int j1 = std::min(base[1] + 1, counts_[1] - 1);
  const double v00 = values_[flat(base[0], base[1])];
  const double v01 = values_[flat(base[0], j1)];
  const double v10 = values_[flat(i1, base[1])];
  const double v11 = values_[flat(i1, j1)];
  return (1 - frac[0]) * ((1 - frac[1]) * v00 + frac[1] * v01) +
         frac[0] * ((1 - frac[1]) * v10 + frac[1] * v11);
}

double GridFunction::value_at(const Vector& x) const {
  if (source_) return source_(x);
  const std::size_t k = nearest_node(x);
  if ((node(k) - x).norm() == 0.0) return values_[k];
  return interpolate(x);
}

void GridFunction::for_each_node_within(
    const Vector& x, double radius,
    const std::function<void(std::size_t, const Vector&, double)>& visitor) const {
  const int dim = dimension();
  int lo_idx[2] = {0, 0};
  int hi_idx[2] = {0, 0};
  for (int a = 0; a < dim; ++a) {
    const double u_lo = (x[a] - radius - box_.lo[a]) / spacing_;
    const double u_hi = (x[a] + radius - box_.lo[a]) / spacing_;
    lo_idx[a] = std::max(0, static_cast<int>(std::ceil(u_lo - kIndexEps)));
    hi_idx[a] = std::min(counts_[static_cast<std::size_t>(a)] - 1,
                         static_cast<int>(std::floor(u_hi + kIndexEps)));
  }
  const double limit = radius * (1.0 + 1e-12);
  Vector y(dim);
  if (dim == 1) {
    for (int i = lo_idx[0]; i <= hi_idx[0]; ++i) {
      y[0] = box_.lo[0] + i * spacing_;
      const double d = std::abs(y[0] - x[0]);
      if (d <= limit) visitor(flat(i, 0), y, d);
    }
    return;
  }
  for (int i = lo_idx[0]; i <= hi_idx[0]; ++i) {
    y[0] = box_.lo[0] + i * spacing_;
    const double dx = y[0] - x[0];
    for (int j = lo_idx[1]; j <= hi_idx[1]; ++j) {
      y[1] = box_.lo[1] + j * spacing_;
      const double dy = y[1] - x[1];
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d <= limit) visitor(flat(i, j), y, d);
    }
  }
}

std::vector<double> default_radius_schedule(const GridFunction& f) {
  const double h = f.spacing();
  return {8.0 * h, 4.0 * h, 2.0 * h, 1.0 * h};
}

double default_slope_radius(const GridFunction& f) {
  const std::vector<double> schedule = default_radius_schedule(f);
  // Radius h in 2-d only reaches the four axis neighbours.
  return f.dimension() == 1 ? schedule.back() : schedule.front();
}

namespace {

double slope_with_value(const GridFunction& f, const Vector& x, double fx, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("slope radius must be positive");
  double best = 0.0;
  bool any = false;
  const std::vector<double>& values = f.values();
  f.for_each_node_within(x, radius, [&](std::size_t k, const Vector&, double d) {
    if (d == 0.0) return;
    any = true;
    const double drop = fx - values[k];
    if (drop > 0.0) best = std::max(best, drop / d);
  });
  if (!any) {
    throw DegenerateGridError("no grid node within radius " + std::to_string(radius) +
                              " of the query point");
  }
  return best;
}

}  // namespace

double slope_at(const GridFunction& f, const Vector& x, double radius) {
  return slope_with_value(f, x, f.value_at(x), radius);
}

double slope_at(const GridFunction& f, std::size_t node, double radius) {
  return slope_with_value(f, f.node(node), f.value(node), radius);
}

double slope(const GridFunction& f, const Vector& x) {
  return slope_at(f, x, default_slope_radius(f));
}

double slope(const GridFunction& f, std::size_t node) {
  return slope_at(f, node, default_slope_radius(f));
}

double limiting_slope_at(const GridFunction& f, const Vector& x,
                         const std::vector<double>& radius_schedule) {
  if (radius_schedule.empty()) throw std::invalid_argument("radius schedule is empty");
  const double r = *std::min_element(radius_schedule.begin(), radius_schedule.end());
  if (!(r > 0.0)) throw std::invalid_argument("radius schedule must be positive");
  const double fx = f.value_at(x);
  double best = slope_with_value(f, x, fx, default_slope_radius(f));
  f.for_each_node_within(x, r, [&](std::size_t k, const Vector&, double) {
    if (std::abs(f.value(k) - fx) > r) return;
    best = std::min(best, slope(f, k));
  });
  return best;
}

double limiting_slope_at(const GridFunction& f, const Vector& x) {
  return limiting_slope_at(f, x, default_radius_schedule(f));
}

double dist_to_set(const Vector& x, const PointSet& set) {
  if (set.empty()) throw std::invalid_argument("distance to an empty set");
  double best = std::numeric_limits<double>::infinity();
  for (const Vector& p : set.points) best = std::min(best, (x - p).norm());
  return best;
}

double witness_slack(double eta, double spacing) { return 5.0 * eta * spacing + spacing; }

std::optional<Witness> find_witness(const GridFunction& f, const WitnessQuery& query) {
  std::vector<std::pair<double, std::size_t>> candidates;
  const double value_limit = query.value_ceiling + query.slack;
  f.for_each_node_within(query.center, query.point_radius + query.slack,
                         [&](std::size_t k, const Vector&, double) {
                           const double v = f.value(k);
                           if (v <= value_limit) candidates.emplace_back(v, k);
                         });
  std::sort(candidates.begin(), candidates.end());
  const double slope_limit = query.slope_ceiling + query.slack;
  for (const auto& [v, k] : candidates) {
    const double s = slope(f, k);
    if (s <= slope_limit) return Witness{k, f.node(k), v, s};
  }
  return std::nullopt;
}

WitnessQuery exact_step_query(const GridFunction& f, const Vector& x, const Vector& x_plus,
                              double eta) {
  const double d = (x_plus - x).norm();
  WitnessQuery q;
  q.center = x_plus;
  q.point_radius = d;
  q.value_ceiling = f.value_at(x_plus) + 0.5 * eta * d * d;
  q.slope_ceiling = 5.0 * eta * d;
  q.slack = witness_slack(eta, f.spacing());
  return q;
}

std::optional<Witness> find_certificate_witness(const GridFunction& f, const Vector& x,
                                                const Vector& x_plus, double eta) {
  return find_witness(f, exact_step_query(f, x, x_plus, eta));
}

KlEstimate estimate_kl_parameters(const GridFunction& f, double f_star, const Box& region,
                                  const std::vector<double>& theta_grid,
                                  const KlOptions& options) {
  if (theta_grid.empty()) throw std::invalid_argument("theta grid is empty");
  for (double t : theta_grid) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("theta candidates must lie in (0, 1)");
  }
  std::vector<double> thetas = theta_grid;
  std::sort(thetas.begin(), thetas.end());

  struct Sample {
    double gap;
    double slope;
  };
  std::vector<Sample> region_nodes;
  double max_gap = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double gap = f.value(k) - f_star;
    if (!(gap > 0.0)) continue;
    if (!region.contains(f.node(k), 1e-12)) continue;
    region_nodes.push_back({gap, slope(f, k)});
    max_gap = std::max(max_gap, gap);
  }
  if (region_nodes.empty()) throw HypothesisError("region contains no node with f > f*");

  KlEstimate est;
  const double floor = options.floor_fraction * max_gap;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const Sample& s : region_nodes) {
    if (s.gap < floor) continue;
    if (!(s.slope > 0.0)) {
      ++est.zero_slope_nodes;
      continue;
    }
    const double lx = std::log(s.gap);
    const double ly = std::log(s.slope);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  est.admissible_nodes = n;
  if (n == 0) throw HypothesisError("every admissible node has zero slope; no KL inequality");

  const double denom = static_cast<double>(n) * sxx - sx * sx;
  est.loglog_slope = std::abs(denom) > 1e-300 ? (static_cast<double>(n) * sxy - sx * sy) / denom : 0.0;
  est.theta = thetas.back();
  for (double t : thetas) {
    if (t >= est.loglog_slope - options.theta_tolerance) {
      est.theta = t;
      break;
    }
  }

  for (const Sample& s : region_nodes) {
    if (s.gap < floor || !(s.slope > 0.0)) continue;
    est.alpha = std::max(est.alpha, std::pow(s.gap, est.theta) / s.slope);
  }
  for (const Sample& s : region_nodes) {
    est.residual = std::max(est.residual, std::pow(s.gap, est.theta) - est.alpha * s.slope);
  }
  return est;
}

PointSet sublevel_nodes(const GridFunction& f, double level, double tol) {
  PointSet set;
  set.tolerance = tol;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f.value(k) <= level + tol) set.points.push_back(f.node(k));
  }
  return set;
}

}  // namespace taylor
