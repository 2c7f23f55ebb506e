#include "taylor/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace taylor {

GrowthFunction GrowthFunction::power(double eta, double r) {
  if (!(eta >= 0.0)) throw std::invalid_argument("growth coefficient must be >= 0");
  if (!(r > 1.0)) throw std::invalid_argument("growth exponent must be > 1");
  GrowthFunction w;
  w.eta_ = eta;
  w.exponent_ = r;
  return w;
}

GrowthFunction GrowthFunction::custom(Fn value, Fn derivative, std::string label) {
  if (!value || !derivative) throw std::invalid_argument("custom growth needs value and derivative");
  if (value(0.0) != 0.0 || derivative(0.0) != 0.0) {
    throw std::invalid_argument("growth function must satisfy w(0) = w'(0) = 0");
  }
  for (double t = 1e-6; t <= 1e3; t *= 2.0) {
    if (!(derivative(t) > 0.0)) {
      throw std::invalid_argument("growth derivative must be positive on (0, inf)");
    }
  }
  GrowthFunction w;
  w.custom_value_ = std::move(value);
  w.custom_derivative_ = std::move(derivative);
  w.label_ = std::move(label);

  // Properness on the ladder t = 2^-k: both limits must shrink towards zero.
  const double d_small = w.custom_derivative_(std::ldexp(1.0, -40));
  const double d_large = w.custom_derivative_(std::ldexp(1.0, -10));
  const double r_small = w.proximity_ratio(std::ldexp(1.0, -40));
  const double r_large = w.proximity_ratio(std::ldexp(1.0, -10));
  w.proper_ = d_small < 1e-6 && d_small <= d_large && r_small < 1e-6 && r_small <= r_large;
  return w;
}

double GrowthFunction::value(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("growth function argument must be >= 0");
  if (custom_value_) return custom_value_(t);
  return eta_ / exponent_ * std::pow(t, exponent_);
}

double GrowthFunction::derivative(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("growth function argument must be >= 0");
  if (custom_derivative_) return custom_derivative_(t);
  if (t == 0.0) return 0.0;
  return eta_ * std::pow(t, exponent_ - 1.0);
}

double GrowthFunction::proximity_ratio(double t) const {
  const double d = derivative(t);
  if (d == 0.0) return 0.0;
  if (is_power()) return t / exponent_;
  return value(t) / d;
}

std::string to_string(MinimizeHint hint) {
  switch (hint) {
    case MinimizeHint::ClosedForm: return "closed-form";
    case MinimizeHint::Piecewise1d: return "piecewise-1d";
    case MinimizeHint::DualSolver: return "dual-solver";
    case MinimizeHint::Generic: return "generic";
  }
  return "generic";
}

std::optional<Vector> QuadraticModel::minimizer() const {
  Eigen::LLT<Matrix> llt(curvature);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return Vector(model.base_point - llt.solve(gradient));
}

QuadraticModel build_quadratic_model(const std::function<double(const Vector&)>& f,
                                     const std::function<Vector(const Vector&)>& gradient,
                                     const Vector& x, const Matrix& curvature, double eta) {
  if (curvature.rows() != x.size() || curvature.cols() != x.size()) {
    throw std::invalid_argument("curvature operator has the wrong shape");
  }
  const Matrix sym = 0.5 * (curvature + curvature.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (min_eig < -1e-12 * scale) {
    throw std::invalid_argument("curvature operator has a negative eigenvalue");
  }

  QuadraticModel q;
  q.gradient = gradient(x);
  q.curvature = sym;
  const double fx = f(x);
  const Vector base = x;
  const Vector grad = q.gradient;
  q.model.base_point = x;
  q.model.evaluate = [fx, base, grad, sym](const Vector& y) {
    const Vector s = y - base;
    return fx + grad.dot(s) + 0.5 * s.dot(sym * s);
  };
  q.model.error_bound = GrowthFunction::quadratic(eta);
  q.model.hint = min_eig > 1e-12 * scale ? MinimizeHint::ClosedForm : MinimizeHint::Generic;
  q.model.kind = "quadratic";
  return q;
}

ModelErrorReport verify_model_error(const std::function<double(const Vector&)>& f,
                                    const TaylorModel& model, const std::vector<Vector>& samples) {
  ModelErrorReport report;
  report.worst_point = model.base_point;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (const Vector& y : samples) {
    const double dist = (y - model.base_point).norm();
    const double fy = f(y);
    const double err = std::abs(model(y) - fy);
    // Rounding in model and function evaluation is not a violation.
    const double excess = err - model.error_bound.value(dist) - 1e-12 * (1.0 + std::abs(fy));
    if (excess > worst_excess) {
      worst_excess = excess;
      report.worst_point = y;
    }
    if (dist > 0.0) report.max_quadratic_ratio = std::max(report.max_quadratic_ratio, err / (dist * dist));
  }
  report.max_violation = std::max(worst_excess, 0.0);
  return report;
}

std::vector<Vector> uniform_samples(const Box& box, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int s = 0; s < count; ++s) {
    Vector y(box.dimension());
    for (int i = 0; i < box.dimension(); ++i) y[i] = box.lo[i] + unit(rng) * (box.hi[i] - box.lo[i]);
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace taylor
