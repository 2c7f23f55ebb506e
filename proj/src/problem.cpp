#include "taylor/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace taylor {

Box::Box(Vector lower, Vector upper) : lo(std::move(lower)), hi(std::move(upper)) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in dimension");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("box has lo > hi");
  }
}

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

Vector Box::clamp(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

double ProximableTerm::value(const Vector& y) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Box: return box_.contains(y) ? 0.0 : std::numeric_limits<double>::infinity();
    case Kind::L1: return weight_ * y.lpNorm<1>();
    case Kind::Custom: return custom_value_(y);
  }
  return 0.0;
}

Vector ProximableTerm::prox(const Vector& v, double t) const {
  switch (kind_) {
    case Kind::Zero: return v;
    case Kind::Box: return box_.clamp(v);
    case Kind::L1: {
      const double shrink = weight_ * t;
      return v.unaryExpr([shrink](double a) {
        return std::copysign(std::max(std::abs(a) - shrink, 0.0), a);
      });
    }
    case Kind::Custom: return custom_prox_(v, t);
  }
  return v;
}

ProximableTerm ProximableTerm::zero() { return ProximableTerm(Kind::Zero); }

ProximableTerm ProximableTerm::box_indicator(Box box) {
  ProximableTerm g(Kind::Box);
  g.box_ = std::move(box);
  return g;
}

ProximableTerm ProximableTerm::l1(double weight) {
  if (!(weight >= 0.0)) throw std::invalid_argument("l1 weight must be >= 0");
  ProximableTerm g(Kind::L1);
  g.weight_ = weight;
  return g;
}

ProximableTerm ProximableTerm::custom(ValueFn value, ProxFn prox, std::string label) {
  if (!value || !prox) throw std::invalid_argument("custom term needs value and prox");
  ProximableTerm g(Kind::Custom);
  g.custom_value_ = std::move(value);
  g.custom_prox_ = std::move(prox);
  g.label_ = std::move(label);
  return g;
}

std::string ProximableTerm::tag() const {
  switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::Box: return "box";
    case Kind::L1: return "l1";
    case Kind::Custom: return label_;
  }
  return "unknown";
}

OuterFunction OuterFunction::support(SupportSet set) {
  OuterFunction h(Kind::Support);
  h.set_ = std::move(set);
  return h;
}

std::string OuterFunction::tag() const {
  switch (kind_) {
    case Kind::Abs: return "abs";
    case Kind::Norm2: return "norm2";
    case Kind::L1Norm: return "l1_norm";
    case Kind::MaxCoord: return "max";
    case Kind::Identity: return "identity";
    case Kind::Support: return "support";
    case Kind::SquaredNorm: return "squared_norm";
  }
  return "unknown";
}

double OuterFunction::value(const Vector& u) const {
  switch (kind_) {
    case Kind::Abs: return std::abs(u[0]);
    case Kind::Norm2: return u.norm();
    case Kind::L1Norm: return u.lpNorm<1>();
    case Kind::MaxCoord: return u.maxCoeff();
    case Kind::Identity: return u[0];
    case Kind::Support: return set_->support(u);
    case Kind::SquaredNorm: return u.squaredNorm();
  }
  return 0.0;
}

std::optional<SupportSet> OuterFunction::support_set(int output_dim) const {
  switch (kind_) {
    case Kind::Abs: return SupportSet::interval(1.0);
    case Kind::Norm2: return SupportSet::ball(output_dim, 1.0);
    case Kind::L1Norm:
      return SupportSet::box(Vector::Constant(output_dim, -1.0), Vector::Constant(output_dim, 1.0));
    case Kind::MaxCoord: return SupportSet::simplex(output_dim);
    case Kind::Identity: return SupportSet::box(Vector::Ones(1), Vector::Ones(1));
    case Kind::Support: return set_;
    case Kind::SquaredNorm: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> OuterFunction::natural_lipschitz(int output_dim) const {
  if (kind_ == Kind::SquaredNorm) return std::nullopt;
  return support_set(output_dim)->max_norm();
}

double CompositeProblem::objective(const Vector& x) const {
  const double gx = g.value(x);
  if (!std::isfinite(gx)) return gx;
  return gx + h.value(c.value(x));
}

Linearization linearize(const CompositeProblem& p, const Vector& x) {
  Linearization lin;
  lin.x = x;
  lin.cx = p.c.value(x);
  lin.J = p.c.jacobian(x);
  lin.rho = p.curvature();
  if (lin.cx.size() != p.c.output_dim || lin.J.rows() != p.c.output_dim ||
      lin.J.cols() != p.c.input_dim) {
    throw std::runtime_error("smooth map '" + p.c.name + "' returned inconsistent shapes");
  }
  return lin;
}

double model_value(const CompositeProblem& p, const Linearization& lin, const Vector& y) {
  const double gy = p.g.value(y);
  if (!std::isfinite(gy)) return gy;
  const Vector s = y - lin.x;
  return gy + p.h.value(lin.cx + lin.J * s) + 0.5 * lin.rho * s.squaredNorm();
}

void CompositeProblem::check() const {
  if (c.input_dim < 1 || c.output_dim < 1 || !c.value || !c.jacobian) {
    throw std::invalid_argument("problem '" + name + "': smooth map is incomplete");
  }
  if (!(l > 0.0)) throw std::invalid_argument("problem '" + name + "': l must be > 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("problem '" + name + "': beta must be >= 0");
  if (working_box.dimension() != c.input_dim) {
    throw std::invalid_argument("problem '" + name + "': working box dimension mismatch");
  }
  if ((h.kind() == OuterFunction::Kind::Abs || h.kind() == OuterFunction::Kind::Identity) &&
      c.output_dim != 1) {
    throw std::invalid_argument("problem '" + name + "': scalar outer function needs m = 1");
  }
  if (h.kind() == OuterFunction::Kind::Support && h.support_set(c.output_dim)->dimension() != c.output_dim) {
    throw std::invalid_argument("problem '" + name + "': support set dimension mismatch");
  }
}

ProblemAudit audit_problem(const CompositeProblem& p, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = p.dimension();
  auto draw_x = [&] {
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = p.working_box.lo[i] + unit(rng) * (p.working_box.hi[i] - p.working_box.lo[i]);
    }
    return x;
  };
  ProblemAudit audit;
  const double t = 1.0 / std::max(p.curvature(), 1e-12);
  for (int s = 0; s < samples; ++s) {
    const Vector u = draw_x();
    const Vector v = draw_x();
    const double expansion = (p.g.prox(u, t) - p.g.prox(v, t)).norm() - (u - v).norm();
    audit.worst_prox_expansion = std::max(audit.worst_prox_expansion, expansion);

    // Outer checks run on images of c so the sample sits where h is used.
    const Vector a = p.c.value(u);
    const Vector b = p.c.value(v);
    const double mid = p.h.value(0.5 * (a + b)) - 0.5 * (p.h.value(a) + p.h.value(b));
    audit.worst_convexity_gap = std::max(audit.worst_convexity_gap, mid);
    const double excess = std::abs(p.h.value(a) - p.h.value(b)) - p.l * (a - b).norm();
    audit.worst_lipschitz_excess = std::max(audit.worst_lipschitz_excess, excess);
  }
  return audit;
}

}  // namespace taylor
