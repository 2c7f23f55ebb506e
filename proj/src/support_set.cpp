#include "taylor/support_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace taylor {

SupportSet SupportSet::interval(double half_width) {
  if (!(half_width >= 0.0)) throw std::invalid_argument("interval half-width must be >= 0");
  SupportSet s(Kind::Interval, 1);
  s.lo_ = Vector::Constant(1, -half_width);
  s.hi_ = Vector::Constant(1, half_width);
  return s;
}

SupportSet SupportSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw std::invalid_argument("support box bounds must be nonempty and equal-sized");
  }
  if ((hi - lo).minCoeff() < 0.0) throw std::invalid_argument("support box has lo > hi");
  SupportSet s(Kind::Box, static_cast<int>(lo.size()));
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

SupportSet SupportSet::ball(int dimension, double radius) {
  if (dimension < 1 || !(radius >= 0.0)) throw std::invalid_argument("bad ball parameters");
  SupportSet s(Kind::Ball, dimension);
  s.radius_ = radius;
  return s;
}

SupportSet SupportSet::simplex(int dimension) {
  if (dimension < 1) throw std::invalid_argument("simplex dimension must be >= 1");
  return SupportSet(Kind::Simplex, dimension);
}

std::string SupportSet::tag() const {
  switch (kind_) {
    case Kind::Interval: return "interval";
    case Kind::Box: return "box";
    case Kind::Ball: return "ball";
    case Kind::Simplex: return "simplex";
  }
  return "unknown";
}

namespace {

// Sort-based Euclidean projection onto {z >= 0, sum z = 1}.
Vector project_simplex(const Vector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace

Vector SupportSet::project(const Vector& z) const {
  if (z.size() != dimension_) throw std::invalid_argument("projection dimension mismatch");
  switch (kind_) {
    case Kind::Interval:
    case Kind::Box:
      return z.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::Ball: {
      const double n = z.norm();
      if (n <= radius_) return z;
      return z * (radius_ / n);
    }
    case Kind::Simplex:
      return project_simplex(z);
  }
  return z;
}

bool SupportSet::contains(const Vector& z, double tol) const {
  if (z.size() != dimension_) return false;
  switch (kind_) {
    case Kind::Interval:
    case Kind::Box:
      return (z - lo_).minCoeff() >= -tol && (hi_ - z).minCoeff() >= -tol;
    case Kind::Ball:
      return z.norm() <= radius_ + tol;
    case Kind::Simplex:
      return z.minCoeff() >= -tol && std::abs(z.sum() - 1.0) <= tol * dimension_;
  }
  return false;
}

double SupportSet::diameter() const {
  switch (kind_) {
    case Kind::Interval:
    case Kind::Box:
      return (hi_ - lo_).norm();
    case Kind::Ball:
      return 2.0 * radius_;
    case Kind::Simplex:
      return dimension_ > 1 ? std::sqrt(2.0) : 0.0;
  }
  return 0.0;
}

double SupportSet::max_norm() const {
  switch (kind_) {
    case Kind::Interval:
    case Kind::Box:
      return lo_.cwiseAbs().cwiseMax(hi_.cwiseAbs()).norm();
    case Kind::Ball:
      return radius_;
    case Kind::Simplex:
      return 1.0;
  }
  return 0.0;
}

Vector SupportSet::argmax(const Vector& y) const {
  if (y.size() != dimension_) throw std::invalid_argument("support dimension mismatch");
  switch (kind_) {
    case Kind::Interval:
    case Kind::Box: {
      Vector z(dimension_);
      for (int i = 0; i < dimension_; ++i) z[i] = y[i] >= 0.0 ? hi_[i] : lo_[i];
      return z;
    }
    case Kind::Ball: {
      const double n = y.norm();
      if (n == 0.0) return Vector::Zero(dimension_);
      return y * (radius_ / n);
    }
    case Kind::Simplex: {
      Eigen::Index best = 0;
      y.maxCoeff(&best);
      Vector z = Vector::Zero(dimension_);
      z[best] = 1.0;
      return z;
    }
  }
  return Vector::Zero(dimension_);
}

double SupportSet::support(const Vector& y) const { return argmax(y).dot(y); }

}  // namespace taylor
