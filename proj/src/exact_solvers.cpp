#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "taylor/composite.hpp"

namespace taylor {

namespace {

using OK = OuterFunction::Kind;
using GK = ProximableTerm::Kind;

bool piecewise_outer(const CompositeProblem& p) {
  switch (p.h.kind()) {
    case OK::Abs:
    case OK::L1Norm:
    case OK::MaxCoord:
    case OK::Identity:
    case OK::Support: return true;
    case OK::Norm2: return p.c.output_dim == 1;
    case OK::SquaredNorm: return false;
  }
  return false;
}

bool piecewise_inner(const CompositeProblem& p) {
  return p.g.kind() != GK::Custom;
}

// Derivative of the piecewise-linear part s -> h(a + b s) + g(x + s) at a point
// strictly inside a piece.
double linear_slope(const CompositeProblem& p, const SupportSet& Z, const Linearization& lin,
                    const Vector& b, double s) {
  const Vector u = lin.cx + b * s;
  double slope = Z.argmax(u).dot(b);
  if (p.g.kind() == GK::L1) {
    const double y = lin.x[0] + s;
    slope += p.g.weight() * (y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0));
  }
  return slope;
}

Vector solve_scalar_piecewise(const CompositeProblem& p, const Linearization& lin) {
  const double x = lin.x[0];
  const Vector a = lin.cx;
  const Vector b = lin.J.col(0);
  const int m = static_cast<int>(a.size());
  const SupportSet Z = *p.h.support_set(p.c.output_dim);

  double s_lo = -std::numeric_limits<double>::infinity();
  double s_hi = std::numeric_limits<double>::infinity();
  if (p.g.kind() == GK::Box) {
    s_lo = p.g.box().lo[0] - x;
    s_hi = p.g.box().hi[0] - x;
  }

  std::vector<double> points;
  auto add = [&](double s) {
    if (std::isfinite(s) && s >= s_lo && s <= s_hi) points.push_back(s);
  };
  const bool pairwise = p.h.kind() == OK::MaxCoord ||
                        (p.h.kind() == OK::Support && Z.kind() == SupportSet::Kind::Simplex);
  const bool ball = Z.kind() == SupportSet::Kind::Ball && m > 1;
  if (ball) throw std::invalid_argument("ball support sets are not piecewise linear");
  if (pairwise) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const double db = b[i] - b[j];
        if (db != 0.0) add(-(a[i] - a[j]) / db);
      }
    }
  } else if (p.h.kind() != OK::Identity) {
    for (int i = 0; i < m; ++i) {
      if (b[i] != 0.0) add(-a[i] / b[i]);
    }
  }
  if (p.g.kind() == GK::L1) add(-x);
  if (std::isfinite(s_lo)) points.push_back(s_lo);
  if (std::isfinite(s_hi)) points.push_back(s_hi);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  std::vector<double> candidates = points;
  auto piece_vertex = [&](double lo, double hi) {
    double mid;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      mid = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      mid = lo + 1.0;
    } else if (std::isfinite(hi)) {
      mid = hi - 1.0;
    } else {
      mid = 0.0;
    }
    const double alpha = linear_slope(p, Z, lin, b, mid);
    candidates.push_back(std::clamp(-alpha / lin.rho, lo, hi));
  };
  if (points.empty()) {
    piece_vertex(s_lo, s_hi);
  } else {
    if (!std::isfinite(s_lo)) piece_vertex(s_lo, points.front());
    for (std::size_t i = 0; i + 1 < points.size(); ++i) piece_vertex(points[i], points[i + 1]);
    if (!std::isfinite(s_hi)) piece_vertex(points.back(), s_hi);
  }

  double best_value = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  Vector y(1);
  for (double s : candidates) {
    y[0] = x + s;
    const double v = model_value(p, lin, y);
    if (v < best_value) {
      best_value = v;
      best_s = s;
    }
  }
  y[0] = x + best_s;
  return y;
}

// min ||a + J s|| + (rho/2)||s||^2 through its dual over the unit ball.
Vector solve_norm2_trust_region(const Linearization& lin) {
  const Vector a = lin.cx;
  if (a.norm() == 0.0) return lin.x;
  const Matrix M = lin.J * lin.J.transpose() / lin.rho;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  const Vector d = eig.eigenvalues();
  const Matrix& V = eig.eigenvectors();
  const Vector at = V.transpose() * a;
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  const double zero_tol = 1e-14 * scale;

  auto z_of = [&](double lambda) {
    Vector w(at.size());
    for (int i = 0; i < at.size(); ++i) {
      const double den = d[i] + lambda;
      w[i] = den > zero_tol ? at[i] / den : 0.0;
    }
    return Vector(V * w);
  };

  bool interior = true;
  for (int i = 0; i < at.size(); ++i) {
    if (d[i] <= zero_tol && std::abs(at[i]) > 1e-14 * a.norm()) interior = false;
  }
  Vector z;
  if (interior) {
    z = z_of(0.0);
    if (z.norm() > 1.0) interior = false;
  }
  if (!interior) {
    double lo = 0.0;
    double hi = a.norm();
    for (int it = 0; it < 200 && hi - lo > 1e-17 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (z_of(mid).norm() > 1.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    z = z_of(hi);
  }
  return lin.x - lin.J.transpose() * z / lin.rho;
}

Vector solve_squared_norm(const Linearization& lin) {
  const int n = static_cast<int>(lin.x.size());
  const Matrix H = 2.0 * lin.J.transpose() * lin.J + lin.rho * Matrix::Identity(n, n);
  const Vector rhs = -2.0 * lin.J.transpose() * lin.cx;
  return lin.x + H.ldlt().solve(rhs);
}

Vector solve_squared_norm_box(const CompositeProblem& p, const Linearization& lin) {
  const int n = static_cast<int>(lin.x.size());
  if (n > 10) throw std::invalid_argument("active-set enumeration limited to n <= 10");
  const Matrix H = 2.0 * lin.J.transpose() * lin.J + lin.rho * Matrix::Identity(n, n);
  const Vector grad0 = 2.0 * lin.J.transpose() * lin.cx;
  const Vector s_lo = p.g.box().lo - lin.x;
  const Vector s_hi = p.g.box().hi - lin.x;

  int patterns = 1;
  for (int i = 0; i < n; ++i) patterns *= 3;
  double best_value = std::numeric_limits<double>::infinity();
  Vector best = lin.x;
  std::vector<int> state(static_cast<std::size_t>(n));
  for (int code = 0; code < patterns; ++code) {
    int rest = code;
    std::vector<int> free_idx;
    Vector s = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = rest % 3;
      rest /= 3;
      if (state[static_cast<std::size_t>(i)] == 0) {
        free_idx.push_back(i);
      } else {
        s[i] = state[static_cast<std::size_t>(i)] == 1 ? s_lo[i] : s_hi[i];
      }
    }
    if (!free_idx.empty()) {
      const int nf = static_cast<int>(free_idx.size());
      Matrix Hff(nf, nf);
      Vector r(nf);
      for (int u = 0; u < nf; ++u) {
        r[u] = -grad0[free_idx[static_cast<std::size_t>(u)]];
        for (int v = 0; v < n; ++v) {
          if (state[static_cast<std::size_t>(v)] != 0) {
            r[u] -= H(free_idx[static_cast<std::size_t>(u)], v) * s[v];
          }
        }
        for (int v = 0; v < nf; ++v) {
          Hff(u, v) = H(free_idx[static_cast<std::size_t>(u)], free_idx[static_cast<std::size_t>(v)]);
        }
      }
      const Vector sf = Hff.ldlt().solve(r);
      bool feasible = true;
      for (int u = 0; u < nf; ++u) {
        const int i = free_idx[static_cast<std::size_t>(u)];
        if (sf[u] < s_lo[i] - 1e-12 || sf[u] > s_hi[i] + 1e-12) feasible = false;
        s[i] = std::clamp(sf[u], s_lo[i], s_hi[i]);
      }
      if (!feasible) continue;
    }
    const Vector y = lin.x + s;
    const double v = model_value(p, lin, y);
    if (v < best_value) {
      best_value = v;
      best = y;
    }
  }
  return best;
}

}  // namespace

bool has_structural_solver(const CompositeProblem& p) {
  if (p.dimension() == 1 && piecewise_outer(p) && piecewise_inner(p)) {
    if (p.h.kind() == OK::Support) {
      const auto kind = p.h.support_set(p.c.output_dim)->kind();
      if (kind == SupportSet::Kind::Ball && p.c.output_dim > 1) return false;
    }
    return true;
  }
  if (p.h.kind() == OK::Identity) return true;
  if (p.h.kind() == OK::Norm2 && p.g.kind() == GK::Zero) return true;
  if (p.h.kind() == OK::SquaredNorm &&
      (p.g.kind() == GK::Zero || (p.g.kind() == GK::Box && p.dimension() <= 10))) {
    return true;
  }
  return false;
}

Vector minimize_model_exact(const CompositeProblem& p, const Linearization& lin) {
  if (p.dimension() == 1 && piecewise_outer(p) && piecewise_inner(p) && has_structural_solver(p)) {
    return solve_scalar_piecewise(p, lin);
  }
  if (p.h.kind() == OK::Identity) {
    const double t = 1.0 / lin.rho;
    return p.g.prox(lin.x - t * lin.J.row(0).transpose(), t);
  }
  if (p.h.kind() == OK::Norm2 && p.g.kind() == GK::Zero) return solve_norm2_trust_region(lin);
  if (p.h.kind() == OK::SquaredNorm) {
    if (p.g.kind() == GK::Zero) return solve_squared_norm(lin);
    if (p.g.kind() == GK::Box) return solve_squared_norm_box(p, lin);
    throw std::invalid_argument("squared-norm models need g = 0 or a box indicator");
  }
  if (!p.h.support_set(p.c.output_dim)) {
    throw std::invalid_argument("no exact solver for h = " + p.h.tag());
  }
  DualOptions opts;
  opts.eps = 1e-13;
  return solve_dual_accelerated(p, lin, opts).y;
}

}  // namespace taylor
