#include "taylor/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace taylor {

namespace {

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
  }
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite and positive");
  }
}

double input(const std::map<std::string, double>& in, const std::string& key) {
  auto it = in.find(key);
  if (it == in.end()) throw FormatError("certificate input '" + key + "' missing");
  return it->second;
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::ExactStep: return "exact_step";
    case Regime::GeneralGrowth: return "general_growth";
    case Regime::InexactOptimal: return "inexact_optimal";
    case Regime::ModelDecrease: return "model_decrease";
    case Regime::GeneralModelDecrease: return "general_model_decrease";
    case Regime::InexactGeneral: return "inexact_general";
    case Regime::ProxSubgradient: return "prox_subgradient";
  }
  return "unknown";
}

Regime regime_from_string(const std::string& name) {
  for (Regime r : {Regime::ExactStep, Regime::GeneralGrowth, Regime::InexactOptimal,
                   Regime::ModelDecrease, Regime::GeneralModelDecrease, Regime::InexactGeneral,
                   Regime::ProxSubgradient}) {
    if (to_string(r) == name) return r;
  }
  throw FormatError("unknown certificate regime '" + name + "'");
}

Anchor anchor_of(Regime regime) {
  return regime == Regime::ModelDecrease || regime == Regime::GeneralModelDecrease
             ? Anchor::BasePoint
             : Anchor::StepPoint;
}

StationarityCertificate cert_general_growth(const GrowthFunction& w, double d) {
  require_nonnegative(d, "step");
  StationarityCertificate c;
  c.regime = Regime::GeneralGrowth;
  c.inputs = {{"d", d}, {"eta", w.eta()}, {"r", w.exponent()}};
  c.point_radius = 2.0 * w.proximity_ratio(d);
  c.value_gap = w.value(d);
  c.slope_bound = w.derivative(d) + w.derivative(d + c.point_radius);
  return c;
}

StationarityCertificate cert_exact_quadratic(double eta, double d) {
  require_positive(eta, "eta");
  require_nonnegative(d, "step");
  StationarityCertificate c;
  c.regime = Regime::ExactStep;
  c.inputs = {{"d", d}, {"eta", eta}};
  c.point_radius = d;
  c.value_gap = 0.5 * eta * d * d;
  c.slope_bound = 5.0 * eta * d;
  return c;
}

StationarityCertificate cert_inexact_optimal(double eta, double eps, double d) {
  require_positive(eta, "eta");
  require_nonnegative(eps, "eps");
  require_nonnegative(d, "step");
  StationarityCertificate c;
  c.regime = Regime::InexactOptimal;
  c.inputs = {{"d", d}, {"eps", eps}, {"eta", eta}, {"rho", std::sqrt(3.0 * eta * eps)}};
  const double s = std::sqrt(eps / (3.0 * eta)) + d;
  c.point_radius = std::sqrt(4.0 * eps / (3.0 * eta)) + d;
  c.value_gap = eta * s * s + 0.5 * eta * d * d;
  c.slope_bound = std::sqrt(12.0 * eta * eps) + 3.0 * eta * d;
  return c;
}

StationarityCertificate cert_inexact_general(const GrowthFunction& w, double eps, double d,
                                             std::optional<double> rho) {
  require_nonnegative(eps, "eps");
  require_nonnegative(d, "step");
  double r = rho ? *rho : (w.is_quadratic() ? std::sqrt(3.0 * w.eta() * eps) : std::sqrt(eps));
  StationarityCertificate c;
  c.regime = Regime::InexactGeneral;
  c.inputs = {{"d", d}, {"eps", eps}, {"eta", w.eta()}, {"r", w.exponent()}, {"rho", r}};
  // eps/rho under 0/0 = 0.
  const double shift = eps == 0.0 ? 0.0 : eps / r;
  if (!std::isfinite(shift)) throw std::invalid_argument("rho must be positive when eps > 0");
  const double rz = shift + d;
  const double inner = 2.0 * w.proximity_ratio(rz);
  c.point_radius = shift + inner;
  c.value_gap = 2.0 * w.value(rz) + w.value(d);
  c.slope_bound = (eps == 0.0 ? 0.0 : r) + w.derivative(rz) + w.derivative(rz + inner);
  return c;
}

StationarityCertificate cert_model_decrease(double eta, double delta) {
  require_positive(eta, "eta");
  require_nonnegative(delta, "model decrease");
  StationarityCertificate c;
  c.regime = Regime::ModelDecrease;
  c.inputs = {{"delta", delta}, {"eta", eta}};
  c.point_radius = std::sqrt(4.0 * delta / (3.0 * eta));
  c.value_gap = delta / 3.0;
  c.slope_bound = std::sqrt(12.0 * eta * delta);
  return c;
}

double default_tradeoff(const GrowthFunction& w, double delta) {
  require_nonnegative(delta, "model decrease");
  if (w.is_quadratic()) return std::sqrt(3.0 * w.eta());
  if (delta == 0.0) return 1.0;
  const double s = std::sqrt(delta);
  return w.derivative(s) / s;
}

StationarityCertificate cert_general_model_decrease(const GrowthFunction& w, double delta,
                                                    std::optional<double> c_opt) {
  require_nonnegative(delta, "model decrease");
  const double c = c_opt ? *c_opt : default_tradeoff(w, delta);
  require_positive(c, "trade-off constant");
  StationarityCertificate out;
  out.regime = Regime::GeneralModelDecrease;
  out.inputs = {{"c", c}, {"delta", delta}, {"eta", w.eta()}, {"r", w.exponent()}};
  const double root = std::sqrt(delta);
  const double rz = root / c;
  out.point_radius = rz + 2.0 * w.proximity_ratio(rz);
  out.value_gap = 2.0 * w.value(rz);
  out.slope_bound = c * root + w.derivative(rz) + w.derivative(out.point_radius);
  return out;
}

StationarityCertificate cert_prox_subgradient(double eta1, double eta2, double v_norm, double d) {
  require_nonnegative(eta1, "eta1");
  require_nonnegative(eta2, "eta2");
  require_nonnegative(v_norm, "subgradient norm");
  require_nonnegative(d, "step");
  StationarityCertificate c;
  c.regime = Regime::ProxSubgradient;
  c.inputs = {{"d", d}, {"eta1", eta1}, {"eta2", eta2}, {"v_norm", v_norm}};
  c.point_radius = d;
  c.value_gap = v_norm * d + 0.5 * eta1 * d * d;
  c.slope_bound = v_norm + eta1 * d + 2.0 * eta1 * d + eta2 * d;
  return c;
}

StationarityCertificate recompute_certificate(Regime regime,
                                              const std::map<std::string, double>& in) {
  auto growth = [&] {
    const double r = in.count("r") ? input(in, "r") : 2.0;
    return GrowthFunction::power(input(in, "eta"), r);
  };
  switch (regime) {
    case Regime::ExactStep: return cert_exact_quadratic(input(in, "eta"), input(in, "d"));
    case Regime::GeneralGrowth: return cert_general_growth(growth(), input(in, "d"));
    case Regime::InexactOptimal:
      return cert_inexact_optimal(input(in, "eta"), input(in, "eps"), input(in, "d"));
    case Regime::ModelDecrease: return cert_model_decrease(input(in, "eta"), input(in, "delta"));
    case Regime::GeneralModelDecrease:
      return cert_general_model_decrease(growth(), input(in, "delta"),
                                         in.count("c") ? std::optional<double>(input(in, "c"))
                                                       : std::nullopt);
    case Regime::InexactGeneral:
      return cert_inexact_general(growth(), input(in, "eps"), input(in, "d"),
                                  in.count("rho") ? std::optional<double>(input(in, "rho"))
                                                  : std::nullopt);
    case Regime::ProxSubgradient:
      return cert_prox_subgradient(input(in, "eta1"), input(in, "eta2"), input(in, "v_norm"),
                                   input(in, "d"));
  }
  throw FormatError("unknown regime");
}

WitnessQuery certificate_query(const GridFunction& f, const StationarityCertificate& cert,
                               const Vector& anchor) {
  double eta = 0.0;
  if (auto it = cert.inputs.find("eta"); it != cert.inputs.end()) eta = it->second;
  if (auto it = cert.inputs.find("eta1"); it != cert.inputs.end()) eta = std::max(eta, it->second);
  WitnessQuery q;
  q.center = anchor;
  q.point_radius = cert.point_radius;
  q.value_ceiling = f.value_at(anchor) + cert.value_gap;
  q.slope_ceiling = cert.slope_bound;
  q.slack = witness_slack(eta, f.spacing());
  return q;
}

double step_error_bound(double L, double eta, double d) { return (3.0 * L * eta + 2.0) * d; }

double model_error_bound(double L, double eta, double delta) {
  require_positive(eta, "eta");
  return (L * std::sqrt(12.0 * eta) + 2.0 / std::sqrt(3.0 * eta)) * std::sqrt(delta);
}

double inexact_mu(double L, double eta) { return 2.0 * std::sqrt(L * (5.0 * L * eta + 4.0)); }

double inexact_error_bound(double L, double eta, double eps, double d) {
  return inexact_mu(L, eta) * std::sqrt(eps) + (7.0 * L * eta + 6.0) * d;
}

double prox_stationary_error_bound(double L, double eta, double v_norm, double d) {
  return L * v_norm + (4.0 * eta * L + 2.0) * d;
}

bool step_bound_valid(const ErrorBoundEstimate& e, const Vector& x, const Vector& x_plus) {
  const double r = e.gamma / 3.0;
  return (x - e.x_star).norm() < r && (x_plus - e.x_star).norm() < r;
}

bool model_bound_valid(const ErrorBoundEstimate& e, const Vector& x, double delta) {
  return delta < 3.0 * e.eta * e.gamma * e.gamma / 16.0 && (x - e.x_star).norm() < e.gamma / 2.0;
}

bool inexact_bound_valid(const ErrorBoundEstimate& e, const Vector& x, const Vector& x_plus,
                         double eps) {
  const double mu = inexact_mu(e.L, e.eta);
  return std::sqrt(eps) < e.gamma * mu / (12.0 * e.L) && (x_plus - x).norm() < e.gamma / 9.0 &&
         (x_plus - e.x_star).norm() < e.gamma / 3.0;
}

double estimate_slope_error_bound_L(const GridFunction& f, const PointSet& S, const Vector& center,
                                    double gamma, const SlopeBoundOptions& options) {
  require_positive(gamma, "gamma");
  if (S.empty()) throw std::invalid_argument("reference set S is empty");
  const double dist_tol = std::max(options.dist_fraction * gamma, S.tolerance);
  const double slope_tol = options.slope_tolerance_factor * f.spacing();
  double L = 0.0;
  bool any = false;
  f.for_each_node_within(center, gamma, [&](std::size_t k, const Vector& y, double) {
    const double dist = dist_to_set(y, S);
    if (dist < dist_tol) return;
    const double s = slope(f, k);
    if (s <= slope_tol) {
      std::string where = "(";
      for (int a = 0; a < y.size(); ++a) where += (a ? ", " : "") + std::to_string(y[a]);
      throw HypothesisError("slope error-bound fails at node " + where + "): dist " +
                            std::to_string(dist) + " with slope " + std::to_string(s));
    }
    L = std::max(L, dist / s);
    any = true;
  });
  if (!any) throw HypothesisError("no node of the ball lies away from S");
  return L;
}

KlToSlope kl_to_slope_bound(double theta, double alpha) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
  require_positive(alpha, "alpha");
  return {std::pow(alpha, 1.0 / theta) / (1.0 - theta), (1.0 - theta) / theta};
}

double SlopeToKl::threshold(double r, double eps) const { return std::min(r, scale * eps * eps); }

SlopeToKl slope_bound_to_kl(double L, double l_proxreg) {
  require_positive(L, "L");
  require_nonnegative(l_proxreg, "prox-regularity constant");
  SlopeToKl out;
  out.scale = L + l_proxreg * L * L / 2.0;
  out.constant = std::sqrt(out.scale);
  return out;
}

}  // namespace taylor
