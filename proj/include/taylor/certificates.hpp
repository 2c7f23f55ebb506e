#pragma once

#include <map>
#include <optional>
#include <string>

#include "taylor/models.hpp"
#include "taylor/slope_oracle.hpp"
#include "taylor/types.hpp"

namespace taylor {

enum class Regime {
  ExactStep,
  GeneralGrowth,
  InexactOptimal,
  ModelDecrease,
  GeneralModelDecrease,
  InexactGeneral,
  ProxSubgradient
};

std::string to_string(Regime regime);
/// Throws FormatError on an unknown name.
Regime regime_from_string(const std::string& name);

/// Which point the certificate's point_radius and value_gap are measured from.
enum class Anchor { StepPoint, BasePoint };
Anchor anchor_of(Regime regime);

/// Existence of x_hat with d(anchor, x_hat) <= point_radius,
/// f(x_hat) <= f(anchor) + value_gap and |grad f|(x_hat) <= slope_bound.
struct StationarityCertificate {
  Regime regime = Regime::ExactStep;
  std::map<std::string, double> inputs;
  double point_radius = 0.0;
  double value_gap = 0.0;
  double slope_bound = 0.0;
  std::map<std::string, bool> validity_flags;
};

StationarityCertificate cert_general_growth(const GrowthFunction& w, double d);
StationarityCertificate cert_exact_quadratic(double eta, double d);
StationarityCertificate cert_inexact_optimal(double eta, double eps, double d);
/// General growth with approximate optimality; rho defaults to sqrt(3 eta eps)
/// for quadratic growth and to sqrt(eps) otherwise.
StationarityCertificate cert_inexact_general(const GrowthFunction& w, double eps, double d,
                                             std::optional<double> rho = std::nullopt);
StationarityCertificate cert_model_decrease(double eta, double delta);
/// c defaults to default_tradeoff(w, delta).
StationarityCertificate cert_general_model_decrease(const GrowthFunction& w, double delta,
                                                    std::optional<double> c = std::nullopt);
StationarityCertificate cert_prox_subgradient(double eta1, double eta2, double v_norm, double d);

/// sqrt(3 eta) for quadratic growth; w'(sqrt(delta)) / sqrt(delta) otherwise
/// (1 when delta = 0).
double default_tradeoff(const GrowthFunction& w, double delta);

/// Recompute a certificate from its regime and recorded inputs.
/// Throws FormatError when an input is missing or the regime needs a custom growth.
StationarityCertificate recompute_certificate(Regime regime,
                                              const std::map<std::string, double>& inputs);

/// Witness query for a certificate; anchor is x+ or x according to the regime.
WitnessQuery certificate_query(const GridFunction& f, const StationarityCertificate& cert,
                               const Vector& anchor);

double step_error_bound(double L, double eta, double d);
double model_error_bound(double L, double eta, double delta);
/// mu sqrt(eps) + (7 L eta + 6) d with mu = 2 sqrt(L (5 L eta + 4)).
double inexact_error_bound(double L, double eta, double eps, double d);
double inexact_mu(double L, double eta);
double prox_stationary_error_bound(double L, double eta, double v_norm, double d);

struct ErrorBoundEstimate {
  double L = 0.0;
  double gamma = 0.0;
  Vector x_star;
  double eta = 0.0;
  double l_proxreg = 0.0;
};

/// x, x+ in B_{gamma/3}(x*).
bool step_bound_valid(const ErrorBoundEstimate& e, const Vector& x, const Vector& x_plus);
/// delta < 3 eta gamma^2 / 16 and x in B_{gamma/2}(x*).
bool model_bound_valid(const ErrorBoundEstimate& e, const Vector& x, double delta);
/// sqrt(eps) < gamma mu / (12 L), d < gamma / 9 and x+ in B_{gamma/3}(x*).
bool inexact_bound_valid(const ErrorBoundEstimate& e, const Vector& x, const Vector& x_plus,
                         double eps);

struct SlopeBoundOptions {
  /// Nodes closer than this fraction of gamma to S are skipped.
  double dist_fraction = 0.05;
  /// Slopes at or below this multiple of the spacing count as zero.
  double slope_tolerance_factor = 1.0;
};

/// sup over grid nodes in B_gamma(center) of dist(x, S) / slope(x).
/// Throws HypothesisError naming the node when dist is positive but slope vanishes.
double estimate_slope_error_bound_L(const GridFunction& f, const PointSet& S, const Vector& center,
                                    double gamma, const SlopeBoundOptions& options = {});

struct KlToSlope {
  double constant = 0.0;
  double exponent = 0.0;
};
/// (alpha^{1/theta} / (1 - theta), (1 - theta) / theta); theta outside (0, 1) throws.
KlToSlope kl_to_slope_bound(double theta, double alpha);

struct SlopeToKl {
  double constant = 0.0;
  /// L + l L^2 / 2.
  double scale = 0.0;
  /// min{r, (L + l L^2 / 2) eps^2}.
  double threshold(double r, double eps) const;
};
SlopeToKl slope_bound_to_kl(double L, double l_proxreg);

}  // namespace taylor
