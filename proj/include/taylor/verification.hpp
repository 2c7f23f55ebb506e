#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "taylor/certificates.hpp"
#include "taylor/composite.hpp"
#include "taylor/problems.hpp"
#include "taylor/slope_oracle.hpp"

namespace taylor {

/// Tally for one theorem or invariant: {theorem, instances, passes, failures: [...]}.
struct TheoremCheck {
  std::string theorem;
  int instances = 0;
  int passes = 0;
  std::vector<nlohmann::json> failures;
  /// Failures beyond this many are counted but not listed.
  std::size_t max_listed = 50;

  void record(bool pass, const nlohmann::json& detail);
  bool ok() const { return passes == instances; }
  int failure_count() const { return instances - passes; }
  nlohmann::json to_json() const;
};

struct WitnessOutcome {
  /// False when the anchor lies outside the grid box; the check is then skipped.
  bool in_grid = false;
  WitnessQuery query;
  std::optional<Witness> witness;
};

/// Grid witness search for the three bounds of a certificate; the anchor is
/// x_plus for step regimes and x for model-decrease regimes.
WitnessOutcome check_certificate_witness(const GridFunction& f, const StationarityCertificate& c,
                                         const Vector& x, const Vector& x_plus);

/// max(0, -min over unit v of f'(x; v)) from exact one-sided directional
/// derivatives of the composite; equals dist(0, df(x)) when f is convex.
/// 2-d problems scan 3600 directions.
double convex_subgradient_distance(const CompositeProblem& p, const Vector& x);

struct VerifyOptions {
  std::string selector = "all";
  std::uint64_t seed = 0;
  int max_iter = 500;
  int inexact_max_iter = 3000;
  ToleranceSchedule schedule{1.0, 0.5};
  /// Run at most this many sweep starts per problem (0 = all).
  int max_starts = 0;
};

struct VerificationReport {
  std::vector<TheoremCheck> checks;
  std::vector<std::string> problems;
  double wall_time_s = 0.0;

  bool ok() const;
  const TheoremCheck* find(const std::string& theorem) const;
  nlohmann::json to_json() const;
};

/// Runs the invariant suite on the selected corpus. Throws std::invalid_argument
/// when the selector matches no problem.
VerificationReport verify_theorems(const VerifyOptions& options);

struct CertifyRecord {
  int k = 0;
  StationarityCertificate certificate;
  StationarityCertificate decrease_certificate;
  bool recorded_matches = true;
  std::optional<WitnessOutcome> step_witness;
  std::optional<WitnessOutcome> decrease_witness;
  bool pass = true;
};

struct CertifyReport {
  std::string problem;
  bool grid_checked = false;
  std::vector<CertifyRecord> records;
  int passes = 0;
  int failures = 0;

  bool ok() const { return failures == 0; }
  nlohmann::json to_json() const;
};

/// Recompute each certificate from the recorded observables (eta from the
/// trace header) and, when the problem has a grid, search for witnesses.
CertifyReport certify_trace(const SolveReport& trace, const ProblemSpec* spec);

}  // namespace taylor
