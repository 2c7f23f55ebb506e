#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "taylor/certificates.hpp"
#include "taylor/composite.hpp"
#include "taylor/models.hpp"
#include "taylor/slope_oracle.hpp"

namespace taylor {

using nlohmann::json;

json to_json(const Vector& v);
Vector vector_from_json(const json& j);

json to_json(const StationarityCertificate& c);
StationarityCertificate certificate_from_json(const json& j);

/// {base_point, kind, eta, r}.
json model_descriptor(const TaylorModel& m);

/// {dimension, box, spacing, values_row_major}.
json grid_to_json(const GridFunction& f);
GridFunction grid_from_json(const json& j);

/// {x, x_plus, eta, witness, bounds, slacks}; witness is null when none was found.
json witness_report(const Vector& x, const Vector& x_plus, double eta, const WitnessQuery& q,
                    const std::optional<Witness>& w);

struct TraceOptions {
  /// Leave wall time out of the summary so identical runs give identical bytes.
  bool deterministic = false;
};

/// JSON-lines: a header record, one record per iterate, a summary record.
void write_trace(std::ostream& out, const SolveReport& r, const TraceOptions& opts = {});
std::string trace_to_string(const SolveReport& r, const TraceOptions& opts = {});
/// Throws FormatError on malformed input.
SolveReport read_trace(std::istream& in);
SolveReport trace_from_string(const std::string& text);

/// k, x_0.., f, model_value, step, eps, achieved_eps, delta, slope_bound, ledger_slack.
void write_csv(std::ostream& out, const SolveReport& r);

}  // namespace taylor
