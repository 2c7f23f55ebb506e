#include "taylor/trace.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace taylor {

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("trace field '") + key + "' missing");
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw FormatError(std::string("trace field '") + key + "' must be numeric");
  return v.get<double>();
}

json iterate_to_json(const IterateRecord& r) {
  json j;
  j["record"] = "iterate";
  j["k"] = r.k;
  j["x"] = to_json(r.x);
  j["f"] = r.f;
  j["model_value"] = r.model_value;
  j["step"] = r.step;
  j["eps"] = r.eps;
  j["certificate"] = to_json(r.certificate);
  j["ledger_slack"] = r.ledger_slack;
  j["x_next"] = to_json(r.x_next);
  j["achieved_eps"] = r.achieved_eps;
  j["delta"] = r.delta;
  j["reference_step"] = r.reference_step;
  j["decrease_certificate"] = to_json(r.decrease_certificate);
  j["sum_sq"] = r.sum_sq;
  j["min_ledger_slack"] = r.min_ledger_slack;
  j["model_verified"] = r.model_verified;
  j["model_violation"] = r.model_violation;
  j["subsolver_iterations"] = r.subsolver_iterations;
  j["rate_excess"] = r.rate_excess;
  return j;
}

IterateRecord iterate_from_json(const json& j) {
  IterateRecord r;
  if (!j.contains("k") || !j.at("k").is_number_integer()) throw FormatError("iterate without integer k");
  r.k = j.at("k").get<int>();
  if (!j.contains("x")) throw FormatError("iterate without x");
  r.x = vector_from_json(j.at("x"));
  r.f = read_number(j, "f");
  r.model_value = read_number(j, "model_value");
  r.step = read_number(j, "step");
  r.eps = read_number(j, "eps");
  if (!j.contains("certificate")) throw FormatError("iterate without certificate");
  r.certificate = certificate_from_json(j.at("certificate"));
  r.ledger_slack = read_number(j, "ledger_slack");
  // Optional extras; a bare {k, x, f, model_value, step, eps, certificate, ledger_slack} record is valid.
  r.x_next = j.contains("x_next") ? vector_from_json(j.at("x_next")) : Vector();
  r.achieved_eps = j.contains("achieved_eps") ? read_number(j, "achieved_eps") : 0.0;
  r.delta = j.contains("delta") ? read_number(j, "delta") : std::max(0.0, r.f - r.model_value);
  r.reference_step = j.contains("reference_step") ? read_number(j, "reference_step") : r.step;
  if (j.contains("decrease_certificate")) {
    r.decrease_certificate = certificate_from_json(j.at("decrease_certificate"));
  }
  r.sum_sq = j.contains("sum_sq") ? read_number(j, "sum_sq") : 0.0;
  r.min_ledger_slack = j.contains("min_ledger_slack") ? read_number(j, "min_ledger_slack") : 0.0;
  r.model_verified = j.value("model_verified", true);
  r.model_violation = j.contains("model_violation") ? read_number(j, "model_violation") : 0.0;
  r.subsolver_iterations = j.value("subsolver_iterations", 0);
  r.rate_excess = j.contains("rate_excess") ? read_number(j, "rate_excess") : 0.0;
  return r;
}

}  // namespace

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const json& j) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) throw FormatError("expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError("expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json to_json(const StationarityCertificate& c) {
  json j;
  j["regime"] = to_string(c.regime);
  j["inputs"] = json::object();
  for (const auto& [k, v] : c.inputs) j["inputs"][k] = number_or_null(v);
  j["point_radius"] = number_or_null(c.point_radius);
  j["value_gap"] = number_or_null(c.value_gap);
  j["slope_bound"] = number_or_null(c.slope_bound);
  j["validity_flags"] = json::object();
  for (const auto& [k, v] : c.validity_flags) j["validity_flags"][k] = v;
  return j;
}

StationarityCertificate certificate_from_json(const json& j) {
  if (!j.is_object() || !j.contains("regime") || !j.at("regime").is_string()) {
    throw FormatError("certificate needs a string regime");
  }
  StationarityCertificate c;
  c.regime = regime_from_string(j.at("regime").get<std::string>());
  if (j.contains("inputs")) {
    if (!j.at("inputs").is_object()) throw FormatError("certificate inputs must be an object");
    for (const auto& [k, v] : j.at("inputs").items()) {
      if (!v.is_number()) throw FormatError("certificate input '" + k + "' must be numeric");
      c.inputs[k] = v.get<double>();
    }
  }
  c.point_radius = read_number(j, "point_radius");
  c.value_gap = read_number(j, "value_gap");
  c.slope_bound = read_number(j, "slope_bound");
  if (j.contains("validity_flags")) {
    for (const auto& [k, v] : j.at("validity_flags").items()) {
      if (!v.is_boolean()) throw FormatError("validity flag '" + k + "' must be boolean");
      c.validity_flags[k] = v.get<bool>();
    }
  }
  return c;
}

json model_descriptor(const TaylorModel& m) {
  return json{{"base_point", to_json(m.base_point)},
              {"kind", m.kind},
              {"eta", m.error_bound.eta()},
              {"r", m.error_bound.exponent()},
              {"hint", to_string(m.hint)}};
}

json grid_to_json(const GridFunction& f) {
  json box = json::array();
  for (int a = 0; a < f.dimension(); ++a) box.push_back(json::array({f.box().lo[a], f.box().hi[a]}));
  return json{{"dimension", f.dimension()},
              {"box", box},
              {"spacing", f.spacing()},
              {"values_row_major", f.values()}};
}

GridFunction grid_from_json(const json& j) {
  try {
    const int dim = j.at("dimension").get<int>();
    const json& box = j.at("box");
    if (!box.is_array() || static_cast<int>(box.size()) != dim) {
      throw FormatError("grid box must list one [lo, hi] pair per axis");
    }
    Vector lo(dim), hi(dim);
    for (int a = 0; a < dim; ++a) {
      lo[a] = box[static_cast<std::size_t>(a)].at(0).get<double>();
      hi[a] = box[static_cast<std::size_t>(a)].at(1).get<double>();
    }
    return GridFunction(Box(lo, hi), j.at("spacing").get<double>(),
                        j.at("values_row_major").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed grid document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid grid document: ") + e.what());
  }
}

json witness_report(const Vector& x, const Vector& x_plus, double eta, const WitnessQuery& q,
                    const std::optional<Witness>& w) {
  json j;
  j["x"] = to_json(x);
  j["x_plus"] = to_json(x_plus);
  j["eta"] = eta;
  if (w) {
    j["witness"] = json{{"point", to_json(w->point)}, {"value", w->value}, {"slope", w->slope}};
  } else {
    j["witness"] = nullptr;
  }
  j["bounds"] = json{{"center", to_json(q.center)},
                     {"point_radius", q.point_radius},
                     {"value_ceiling", q.value_ceiling},
                     {"slope_ceiling", q.slope_ceiling}};
  json slacks = {{"grid", q.slack}};
  if (w) {
    slacks["point"] = q.point_radius + q.slack - (w->point - q.center).norm();
    slacks["value"] = q.value_ceiling + q.slack - w->value;
    slacks["slope"] = q.slope_ceiling + q.slack - w->slope;
  }
  j["slacks"] = slacks;
  return j;
}

void write_trace(std::ostream& out, const SolveReport& r, const TraceOptions& opts) {
  json header;
  header["record"] = "header";
  header["problem"] = r.problem;
  header["x0"] = to_json(r.x0);
  header["eta"] = r.eta;
  header["curvature"] = r.curvature;
  header["mode"] = r.schedule ? "inexact" : "exact";
  if (r.schedule) {
    header["schedule"] = json{{"eps0", r.schedule->eps0}, {"q", r.schedule->q}};
  }
  header["stop"] = json{{"step_tol", r.stop.step_tol},
                        {"decrease_tol", r.stop.decrease_tol},
                        {"max_iter", r.stop.max_iter},
                        {"value_floor", r.stop.value_floor}};
  header["seed"] = r.seed;
  out << header.dump() << '\n';
  for (const IterateRecord& rec : r.iterates) out << iterate_to_json(rec).dump() << '\n';
  json summary;
  summary["record"] = "summary";
  summary["stop_reason"] = r.stop_reason;
  summary["iterations"] = r.iterates.size();
  summary["x_final"] = to_json(r.x_final);
  summary["f_final"] = r.f_final;
  summary["f_star_estimate"] = r.f_star_estimate;
  summary["ledger"] = json{{"sum_sq", r.sum_sq}, {"min_slack", r.min_ledger_slack}};
  if (!r.iterates.empty()) {
    summary["final_certificate"] = to_json(r.iterates.back().certificate);
    summary["final_decrease_certificate"] = to_json(r.iterates.back().decrease_certificate);
  }
  if (!opts.deterministic) summary["wall_time_s"] = r.wall_time_s;
  out << summary.dump() << '\n';
}

std::string trace_to_string(const SolveReport& r, const TraceOptions& opts) {
  std::ostringstream os;
  write_trace(os, r, opts);
  return os.str();
}

SolveReport read_trace(std::istream& in) {
  SolveReport r;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  bool saw_summary = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("trace line " + std::to_string(line_no) + " is not JSON: " + e.what());
    }
    if (!j.is_object()) throw FormatError("trace line " + std::to_string(line_no) + " is not an object");
    const std::string kind = j.value("record", j.contains("k") ? "iterate" : "");
    try {
      if (kind == "header") {
        saw_header = true;
        r.problem = j.at("problem").get<std::string>();
        r.x0 = vector_from_json(j.at("x0"));
        r.eta = j.at("eta").get<double>();
        r.curvature = j.value("curvature", 0.0);
        if (j.contains("schedule")) {
          r.schedule = ToleranceSchedule{j.at("schedule").at("eps0").get<double>(),
                                         j.at("schedule").at("q").get<double>()};
        }
        if (j.contains("stop")) {
          const json& s = j.at("stop");
          r.stop.step_tol = s.value("step_tol", r.stop.step_tol);
          r.stop.decrease_tol = s.value("decrease_tol", r.stop.decrease_tol);
          r.stop.max_iter = s.value("max_iter", r.stop.max_iter);
          r.stop.value_floor = s.value("value_floor", r.stop.value_floor);
        }
        r.seed = j.value("seed", std::uint64_t{0});
      } else if (kind == "iterate") {
        r.iterates.push_back(iterate_from_json(j));
      } else if (kind == "summary") {
        saw_summary = true;
        r.stop_reason = j.value("stop_reason", "");
        r.x_final = vector_from_json(j.at("x_final"));
        r.f_final = j.at("f_final").get<double>();
        r.f_star_estimate = j.value("f_star_estimate", r.f_final);
        if (j.contains("ledger")) {
          r.sum_sq = j.at("ledger").value("sum_sq", 0.0);
          r.min_ledger_slack = j.at("ledger").value("min_slack", 0.0);
        }
        r.wall_time_s = j.value("wall_time_s", 0.0);
      } else {
        throw FormatError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw FormatError("trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!saw_header) throw FormatError("trace has no header record");
  if (!saw_summary) throw FormatError("trace has no summary record");
  return r;
}

SolveReport trace_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_trace(is);
}

void write_csv(std::ostream& out, const SolveReport& r) {
  const int n = static_cast<int>(r.x0.size());
  out << "k";
  for (int i = 0; i < n; ++i) out << ",x_" << i;
  out << ",f,model_value,step,eps,achieved_eps,delta,slope_bound,ledger_slack\n";
  out << std::setprecision(17);
  for (const IterateRecord& rec : r.iterates) {
    out << rec.k;
    for (int i = 0; i < n; ++i) out << ',' << rec.x[i];
    out << ',' << rec.f << ',' << rec.model_value << ',' << rec.step << ',' << rec.eps << ','
        << rec.achieved_eps << ',' << rec.delta << ',' << rec.certificate.slope_bound << ','
        << rec.ledger_slack << '\n';
  }
}

}  // namespace taylor
