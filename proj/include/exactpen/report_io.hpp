#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "exactpen/corpus.hpp"
#include "exactpen/errors.hpp"
#include "exactpen/expression.hpp"
#include "exactpen/global_analysis.hpp"
#include "exactpen/local_analysis.hpp"
#include "exactpen/perturbation.hpp"
#include "exactpen/problem.hpp"
#include "exactpen/solver.hpp"
#include "exactpen/stationarity.hpp"

namespace exactpen::io {

using nlohmann::json;

/// Finite doubles as numbers, infinities as the strings "inf" / "-inf".
inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

inline json num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

inline json point(const Point& x) {
  json a = json::array();
  for (double v : x) a.push_back(num(v));
  return a;
}

inline json to_json(const Region& r) {
  if (r.kind() == Region::Kind::ball) return {{"kind", "ball"}, {"center", point(r.center())}, {"radius", r.radius()}};
  return {{"kind", "box"}, {"lower", point(r.lower())}, {"upper", point(r.upper())}};
}

inline json to_json(const LambdaBarEstimate& e) {
  json shells = json::array();
  for (double v : e.per_shell_sup) shells.push_back(num(v));
  json witnesses = json::array();
  for (const RatioWitness& w : e.witnesses)
    witnesses.push_back({{"y", point(w.y)}, {"ratio", num(w.ratio)}, {"shell", w.shell}});
  return {{"verdict", to_string(e.verdict)},
          {"kind", to_string(e.kind)},
          {"value", num(e.value)},
          {"per_shell_sup", shells},
          {"samples_used", e.samples_used},
          {"skipped_infinite", e.skipped_infinite},
          {"witnesses", witnesses}};
}

inline json to_json(const Rung& r) {
  return {{"lambda", num(r.lambda)},      {"x", point(r.x)},           {"f", num(r.f_val)},
          {"phi", num(r.phi_val)},        {"penalized", num(r.penalized)},
          {"status", to_string(r.inner_status)}};
}

inline json to_json(const PenaltyPath& p) {
  json rungs = json::array();
  for (const Rung& r : p.rungs) rungs.push_back(to_json(r));
  return {{"region", to_json(p.region)}, {"fstar", num(p.fstar)}, {"rungs", rungs}};
}

inline json to_json(const SupEstimate& s) {
  json trace = json::array();
  for (double v : s.trace) trace.push_back(num(v));
  return {{"lower_bound", num(s.lower_bound)},
          {"trace", trace},
          {"verdict", to_string(s.verdict)},
          {"witness", s.witness ? point(*s.witness) : json(nullptr)},
          {"infeasible_samples", s.infeasible_samples},
          {"fstar", num(s.fstar)}};
}

inline json to_json(const ExactnessReport& r) {
  json witnesses = json::array();
  for (const Point& w : r.witnesses) witnesses.push_back(point(w));
  return {{"verdict", to_string(r.verdict)},
          {"region", r.region},
          {"fstar", num(r.fstar)},
          {"lambda_star_lower", num(r.lambda_star_lower)},
          {"sup_trace", to_json(r.sup)},
          {"expanding_regions", to_json(r.expanding)},
          {"omega_delta",
           {{"delta", num(r.omega_delta.delta)},
            {"lambda_star_on_set", num(r.omega_delta.lambda_star_on_set)},
            {"bounded", r.omega_delta.bounded}}},
          {"lemma_bound", num(r.lemma_bound)},
          {"lemma_c", num(r.lemma_c)},
          {"lemma_mu", num(r.lemma_mu)},
          {"path", to_json(r.path)},
          {"escape", r.escape},
          {"nondegenerate", r.nondegenerate},
          {"strongly_nondegenerate", r.strongly_nondegenerate},
          {"nondegeneracy_note", "heuristic: a single computed selection can only falsify non-degeneracy"},
          {"evidence", r.evidence},
          {"witnesses", witnesses}};
}

inline json to_json(const OptimalValueSamples& s) {
  json rows = json::array();
  for (std::size_t i = 0; i < s.p_grid.size(); ++i)
    rows.push_back({{"p", num(s.p_grid[i])}, {"h", num(s.h_vals[i])}, {"slope", num(s.slope_trace[i])}});
  return {{"h0", num(s.h0)},
          {"samples", rows},
          {"calm_from_below", s.calm_from_below},
          {"modulus_estimate", num(s.modulus_estimate)}};
}

inline json to_json(const SolveResult& s) {
  return {{"status", to_string(s.status)}, {"x", point(s.x)},
          {"f", num(s.f_val)},            {"phi", num(s.phi_val)},
          {"lambda_final", num(s.lambda_final)},
          {"rungs", to_json(s.path)["rungs"]}};
}

inline json to_json(const StationaryReport& r) {
  json clusters = json::array();
  for (const StationaryCluster& c : r.clusters)
    clusters.push_back({{"x", point(c.x)},
                        {"rate", num(c.rate)},
                        {"phi", num(c.phi)},
                        {"feasible", c.feasible},
                        {"members", c.members}});
  return {{"lambda", num(r.lambda)}, {"clusters", clusters}};
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

/// Columns: lambda, x1..xn, f, phi, status.
inline void write_path_csv(std::ostream& out, const PenaltyPath& path) {
  const std::size_t n = path.region.dim();
  out << "lambda";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  out << ",f,phi,status\n";
  for (const Rung& r : path.rungs) {
    out << csv_number(r.lambda);
    for (double v : r.x) out << ',' << csv_number(v);
    out << ',' << csv_number(r.f_val) << ',' << csv_number(r.phi_val) << ',' << to_string(r.inner_status) << '\n';
  }
}

/// Columns: p, h, slope.
inline void write_optimal_value_csv(std::ostream& out, const OptimalValueSamples& s) {
  out << "p,h,slope\n";
  for (std::size_t i = 0; i < s.p_grid.size(); ++i)
    out << csv_number(s.p_grid[i]) << ',' << csv_number(s.h_vals[i]) << ',' << csv_number(s.slope_trace[i]) << '\n';
}

// ---- problem definitions ---------------------------------------------------

/// Problem source parsed from a definition file or from CLI flags.
struct ProblemSource {
  std::string builtin;
  corpus::Params params;
  std::optional<json> nlp;
};

inline std::size_t highest_variable(const std::string& text) {
  static const std::regex var(R"(\bx([0-9]+)\b)");
  std::size_t hi = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), var); it != std::sregex_iterator(); ++it)
    hi = std::max<std::size_t>(hi, std::stoul((*it)[1].str()));
  return hi;
}

inline Region region_from_json(const json& j, std::size_t dim) {
  const auto lower = j.at("lower").get<std::vector<double>>();
  const auto upper = j.at("upper").get<std::vector<double>>();
  if (lower.size() != dim || upper.size() != dim) throw DimensionError("region bounds do not match dimension");
  return Region::box(lower, upper);
}

/// {"objective": str, "equalities": [str], "inequalities": [str],
///  "dim": n (optional), "penalty": "l1" | "max", "region": {"lower", "upper"},
///  "fstar": value (optional)}. The default region is [-10, 10]^n.
inline ConstrainedProblem problem_from_nlp_json(const json& j) {
  const auto objective = j.at("objective").get<std::string>();
  const auto eqs = j.value("equalities", std::vector<std::string>{});
  const auto ineqs = j.value("inequalities", std::vector<std::string>{});
  std::size_t dim = highest_variable(objective);
  for (const auto& e : eqs) dim = std::max(dim, highest_variable(e));
  for (const auto& g : ineqs) dim = std::max(dim, highest_variable(g));
  if (j.contains("dim")) {
    const auto d = j.at("dim").get<std::size_t>();
    if (d < dim) throw DimensionError("nlp: dim is smaller than the highest variable index");
    dim = d;
  }
  if (dim == 0) throw DimensionError("nlp: no variables found and no dim given");
  const Region region = j.contains("region") ? region_from_json(j.at("region"), dim) : Region::cube(dim, -10.0, 10.0);

  NlpModel model(dim, Expression(objective, dim).function(), region);
  for (const auto& e : eqs) model.equalities.push_back(Expression(e, dim).function());
  for (const auto& g : ineqs) model.inequalities.push_back(Expression(g, dim).function());
  model.name = j.value("name", std::string("nlp"));
  const auto penalty = j.value("penalty", std::string("l1"));
  if (penalty != "l1" && penalty != "max") throw ConfigurationError("nlp: penalty must be 'l1' or 'max'");
  ConstrainedProblem p = penalty == "l1" ? build_l1_penalty(model) : build_max_penalty(model);
  if (j.contains("fstar")) p.fstar_hint = j.at("fstar").get<double>();
  return p;
}

inline ProblemSource source_from_json(const json& j) {
  ProblemSource src;
  const bool has_builtin = j.contains("builtin");
  const bool has_nlp = j.contains("nlp");
  if (has_builtin == has_nlp) throw ConfigurationError("problem definition needs exactly one of 'builtin' or 'nlp'");
  if (has_builtin) {
    src.builtin = j.at("builtin").get<std::string>();
    if (j.contains("params"))
      for (const auto& [k, v] : j.at("params").items()) src.params[k] = v.get<double>();
  } else {
    src.nlp = j.at("nlp");
  }
  return src;
}

inline ProblemSource read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open problem file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigurationError("problem file '" + path + "': " + e.what());
  }
  return source_from_json(j);
}

inline ConstrainedProblem build_problem(const ProblemSource& src) {
  if (src.nlp) {
    try {
      return problem_from_nlp_json(*src.nlp);
    } catch (const json::exception& e) {
      throw ConfigurationError(std::string("nlp definition: ") + e.what());
    }
  }
  return corpus::load(src.builtin, src.params).problem;
}

}  // namespace exactpen::io
