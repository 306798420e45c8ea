#pragma once

// Subcommand implementations of the exactpen CLI, kept in a header so tests
// can run them in-process.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exactpen/exactpen.hpp"
#include "exactpen/report_io.hpp"

namespace exactpen::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNotExact = 3, kInconclusive = 4 };

struct RunConfig {
  std::string builtin;
  std::vector<std::string> params;
  std::string nlp_file;
  std::string region;
  std::string point;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::string json_path;
  std::string csv_path;
  int shells = 0;
  int samples_per_shell = 0;
  std::size_t n_samples = 4096;
  std::size_t n_seeds = 64;
  double descent_a = 1.0;
};

inline std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw PreconditionError(std::string("cannot parse ") + what + " component '" + item + "'");
    }
  }
  if (out.empty()) throw PreconditionError(std::string("empty ") + what);
  return out;
}

/// "lo:hi[,lo:hi...]"; a single pair is broadcast to every axis.
inline Region parse_region(const std::string& text, std::size_t dim) {
  Point lo, hi;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw PreconditionError("region component '" + item + "' is not lo:hi");
    const auto a = parse_list(item.substr(0, colon), "region");
    const auto b = parse_list(item.substr(colon + 1), "region");
    lo.push_back(a.at(0));
    hi.push_back(b.at(0));
  }
  if (lo.size() == 1 && dim > 1) {
    lo.assign(dim, lo[0]);
    hi.assign(dim, hi[0]);
  }
  if (lo.size() != dim) throw DimensionError("region has " + std::to_string(lo.size()) + " axes, problem has " + std::to_string(dim));
  for (std::size_t i = 0; i < dim; ++i)
    if (!(lo[i] < hi[i])) throw PreconditionError("region is empty on axis " + std::to_string(i + 1));
  return Region::box(lo, hi);
}

inline io::ProblemSource source_from(const RunConfig& cfg) {
  const bool has_builtin = !cfg.builtin.empty();
  const bool has_nlp = !cfg.nlp_file.empty();
  if (has_builtin == has_nlp) throw PreconditionError("give exactly one of --builtin or --nlp");
  io::ProblemSource src;
  if (has_nlp) {
    src = io::read_problem_file(cfg.nlp_file);
  } else {
    src.builtin = cfg.builtin;
  }
  for (const std::string& kv : cfg.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw PreconditionError("--params expects k=v, got '" + kv + "'");
    src.params[kv.substr(0, eq)] = parse_list(kv.substr(eq + 1), "parameter").at(0);
  }
  return src;
}

inline std::uint64_t resolve_seed(const RunConfig& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("EXACTPEN_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw PreconditionError(std::string("EXACTPEN_SEED is not an integer: ") + env);
    }
  }
  return 0;
}

// ---- output helpers ----------------------------------------------------------

inline std::string fmt6(double v) {
  std::ostringstream s;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  s << std::setprecision(6) << v;
  return s.str();
}

inline std::string fmt_point(const Point& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    if (i == 6 && x.size() > 8) {
      s += "... " + std::to_string(x.size() - 6) + " more";
      break;
    }
    s += fmt6(x[i]);
  }
  return s + ")";
}

inline void row(std::ostream& out, const std::string& key, const std::string& value) {
  out << "  " << std::left << std::setw(28) << key << ' ' << value << '\n';
}

inline void write_json(const RunConfig& cfg, const io::json& doc, std::ostream& out) {
  if (cfg.json_path.empty()) return;
  if (cfg.json_path == "-") {
    out << doc.dump(2) << '\n';
    return;
  }
  std::ofstream f(cfg.json_path);
  if (!f) throw PreconditionError("cannot write '" + cfg.json_path + "'");
  f << doc.dump(2) << '\n';
}

template <typename Writer>
void write_csv(const RunConfig& cfg, Writer&& writer) {
  if (cfg.csv_path.empty()) return;
  std::ofstream f(cfg.csv_path);
  if (!f) throw PreconditionError("cannot write '" + cfg.csv_path + "'");
  writer(f);
}

inline io::json problem_json(const ConstrainedProblem& p, const Region& region, std::uint64_t seed) {
  return {{"name", p.name}, {"dim", p.dim}, {"region", io::to_json(region)}, {"seed", seed}};
}

// ---- subcommands -------------------------------------------------------------

inline int cmd_local(const RunConfig& cfg, std::ostream& out, std::ostream& json_out) {
  const ConstrainedProblem problem = io::build_problem(source_from(cfg));
  if (cfg.point.empty()) throw PreconditionError("local needs --point");
  const Point x = parse_list(cfg.point, "point");
  problem.check_point(x);
  const std::uint64_t seed = resolve_seed(cfg);
  SamplingSchedule sched = SamplingSchedule::local_default();
  if (cfg.shells > 0) sched.shells = cfg.shells;
  sched.samples_per_shell = cfg.samples_per_shell;
  sched.seed = seed;

  const LambdaBarEstimate est = estimate_lambda_bar(problem, x, sched);
  const auto lam = least_local_parameter(est);
  io::json checks = io::json::array();
  out << "local analysis of " << problem.name << " at " << fmt_point(x) << '\n';
  row(out, "lambda_bar verdict", to_string(est.verdict));
  row(out, "lambda_bar", fmt6(est.value));
  row(out, "least local parameter", lam ? fmt6(*lam) : "none (diverging)");
  row(out, "samples used", std::to_string(est.samples_used));
  row(out, "skipped (f = +inf)", std::to_string(est.skipped_infinite));
  if (lam) {
    const double eps = 0.1 * std::max(1.0, *lam);
    for (double l : {std::max(0.0, *lam - eps), *lam + eps}) {
      const LocalMinimumCheck c = check_local_minimum(PenaltyFunction(problem, l), x, sched);
      checks.push_back({{"lambda", io::num(l)}, {"is_local_minimum", c.is_local_minimum}, {"worst_gap", io::num(c.worst_gap)}});
      row(out, "local min at lambda=" + fmt6(l), c.is_local_minimum ? "yes" : "no");
    }
  }
  write_json(cfg,
             {{"command", "local"},
              {"problem", problem_json(problem, problem.region, seed)},
              {"point", io::point(x)},
              {"lambda_bar", io::to_json(est)},
              {"lambda_star", io::num(lam)},
              {"checks", checks}},
             json_out);
  write_csv(cfg, [&](std::ostream& f) {
    f << "shell,radius,sup\n";
    for (std::size_t j = 0; j < est.per_shell_sup.size(); ++j)
      f << j << ',' << io::csv_number(sched.radius(static_cast<int>(j))) << ',' << io::csv_number(est.per_shell_sup[j]) << '\n';
  });
  return kOk;
}

inline int cmd_global(const RunConfig& cfg, std::ostream& out, std::ostream& json_out) {
  const ConstrainedProblem problem = io::build_problem(source_from(cfg));
  const Region region = cfg.region.empty() ? problem.region : parse_region(cfg.region, problem.dim);
  const std::uint64_t seed = resolve_seed(cfg);
  GlobalOptions opts;
  opts.seed = seed;
  opts.n_samples = cfg.n_samples;
  const ExactnessReport rep = assess_global_exactness(problem, region, opts);
  MinimizeOptions inner;
  inner.seed = seed;
  // A deep p grid: square-root type growth of -h only crosses the divergence
  // threshold below p = 2^-40.
  const std::vector<double> p_grid = default_p_grid(47);
  const OptimalValueSamples h =
      optimal_value_function(problem, PerturbedFamily::phi_level(problem), p_grid, region, inner);
  const CalmFromBelow calm = check_calm_from_below(h, RateModulus::identity());

  out << "global analysis of " << problem.name << " on " << rep.region << '\n';
  row(out, "verdict", to_string(rep.verdict));
  row(out, "f*", fmt6(rep.fstar));
  row(out, "lambda*(C) lower bound", fmt6(rep.lambda_star_lower));
  row(out, "sup verdict", to_string(rep.sup.verdict));
  row(out, "growing-region sup", to_string(rep.expanding.verdict));
  row(out, "lemma bound", rep.lemma_bound ? fmt6(*rep.lemma_bound) : "n/a");
  row(out, "escape", rep.escape ? "yes" : "no");
  row(out, "non-degenerate", rep.nondegenerate ? "yes (heuristic)" : "no");
  row(out, "strongly non-degenerate", rep.strongly_nondegenerate ? "yes (heuristic)" : "no");
  row(out, "h calm from below", calm.calm ? "yes, L ~ " + fmt6(calm.L_estimate) : "no");
  for (const std::string& e : rep.evidence) out << "  - " << e << '\n';

  write_json(cfg,
             {{"command", "global"},
              {"problem", problem_json(problem, region, seed)},
              {"report", io::to_json(rep)},
              {"optimal_value", io::to_json(h)},
              {"calm_from_below", {{"calm", calm.calm}, {"L_estimate", io::num(calm.L_estimate)}}}},
             json_out);
  write_csv(cfg, [&](std::ostream& f) { io::write_path_csv(f, rep.path); });
  switch (rep.verdict) {
    case GlobalVerdict::exact:
      return kOk;
    case GlobalVerdict::not_exact:
      return kNotExact;
    case GlobalVerdict::inconclusive:
      return kInconclusive;
  }
  return kInconclusive;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& json_out) {
  const ConstrainedProblem problem = io::build_problem(source_from(cfg));
  SolverConfig sc;
  if (!cfg.region.empty()) sc.region = parse_region(cfg.region, problem.dim);
  sc.lambda0 = cfg.lambda;
  sc.seed = resolve_seed(cfg);
  const SolveResult r = solve(problem, sc);
  const Region region = sc.region.value_or(problem.region);

  out << "solve " << problem.name << " on " << region.describe() << '\n';
  row(out, "status", to_string(r.status));
  row(out, "x", fmt_point(r.x));
  row(out, "f", fmt6(r.f_val));
  row(out, "phi", fmt6(r.phi_val));
  row(out, "final lambda", fmt6(r.lambda_final));
  out << "  " << std::left << std::setw(14) << "lambda" << std::setw(14) << "f" << std::setw(14) << "phi" << "x\n";
  for (const Rung& g : r.path.rungs)
    out << "  " << std::setw(14) << fmt6(g.lambda) << std::setw(14) << fmt6(g.f_val) << std::setw(14) << fmt6(g.phi_val)
        << fmt_point(g.x) << '\n';

  write_json(cfg, {{"command", "solve"}, {"problem", problem_json(problem, region, sc.seed)}, {"result", io::to_json(r)}},
             json_out);
  write_csv(cfg, [&](std::ostream& f) { io::write_path_csv(f, r.path); });
  return r.status == SolveStatus::solved ? kOk : kNotExact;
}

inline int cmd_stationary(const RunConfig& cfg, std::ostream& out, std::ostream& json_out) {
  const ConstrainedProblem problem = io::build_problem(source_from(cfg));
  if (!cfg.lambda) throw PreconditionError("stationary needs --lambda");
  const Region region = cfg.region.empty() ? problem.region : parse_region(cfg.region, problem.dim);
  const std::uint64_t seed = resolve_seed(cfg);
  StationaryOptions so;
  so.seed = seed;
  so.n_seeds = cfg.n_seeds;
  so.schedule.seed = seed;
  const StationaryReport rep = find_inf_stationary(PenaltyFunction(problem, *cfg.lambda), region, so);
  const DescentHypothesisReport hyp = verify_descent_hypothesis(problem, region, cfg.descent_a, 512, seed);
  const double L = estimate_lipschitz(problem, region, cfg.n_samples, seed);
  std::optional<double> bound;
  if (hyp.samples > 0 && hyp.violations == 0) bound = infeasible_stationarity_bound(L, cfg.descent_a);

  out << "inf-stationary points of " << problem.name << " at lambda=" << fmt6(*cfg.lambda) << " on "
      << region.describe() << '\n';
  out << "  " << std::left << std::setw(12) << "feasible" << std::setw(14) << "rate" << std::setw(14) << "phi" << "x\n";
  for (const StationaryCluster& c : rep.clusters)
    out << "  " << std::setw(12) << (c.feasible ? "yes" : "no") << std::setw(14) << fmt6(c.rate) << std::setw(14)
        << fmt6(c.phi) << fmt_point(c.x) << '\n';
  row(out, "infeasible clusters", std::to_string(rep.infeasible_count()));
  row(out, "L estimate (lower)", fmt6(L));
  row(out, "descent hypothesis a", fmt6(cfg.descent_a) + (hyp.violations == 0 ? " holds on samples" : " violated"));
  row(out, "L/a", bound ? fmt6(*bound) : "n/a");

  io::json doc = io::to_json(rep);
  doc["bound_L_over_a"] = io::num(bound);
  doc["lipschitz_estimate"] = io::num(L);
  doc["descent_hypothesis"] = {{"a", io::num(cfg.descent_a)},
                               {"samples", hyp.samples},
                               {"violations", hyp.violations},
                               {"worst_rate", io::num(hyp.worst_rate)}};
  write_json(cfg, {{"command", "stationary"}, {"problem", problem_json(problem, region, seed)}, {"report", doc}}, json_out);
  write_csv(cfg, [&](std::ostream& f) {
    f << "cluster";
    for (std::size_t i = 1; i <= problem.dim; ++i) f << ",x" << i;
    f << ",rate,phi,feasible\n";
    for (std::size_t k = 0; k < rep.clusters.size(); ++k) {
      const auto& c = rep.clusters[k];
      f << k;
      for (double v : c.x) f << ',' << io::csv_number(v);
      f << ',' << io::csv_number(c.rate) << ',' << io::csv_number(c.phi) << ',' << (c.feasible ? 1 : 0) << '\n';
    }
  });
  return kOk;
}

inline int cmd_corpus_list(const RunConfig& cfg, std::ostream& out, std::ostream& json_out) {
  io::json list = io::json::array();
  for (const std::string& id : corpus::ids()) {
    const corpus::CorpusInstance c = corpus::load(id);
    out << "  " << std::left << std::setw(22) << id << "dim " << std::setw(4) << c.problem.dim << c.problem.description
        << '\n';
    list.push_back({{"id", id}, {"dim", c.problem.dim}, {"description", c.problem.description}});
  }
  write_json(cfg, {{"command", "corpus-list"}, {"instances", list}}, json_out);
  return kOk;
}

/// Parses arguments (argv[0] is the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"exactpen: exact penalty function analysis"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::uint64_t seed = 0;

  auto add_problem = [&](CLI::App* sub) {
    sub->add_option("--builtin", cfg.builtin, "corpus instance id");
    sub->add_option("--params", cfg.params, "instance parameters k=v");
    sub->add_option("--nlp", cfg.nlp_file, "problem-definition JSON file");
    sub->add_option("--region", cfg.region, "analysis box lo:hi[,lo:hi...]");
    sub->add_option("--seed", seed, "random seed (default: EXACTPEN_SEED or 0)");
    sub->add_option("--json", cfg.json_path, "write a JSON report ('-' for stdout)");
    sub->add_option("--csv", cfg.csv_path, "write a CSV trace");
  };
  CLI::App* local = app.add_subcommand("local", "local exactness at a feasible point");
  add_problem(local);
  local->add_option("--point", cfg.point, "comma-separated coordinates")->required();
  local->add_option("--shells", cfg.shells, "number of sampling shells");
  local->add_option("--samples", cfg.samples_per_shell, "samples per shell");
  CLI::App* global = app.add_subcommand("global", "global exactness on a region");
  add_problem(global);
  global->add_option("--n-samples", cfg.n_samples, "sample cloud size");
  CLI::App* solve_cmd = app.add_subcommand("solve", "adaptive exact penalty method");
  add_problem(solve_cmd);
  solve_cmd->add_option("--lambda", cfg.lambda, "initial penalty parameter (default: automatic)");
  CLI::App* stationary = app.add_subcommand("stationary", "inf-stationary points of F_lambda");
  add_problem(stationary);
  stationary->add_option("--lambda", cfg.lambda, "penalty parameter")->required();
  stationary->add_option("--n-seeds", cfg.n_seeds, "number of seeds");
  stationary->add_option("--descent-a", cfg.descent_a, "uniform descent constant a for phi");
  stationary->add_option("--n-samples", cfg.n_samples, "samples for the Lipschitz estimate");
  CLI::App* list = app.add_subcommand("corpus-list", "list built-in instances");
  list->add_option("--json", cfg.json_path, "write a JSON listing ('-' for stdout)");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  for (CLI::App* sub : {local, global, solve_cmd, stationary})
    if (sub->parsed() && sub->count("--seed") > 0) cfg.seed = seed;

  // With --json - stdout carries only the JSON document.
  std::ostringstream dropped;
  std::ostream& table = cfg.json_path == "-" ? dropped : out;
  try {
    if (local->parsed()) return cmd_local(cfg, table, out);
    if (global->parsed()) return cmd_global(cfg, table, out);
    if (solve_cmd->parsed()) return cmd_solve(cfg, table, out);
    if (stationary->parsed()) return cmd_stationary(cfg, table, out);
    return cmd_corpus_list(cfg, table, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace exactpen::cli
