// Acceptance run: one PASS/FAIL line per criterion. argv[1] is the exactpen
// CLI binary, used for the verdict and rerun checks.
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include <sys/wait.h>

#include "exactpen/exactpen.hpp"
#include "exactpen/report_io.hpp"

namespace {

using namespace exactpen;

struct Checks {
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s.precision(10);
      s << what << ": got " << got << ", want " << want << " +- " << tol;
      failures.push_back(s.str());
    }
  }
};

struct Captured {
  int status = -1;
  std::string out;
};

Captured capture(const std::string& command) {
  Captured c;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return c;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) c.out.append(buf.data(), got);
  const int raw = ::pclose(pipe);
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return c;
}

double scalar_grid_min(const std::function<double(double)>& g, double lo, double hi, std::size_t count) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) best = std::min(best, g(lo + (hi - lo) * static_cast<double>(i) / (count - 1)));
  return best;
}

double pos(double x) { return std::max(0.0, x); }

std::string cli;

void criterion1(Checks& c) {
  const auto ex = corpus::example_1d();
  const LambdaBarEstimate est = estimate_lambda_bar(ex.problem, Point{0.0});
  c.require(est.verdict == LambdaBarVerdict::finite, "lambda_bar verdict is finite");
  c.near(est.value, 2.0, 0.05, "lambda_bar at 0");
  c.require(!check_local_minimum(PenaltyFunction(ex.problem, 2.0), Point{0.0}).is_local_minimum,
            "0 is not a local minimizer of F_2");
  c.require(check_local_minimum(PenaltyFunction(ex.problem, 2.5), Point{0.0}).is_local_minimum,
            "0 is a local minimizer of F_2.5");
}

void criterion2(Checks& c) {
  const auto st = corpus::stairs();
  for (int k = 2; k <= 6; ++k) {
    const double kd = k;
    const Rung r = solve_G(st.problem, kd, Region::interval(-1.0, 10.0 * kd * kd));
    c.near(r.x[0], 4.0 * kd * kd, 1e-3, "stairs minimizer at lambda=" + std::to_string(k));
    c.near(r.penalized, -1.0 / (4.0 * kd), 1e-6, "stairs value at lambda=" + std::to_string(k));
  }
  const std::vector<double> ladder{2, 3, 4, 5, 6};
  const PenaltyPath path = build_penalty_path(st.problem, ladder, st.problem.region);
  c.require(!nondegeneracy_diagnostic(path, st.problem).nondegenerate, "ladder 2..6 is flagged degenerate");
  const Captured g = capture(cli + " global --builtin stairs --json -");
  c.require(g.status == 3, "global exits with the not-exact code");
  try {
    c.require(io::json::parse(g.out).at("report").at("verdict") == "not_exact", "global verdict is not_exact");
  } catch (const std::exception& e) {
    c.require(false, std::string("global JSON: ") + e.what());
  }
}

void criterion3(Checks& c) {
  for (const char* id : {"l2_not_strong_reg", "l2_unbounded_local", "l2_not_lip"}) {
    const auto inst = corpus::load(id, {{"N", 50}});
    for (double lambda : {1.0, 2.5, 7.0}) {
      const Rung r = solve_G(inst.problem, lambda, inst.problem.region);
      const std::string tag = std::string(id) + " lambda=" + std::to_string(lambda);
      c.near(r.penalized, *inst.truth.min_value(lambda), 1e-6, tag + " value");
      if (std::string(id) == "l2_not_strong_reg") c.near(norm(r.x), 2.0, 1e-6, tag + " minimizer norm");
    }
  }
  const auto nsr = corpus::l2_not_strong_reg({{"N", 50}});
  const std::vector<double> ladder{1.0, 2.5, 7.0, 12.0};
  const NondegeneracyReport nd =
      nondegeneracy_diagnostic(build_penalty_path(nsr.problem, ladder, nsr.problem.region), nsr.problem);
  c.require(nd.nondegenerate, "l2_not_strong_reg is non-degenerate");
  c.require(!nd.strongly, "l2_not_strong_reg is not strongly non-degenerate");
}

void criterion4(Checks& c) {
  const auto ex = corpus::example_1d();
  std::vector<Region> regions;
  for (double R : {3.0, 10.0, 30.0}) {
    regions.push_back(Region::interval(-R, R));
    const SupEstimate s = lambda_star_sup(ex.problem, regions.back(), 4096, 0, 0.0);
    c.near(s.lower_bound, R + 2.0, 0.01 * (R + 2.0), "sup on [-R, R] for R=" + std::to_string(R));
  }
  c.require(lambda_star_sup_expanding(ex.problem, regions, 4096, 0, 0.0).verdict == SupVerdict::diverging,
            "expanding-region sequence diverges");
}

void criterion5(Checks& c) {
  const auto ex = corpus::example_1d();
  const LemmaBound b = lemma_exactness_bound(ex.problem, 6.0, 1.0, Region::interval(-3.0, 3.0), 0.0);
  const double oracle =
      scalar_grid_min([](double x) { return corpus::example_1d_f(x) + 6.0 * pos(x); }, -3.0, 3.0, 600001);
  c.near(b.c, oracle, 1e-6, "c = inf F_6 on [-3, 3]");
  c.require(b.bound >= 5.0, "bound >= 5");
  c.require(std::isfinite(b.bound), "bound is finite");
}

void criterion6(Checks& c) {
  const auto ex = corpus::example_1d();
  const OptimalValueSamples h = optimal_value_function(ex.problem, ex.problem.region);
  double worst = 0.0;
  for (std::size_t i = 0; i < h.p_grid.size(); ++i) {
    const double p = h.p_grid[i];
    worst = std::max(worst, std::abs(h.h_vals[i] - (-(p + 1.0) * (p + 1.0) + 1.0)));
  }
  c.near(worst, 0.0, 1e-6, "max |h(p) - (1 - (p+1)^2)|");
  c.near(h.modulus_estimate, 2.0, 0.05, "calmness modulus");
  const double lam = estimate_lambda_bar(ex.problem, Point{0.0}).value;
  c.near(h.modulus_estimate, lam, 0.05, "modulus agrees with lambda_bar");

  const auto sq = corpus::sqrt_noncalm();
  SamplingSchedule deep;
  deep.shells = 48;
  c.require(estimate_lambda_bar(sq.problem, Point{0.0}, deep).verdict == LambdaBarVerdict::diverging,
            "sqrt_noncalm lambda_bar diverges");
  const std::vector<double> grid = default_p_grid(47);
  const OptimalValueSamples hs =
      optimal_value_function(sq.problem, PerturbedFamily::phi_level(sq.problem), grid, sq.problem.region);
  c.require(!hs.calm_from_below, "sqrt_noncalm h is not calm from below");
}

void criterion7(Checks& c) {
  const auto ex = corpus::example_1d();
  const Region region = Region::interval(-1.0, 3.0);
  const StationaryReport three = find_inf_stationary(PenaltyFunction(ex.problem, 3.0), region);
  c.require(three.infeasible_count() == 1, "one infeasible cluster at lambda=3");
  for (const StationaryCluster& cl : three.clusters)
    if (!cl.feasible) c.near(cl.x[0], 0.5, 1e-3, "infeasible cluster location");
  const StationaryReport ten = find_inf_stationary(PenaltyFunction(ex.problem, 10.0), region);
  c.require(ten.infeasible_count() == 0, "no infeasible cluster at lambda=10");
  const DescentHypothesisReport hyp = verify_descent_hypothesis(ex.problem, region, 1.0);
  c.require(hyp.samples > 0 && hyp.violations == 0, "descent hypothesis holds with a=1");
  const double bound = infeasible_stationarity_bound(estimate_lipschitz(ex.problem, region), 1.0);
  c.require(bound <= 8.0 + 1e-9 && bound > 7.9, "L/a estimate consistent with 8");
  c.require(bound < 10.0, "lambda=10 lies above the filter threshold");
}

void criterion8(Checks& c) {
  const auto ex = corpus::example_1d();
  const auto cs = corpus::convex_slater();
  for (const auto* p : {&ex.problem, &cs.problem})
    for (const Point& x : sample_cloud(p->region, 256, 3)) {
      double prev = -std::numeric_limits<double>::infinity();
      for (double lambda : {0.0, 1.0, 4.0, 16.0}) {
        const double v = PenaltyFunction(*p, lambda)(x).value();
        c.require(v >= prev, "F_lambda monotone in lambda");
        prev = v;
      }
    }

  const double ref = estimate_lambda_bar(ex.problem, Point{0.0}).value;
  ConstrainedProblem scaled = ex.problem;
  scaled.objective = [f = ex.problem.objective](std::span<const double> x) { return ExtReal(3.0 * f(x).value()); };
  c.near(estimate_lambda_bar(scaled, Point{0.0}).value, 3.0 * ref, 1e-9, "lambda_bar scales with f");

  const std::vector<double> ladder{0.5, 1, 2, 4, 8};
  const PenaltyPath path = build_penalty_path(cs.problem, ladder, cs.problem.region);
  for (std::size_t i = 1; i < path.rungs.size(); ++i) {
    c.require(path.rungs[i].phi_val <= path.rungs[i - 1].phi_val + 1e-6, "path phi non-increasing");
    c.require(path.rungs[i].f_val >= path.rungs[i - 1].f_val - 1e-6, "path f non-decreasing");
  }

  for (double t : {-1.0, 0.0, 0.5, 2.0}) {
    const DescentEstimate d = rate_of_steepest_descent(PenaltyFunction(ex.problem, 3.0), Point{t});
    c.require(d.strong_slope == std::max(-d.rate, 0.0), "strong slope is max(-rate, 0)");
  }

  for (const auto* p : {&ex.problem, &cs.problem}) {
    for (double lambda : {1.0, 5.0}) {
      const Rung r = solve_G(*p, lambda, p->region);
      double oracle = std::numeric_limits<double>::infinity();
      const std::size_t per = p->dim == 1 ? 600001 : 1201;
      const Point lo = p->region.lower(), hi = p->region.upper();
      for (std::size_t i = 0; i < per; ++i)
        for (std::size_t j = 0; j < (p->dim == 1 ? 1 : per); ++j) {
          Point x{lo[0] + (hi[0] - lo[0]) * static_cast<double>(i) / (per - 1)};
          if (p->dim == 2) x.push_back(lo[1] + (hi[1] - lo[1]) * static_cast<double>(j) / (per - 1));
          oracle = std::min(oracle, PenaltyFunction(*p, lambda)(x).value());
        }
      c.near(r.penalized, oracle, 1e-4, p->name + " solve_G vs grid at lambda=" + std::to_string(lambda));
    }
  }

  for (const char* args : {" local --builtin example_1d --point 0 --json -", " solve --builtin convex_slater --json -"}) {
    const Captured a = capture(cli + args);
    const Captured b = capture(cli + args);
    c.require(a.status == 0 && !a.out.empty(), std::string("CLI run succeeds:") + args);
    c.require(a.out == b.out, std::string("CLI rerun is byte-identical:") + args);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: exactpen_acceptance <path to exactpen>\n";
    return 2;
  }
  cli = argv[1];
  struct Criterion {
    int id;
    const char* title;
    void (*run)(Checks&);
    double time_limit;
  };
  const Criterion all[] = {
      {1, "local parameter of example_1d", criterion1, 1.0},
      {2, "stairs minimizers escape", criterion2, 30.0},
      {3, "l2 truncations in R^50", criterion3, 60.0},
      {4, "growing-region sup on example_1d", criterion4, 0.0},
      {5, "lemma bound with mu=6, delta=1", criterion5, 0.0},
      {6, "optimal value function and calmness", criterion6, 0.0},
      {7, "inf-stationary points and L/a filter", criterion7, 0.0},
      {8, "property suites and reproducibility", criterion8, 0.0},
  };
  int failed = 0;
  for (const Criterion& cr : all) {
    Checks checks;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(checks);
    } catch (const std::exception& e) {
      checks.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.time_limit > 0.0 && secs >= cr.time_limit) {
      std::ostringstream s;
      s << "runtime " << secs << " s exceeds " << cr.time_limit << " s";
      checks.failures.push_back(s.str());
    }
    const bool ok = checks.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("criterion %d: %s  %-40s %.2f s\n", cr.id, ok ? "PASS" : "FAIL", cr.title, secs);
    for (const std::string& f : checks.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
