// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is the number of failures.
//   acceptance            run every criterion
//   acceptance --only N   run criterion N

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stiffrough/fbm.hpp"
#include "stiffrough/harness.hpp"
#include "stiffrough/rough_lift.hpp"
#include "stiffrough/schemes.hpp"

namespace {

using namespace stiffrough;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SamplePath random_path(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::normal_distribution<double> normal;
  PathValues v(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(m));
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      v(r, c) = normal(rng);
    }
  }
  return SamplePath(Grid(1.0, n), v);
}

double trajectory_gap(const Trajectory& a, const Trajectory& b) {
  double g = a.states.size() == b.states.size() ? 0.0 : INFINITY;
  for (std::size_t j = 0; j < std::min(a.states.size(), b.states.size()); ++j) {
    g = std::max(g, (a.states[j] - b.states[j]).cwiseAbs().maxCoeff());
  }
  return g;
}

// Scalar root of y - h (y - y^3) = r by bisection.
double bisect_cubic(double h, double r) {
  const auto g = [&](double y) { return y - h * (y - y * y * y) - r; };
  double lo = -std::abs(r) - 2.0;
  double hi = std::abs(r) + 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Outcome chen_and_geometricity() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> dim(1, 3);
  std::uniform_int_distribution<std::size_t> steps(1, 16);
  double worst2 = 0.0;
  double worst3 = 0.0;
  double worst_geo = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = dim(rng);
    const RoughLift lift = piecewise_linear_lift(random_path(rng, steps(rng), m), true);
    const ChenResiduals r = chen_residuals(lift);
    worst2 = std::max({worst2, r.level1, r.level2});
    worst3 = std::max(worst3, r.level3);
    worst_geo = std::max(worst_geo, geometricity_defect_all_pairs(lift));
  }
  const double tol = 1e-12;
  return {worst2 <= tol && worst3 <= tol && worst_geo <= tol,
          "200 lifts, max residual level2 " + fmt("%.2e", worst2) + " level3 " + fmt("%.2e", worst3) +
              " geometricity " + fmt("%.2e", worst_geo) + " (tol 1e-12)"};
}

Outcome coincidence() {
  const Problem p = make_problem(ProblemId::example3);
  FbmConfig c;
  c.hurst = {5.0 / 12.0};
  c.dimension = 2;
  c.grid = Grid(1.0, 128);
  double worst2 = 0.0;
  double worst3 = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SamplePath x = sample_fbm(c, seed);
    worst2 = std::max(worst2, trajectory_gap(simplified_milstein(p, x), semi_implicit_milstein(p, piecewise_linear_lift(x, false))));
    worst3 = std::max(worst3, trajectory_gap(simplified_milstein3(p, x), semi_implicit_milstein3(p, piecewise_linear_lift(x, true))));
  }
  return {worst2 <= 1e-10 && worst3 <= 1e-10,
          "10 seeds h=2^-7, max gap level2 " + fmt("%.2e", worst2) + " level3 " + fmt("%.2e", worst3) +
              " (tol 1e-10)"};
}

Outcome solver_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> step(1e-6, 0.5);
  std::uniform_real_distribution<double> state(-5.0, 5.0);
  const DriftField b = catalogue::cubic_drift();
  double worst = 0.0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    double h = step(rng);
    if (h >= 0.5) {
      h = 0.4999;
    }
    const double r1 = state(rng);
    const double r2 = state(rng);
    const double y1 = solve_step(b, h, Vector::Constant(1, r1)).solution[0];
    const double y2 = solve_step(b, h, Vector::Constant(1, r2)).solution[0];
    worst = std::max({worst, std::abs(y1 - bisect_cubic(h, r1)), std::abs(y2 - bisect_cubic(h, r2))});
    if (r1 != r2) {
      worst_ratio = std::max(worst_ratio, std::abs(y1 - y2) * (1.0 - h) / std::abs(r1 - r2));
    }
  }
  return {worst <= 1e-10 && worst_ratio <= 1.0 + 1e-12,
          "100 draws, max |y - bisection| " + fmt("%.2e", worst) + ", max |dy|(1-C_b h)/|dr| " +
              fmt("%.6f", worst_ratio)};
}

std::map<double, StudyResult>& example1_studies() {
  static std::map<double, StudyResult> cache;
  if (cache.empty()) {
    for (double hurst : {0.75, 0.5, 0.25, 0.1}) {
      StudyConfig c;
      c.problem = ProblemId::example1;
      c.scheme = Scheme::implicit_euler;
      c.hurst = {hurst};
      c.min_exponent = 5;
      c.max_exponent = 10;
      c.reference_exponent = 12;
      c.seeds.clear();
      for (std::uint64_t s = 0; s < 20; ++s) {
        c.seeds.push_back(s);
      }
      cache.emplace(hurst, run_study(c));
    }
  }
  return cache;
}

Outcome eoc_reproduction() {
  const std::map<double, double> target_eoc{{0.75, 1.04}, {0.5, 0.88}, {0.25, 0.70}, {0.1, 0.54}};
  bool pass = true;
  std::string detail = "20 seeds:";
  for (const auto& [hurst, study] : example1_studies()) {
    const double target = target_eoc.at(hurst);
    const double mean = study.mean_average_eoc.value_or(NAN);
    const bool ok = std::abs(mean - target) <= 0.25 && mean >= hurst - 0.05;
    pass = pass && ok;
    detail += " H=" + fmt("%g", hurst) + " mean " + fmt("%.3f", mean) + " vs " + fmt("%.2f", target) +
              (ok ? "" : " [out of range]") + ";";
  }
  return {pass, detail};
}

Outcome stiffness() {
  const double h = std::ldexp(1.0, -5);
  StabilityOptions quiet;
  quiet.with_noise = false;
  const StabilityReport calm = stability_demo(h, quiet);
  bool explicit_growth = calm.explicit_run.trajectory.has_value();
  if (explicit_growth) {
    const auto& s = calm.explicit_run.trajectory->states;
    for (std::size_t n = 1; n < s.size(); ++n) {
      const double ratio = std::abs(s[n][0]) / std::abs(s[n - 1][0]);
      explicit_growth = explicit_growth && std::abs(s[n][0]) > std::abs(s[n - 1][0]) && std::abs(ratio - 1.1875) < 1e-12;
    }
  }
  const auto& imp = calm.implicit_run.trajectory->states;
  bool implicit_decay = true;
  for (std::size_t n = 1; n < imp.size(); ++n) {
    implicit_decay = implicit_decay && std::abs(imp[n][0]) < std::abs(imp[n - 1][0]);
  }
  implicit_decay = implicit_decay && std::abs(imp.back()[0]) < 1e-6;

  StabilityOptions noisy;
  noisy.hurst = 0.75;
  const StabilityReport rough = stability_demo(h, noisy);
  const std::size_t fe = rough.explicit_run.sign_flips;
  const std::size_t fi = rough.implicit_run.sign_flips;
  const bool flip_ratio = fe >= 10 * fi;

  return {explicit_growth && implicit_decay && flip_ratio,
          std::string("zero noise: explicit growth x1.1875 ") + (explicit_growth ? "yes" : "no") +
              ", implicit monotone decay to " + fmt("%.2e", std::abs(imp.back()[0])) + " " +
              (implicit_decay ? "yes" : "no") + "; fBm H=0.75: sign flips explicit " + std::to_string(fe) +
              " implicit " + std::to_string(fi) + " (need ratio >= 10)"};
}

Outcome example3_convergence() {
  StudyConfig c;
  c.problem = ProblemId::example3;
  c.scheme = Scheme::simplified_milstein;
  c.hurst = default_hurst(ProblemId::example3);
  c.min_exponent = 5;
  c.max_exponent = 9;
  c.reference_exponent = 12;
  c.seeds.clear();
  for (std::uint64_t s = 0; s < 20; ++s) {
    c.seeds.push_back(s);
  }
  const StudyResult study = run_study(c);
  const double mean = study.mean_average_eoc.value_or(NAN);
  const bool converge = mean >= 0.25;

  StudyConfig e = c;
  e.scheme = Scheme::explicit_euler;
  bool flagged = true;
  std::size_t flagged_rows = 0;
  try {
    const StudyResult ex = run_study(e);
    for (const auto& s : ex.seeds) {
      for (const auto& row : s.table.rows) {
        if (row.step == std::ldexp(1.0, -6)) {
          flagged = flagged && row.flagged && std::isnan(row.error) && !row.note.empty();
          flagged_rows += row.flagged ? 1 : 0;
        }
      }
    }
  } catch (const std::exception& ex) {
    flagged = false;
  }
  return {converge && flagged, "20 seeds simplified-milstein mean average EOC " + fmt("%.3f", mean) +
                                   " (need >= 0.25); explicit-euler h=2^-6 flagged on " +
                                   std::to_string(flagged_rows) + "/20 seeds without a crash"};
}

Outcome fbm_statistics() {
  const std::size_t n = 256;
  const std::size_t samples = 100000;
  std::mt19937_64 pick(5);
  std::uniform_int_distribution<std::size_t> node(0, n);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (pairs.size() < 10) {
    std::size_t s = node(pick);
    std::size_t t = node(pick);
    if (s != t) {
      pairs.emplace_back(std::min(s, t), std::max(s, t));
    }
  }
  bool pass = true;
  std::string detail;
  for (double hurst : {0.25, 0.5, 0.75}) {
    FbmConfig c;
    c.hurst = {hurst};
    c.grid = Grid(1.0, n);
    double var = 0.0;
    std::vector<double> moments(pairs.size(), 0.0);
    for (std::uint64_t seed = 0; seed < samples; ++seed) {
      const SamplePath x = sample_fbm(c, seed);
      const double end = x.values(static_cast<Eigen::Index>(n), 0);
      var += end * end;
      for (std::size_t q = 0; q < pairs.size(); ++q) {
        const double d = x.values(static_cast<Eigen::Index>(pairs[q].second), 0) -
                         x.values(static_cast<Eigen::Index>(pairs[q].first), 0);
        moments[q] += d * d;
      }
    }
    var /= static_cast<double>(samples);
    double worst = 0.0;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const double gap = static_cast<double>(pairs[q].second - pairs[q].first) / static_cast<double>(n);
      const double expected = std::pow(gap, 2.0 * hurst);
      worst = std::max(worst, std::abs(moments[q] / static_cast<double>(samples) - expected) / expected);
    }
    const bool ok = var >= 0.95 && var <= 1.05 && worst <= 0.05;
    pass = pass && ok;
    detail += " H=" + fmt("%g", hurst) + " Var(B(1)) " + fmt("%.4f", var) + " worst increment moment rel. dev. " +
              fmt("%.4f", worst) + ";";
  }
  return {pass, "1e5 samples N=256:" + detail};
}

Outcome boundedness() {
  bool pass = true;
  std::size_t checks = 0;
  for (const auto& [hurst, study] : example1_studies()) {
    pass = pass && study.all_bounded();
    checks += study.boundedness_checks();
  }
  pass = pass && checks > 0;
  return {pass, std::to_string(checks) + " example1 trajectories (4 H values x 20 seeds x 7 grids) checked"};
}

Outcome local_order() {
  const Problem p = default_probe_problem();
  const auto slope = [&](Scheme s) {
    return local_error_probe(p, s, default_probe_driver(), p.initial, default_probe_steps()).slope;
  };
  const double euler = slope(Scheme::semi_implicit_euler);
  const double milstein = slope(Scheme::semi_implicit_milstein);
  const double milstein3 = slope(Scheme::semi_implicit_milstein3);
  return {euler >= 1.8 && milstein >= euler && milstein3 >= milstein,
          "slopes euler " + fmt("%.3f", euler) + " milstein " + fmt("%.3f", milstein) + " milstein3 " +
              fmt("%.3f", milstein3)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "chen and geometricity", 10.0, chen_and_geometricity},
      {2, "simplified/full coincidence", 30.0, coincidence},
      {3, "implicit solver oracle", 10.0, solver_oracle},
      {4, "EOC reproduction example1", 600.0, eoc_reproduction},
      {5, "stiffness demonstration example2", 5.0, stiffness},
      {6, "example3 convergence", 600.0, example3_convergence},
      {7, "fBm statistics", 120.0, fbm_statistics},
      {8, "boundedness certificate", 600.0, boundedness},
      {9, "local order probe", 30.0, local_order},
  };

  int failures = 0;
  bool ran = false;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) {
      continue;
    }
    ran = true;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("criterion %d %s: %s | %s | %.1f s (budget %.0f s%s)\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  if (!ran) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failures;
}
