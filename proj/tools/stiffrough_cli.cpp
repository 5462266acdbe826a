// Command-line driver for convergence studies, the stiffness demonstration,
// the local-order probe and fBm sampling.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stiffrough/fbm.hpp"
#include "stiffrough/harness.hpp"

namespace {

using namespace stiffrough;

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw std::invalid_argument("expected a comma-separated list of numbers");
  }
  return out;
}

// "a..b" with a <= b.
std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int v = std::stoi(text);
    return {v, v};
  }
  return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
}

// "n" means seeds 0..n-1, "a,b,c" an explicit list.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  if (text.find(',') == std::string::npos) {
    const auto n = std::stoull(text);
    for (std::uint64_t s = 0; s < n; ++s) {
      out.push_back(s);
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(std::stoull(item));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_study(const StudyResult& result) {
  std::cout << "problem " << to_string(result.config.problem) << ", scheme " << to_string(result.config.scheme)
            << ", " << result.seeds.size() << " seed(s)\n";
  write_aggregate_csv(std::cout, result.aggregate);
  if (result.mean_average_eoc) {
    std::cout << "mean average EOC: " << fmt(*result.mean_average_eoc) << '\n';
  }
  std::size_t flagged = 0;
  for (const auto& s : result.seeds) {
    for (const auto& row : s.table.rows) {
      flagged += row.flagged ? 1 : 0;
    }
  }
  if (flagged > 0) {
    std::cout << flagged << " flagged row(s); see flags.csv\n";
  }
  if (result.boundedness_checks() > 0) {
    std::cout << "boundedness certificate: " << (result.all_bounded() ? "held" : "VIOLATED") << " on "
              << result.boundedness_checks() << " trajectories\n";
  }
}

void write_trace(const std::filesystem::path& file, const StabilityTrace& trace) {
  if (!trace.trajectory) {
    return;
  }
  std::ofstream out(file);
  write_trajectory_csv(out, *trace.trajectory);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-implicit rough Taylor schemes: studies and experiments"};
  app.require_subcommand(1);

  std::string problem_name = "example1";
  std::string scheme_name;
  std::string hurst_text;
  std::string steps_text = "5..10";
  int reference_exponent = 12;
  std::string seeds_text = "1";
  std::string out_dir = "study";
  std::size_t threads = 0;
  std::size_t max_fbm_steps = kDefaultMaxFbmSteps;
  auto* run = app.add_subcommand("run", "Pathwise-error convergence study against a fine reference");
  run->add_option("--problem", problem_name, "example1 | example2 | example3")->capture_default_str();
  run->add_option("--scheme", scheme_name, "Scheme name (default depends on the problem)");
  run->add_option("--hurst", hurst_text, "Hurst parameter(s), comma separated");
  run->add_option("--steps", steps_text, "Step exponents a..b, i.e. h = 2^-a .. 2^-b")->capture_default_str();
  run->add_option("--ref", reference_exponent, "Reference exponent")->capture_default_str();
  run->add_option("--seeds", seeds_text, "Seed count n (seeds 0..n-1) or a comma-separated list")
      ->capture_default_str();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_option("--max-fbm-steps", max_fbm_steps, "Cap on the reference grid size")->capture_default_str();

  double stability_h = 1.0 / 32.0;
  std::uint64_t stability_seed = 0;
  bool no_noise = false;
  std::string stability_out;
  auto* stability = app.add_subcommand("stability", "Explicit vs implicit Euler on the stiff linear problem");
  stability->set_help_flag("--help", "Print this help message and exit");
  stability->add_option("--h", stability_h, "Step size")->required();
  stability->add_option("--seed", stability_seed, "Driver seed")->capture_default_str();
  stability->add_flag("--no-noise", no_noise, "Zero driver");
  stability->add_option("--out", stability_out, "Directory for explicit.csv / implicit.csv");

  std::string probe_scheme = "semi-implicit-euler";
  std::string probe_out;
  auto* probe = app.add_subcommand("probe-local", "One-step error slopes on a smooth driver");
  probe->add_option("--scheme", probe_scheme, "Scheme name, or 'all'")->capture_default_str();
  probe->add_option("--out", probe_out, "CSV file for h,error rows");

  double sample_hurst = 0.5;
  std::size_t sample_n = 256;
  std::uint64_t sample_seed = 0;
  std::size_t sample_dim = 1;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample-fbm", "Sample one fBm path on [0,1]");
  sample->add_option("--hurst", sample_hurst, "Hurst parameter")->required();
  sample->add_option("--n", sample_n, "Number of steps")->required();
  sample->add_option("--seed", sample_seed, "Seed")->capture_default_str();
  sample->add_option("--dim", sample_dim, "Number of components")->capture_default_str();
  sample->add_option("--out", sample_out, "Output CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      StudyConfig config;
      config.problem = parse_problem_id(problem_name);
      if (config.problem == ProblemId::custom) {
        throw std::invalid_argument("custom problems are only available through the library");
      }
      config.scheme = !scheme_name.empty() ? parse_scheme(scheme_name)
                      : config.problem == ProblemId::example3 ? Scheme::simplified_milstein
                                                              : Scheme::implicit_euler;
      config.hurst = hurst_text.empty() ? default_hurst(config.problem) : parse_doubles(hurst_text);
      std::tie(config.min_exponent, config.max_exponent) = parse_range(steps_text);
      config.reference_exponent = reference_exponent;
      config.seeds = parse_seeds(seeds_text);
      config.output = out_dir;
      config.threads = threads;
      config.max_fbm_steps = max_fbm_steps;
      print_study(run_study(config));
      std::cout << "wrote " << out_dir << '\n';
    } else if (stability->parsed()) {
      StabilityOptions options;
      options.seed = stability_seed;
      options.with_noise = !no_noise;
      const StabilityReport report = stability_demo(stability_h, options);
      for (const auto* trace : {&report.explicit_run, &report.implicit_run}) {
        const bool is_explicit = trace == &report.explicit_run;
        std::cout << (is_explicit ? "explicit" : "implicit") << ": factor " << fmt(trace->contraction_factor)
                  << ", sign flips " << trace->sign_flips << ", max |y| " << fmt(trace->max_amplitude) << ", "
                  << (trace->stable ? "stable" : "unstable");
        if (!trace->failure.empty()) {
          std::cout << " (" << trace->failure << ")";
        }
        std::cout << '\n';
      }
      if (!stability_out.empty()) {
        std::filesystem::create_directories(stability_out);
        write_trace(std::filesystem::path(stability_out) / "explicit.csv", report.explicit_run);
        write_trace(std::filesystem::path(stability_out) / "implicit.csv", report.implicit_run);
      }
    } else if (probe->parsed()) {
      std::vector<Scheme> schemes;
      if (probe_scheme == "all") {
        schemes = {Scheme::semi_implicit_euler, Scheme::semi_implicit_milstein, Scheme::semi_implicit_milstein3,
                   Scheme::simplified_milstein, Scheme::simplified_milstein3};
      } else {
        schemes = {parse_scheme(probe_scheme)};
      }
      const Problem problem = default_probe_problem();
      const SmoothDriver driver = default_probe_driver();
      std::ofstream csv;
      if (!probe_out.empty()) {
        csv.open(probe_out);
        csv << "scheme,h,error\n";
      }
      for (Scheme s : schemes) {
        const LocalErrorProbe result = local_error_probe(problem, s, driver, problem.initial, default_probe_steps());
        std::cout << to_string(s) << ": slope " << fmt(result.slope) << " (theory "
                  << fmt(result.theoretical_rate) << ")\n";
        if (csv.is_open()) {
          for (std::size_t i = 0; i < result.steps.size(); ++i) {
            csv << to_string(s) << ',' << fmt(result.steps[i]) << ',' << fmt(result.errors[i]) << '\n';
          }
        }
      }
    } else if (sample->parsed()) {
      FbmConfig config;
      config.hurst = {sample_hurst};
      config.dimension = sample_dim;
      config.grid = Grid(1.0, sample_n);
      config.seed = sample_seed;
      std::ofstream out(sample_out);
      if (!out) {
        throw std::runtime_error("cannot open " + sample_out);
      }
      write_path_csv(out, sample_fbm(config));
      std::cout << "wrote " << sample_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
