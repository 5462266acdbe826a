#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stiffrough/fbm.hpp"
#include "stiffrough/schemes.hpp"

namespace stiffrough {

enum class ProblemId { example1, example2, example3, custom };

const char* to_string(ProblemId id);
ProblemId parse_problem_id(std::string_view name);

/// The built-in experiments on [0, 1]:
///   example1: dy = (y - y^3) dt + dB, y(0) = -3
///   example2: dy = -70 y dt + dB, y(0) = 2.7
///   example3: dy = (y - |y|^2 y) dt + sigma_1(y) dB^1 + sigma_2(y) dB^2, y(0) = (10, -10)
Problem make_problem(ProblemId id);

/// Default Hurst parameters per experiment (example3 uses 5/12 in both components).
std::vector<double> default_hurst(ProblemId id);

struct StudyConfig {
  ProblemId problem = ProblemId::example1;
  std::optional<Problem> custom_problem;  // used when problem == custom
  Scheme scheme = Scheme::implicit_euler;
  std::vector<double> hurst{0.5};
  int min_exponent = 5;  // coarsest step 2^-min_exponent
  int max_exponent = 10;
  int reference_exponent = 12;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output;  // empty: nothing written
  std::size_t threads = 0;       // 0: hardware concurrency
  std::size_t max_fbm_steps = kDefaultMaxFbmSteps;
  IntegrationOptions integration;

  Problem resolved_problem() const;
  void validate() const;
};

struct ErrorRow {
  double step = 0.0;
  double error = 0.0;  // NaN when flagged
  std::optional<double> eoc;
  bool flagged = false;
  std::string note;
  std::optional<bool> bounded;  // boundedness certificate, when it applies
};

struct ErrorTable {
  std::vector<ErrorRow> rows;  // coarsest step first
  std::optional<double> average_eoc;
};

struct SeedStudy {
  std::uint64_t seed = 0;
  ErrorTable table;
  bool reference_failed = false;
  std::string reference_note;
  std::optional<bool> reference_bounded;
};

struct AggregateRow {
  double step = 0.0;
  double mean_error = 0.0;
  std::optional<double> mean_eoc;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct StudyResult {
  StudyConfig config;
  std::vector<SeedStudy> seeds;  // in config.seeds order
  std::vector<AggregateRow> aggregate;
  std::optional<double> mean_average_eoc;

  /// True when every applicable boundedness certificate held.
  bool all_bounded() const;
  std::size_t boundedness_checks() const;
};

/// EOC_i = (log e_i - log e_{i-1}) / (log h_i - log h_{i-1}); one value per consecutive pair.
/// Throws std::invalid_argument on non-positive errors or steps that do not strictly decrease.
std::vector<double> eoc(std::span<const double> errors, std::span<const double> steps);

/// Fills the EOC column for consecutive rows that both carry an error, and the average over those.
void fill_eoc(ErrorTable& table);

/// Per seed: sample the driver on the reference grid, run the scheme at the reference step and at every
/// study step on the restricted driver, and take max-over-nodes errors against the reference.
StudyResult run_study(const StudyConfig& config);

/// Writes errors_seed_<s>.csv, loglog_seed_<s>.csv, aggregate.csv, loglog_mean.csv and flags.csv.
void write_study(const StudyResult& result, const std::filesystem::path& directory);
void write_error_table_csv(std::ostream& out, const ErrorTable& table);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Sign changes between consecutive increments of the first state component.
std::size_t count_sign_flips(const Trajectory& trajectory);

struct StabilityTrace {
  std::optional<Trajectory> trajectory;
  std::size_t sign_flips = 0;
  double max_amplitude = 0.0;
  double contraction_factor = 0.0;  // |one-step amplification| of the drift part
  bool stable = true;
  std::string failure;
};

struct StabilityReport {
  double step = 0.0;
  double hurst = 0.75;
  bool with_noise = true;
  StabilityTrace explicit_run;
  StabilityTrace implicit_run;
};

struct StabilityOptions {
  double hurst = 0.75;
  std::uint64_t seed = 0;
  bool with_noise = true;
  int reference_exponent = 12;
};

/// Explicit and implicit Euler for example2 on one shared fBm path. The explicit run is classified
/// unstable when |1 - 70 h| > 1. h must divide 1.
StabilityReport stability_demo(double h, const StabilityOptions& options = {});

/// x^i(t) = amplitude_i sin(frequency_i t + phase_i).
struct SmoothDriver {
  std::vector<double> amplitude;
  std::vector<double> frequency;
  std::vector<double> phase;
  double regularity_p = 1.0;

  std::size_t dimension() const { return amplitude.size(); }
  Vector value(double t) const;
  Vector derivative(double t) const;
};

struct ProbeOptions {
  double base_time = 0.25;
  /// Spacing of the piecewise-linear lift and of the RK4 reference.
  double fine_step = std::ldexp(1.0, -20);
};

struct LocalErrorProbe {
  Scheme scheme = Scheme::semi_implicit_euler;
  std::vector<double> steps;
  std::vector<double> errors;
  double slope = 0.0;  // NaN with fewer than two positive errors
  double theoretical_rate = 0.0;
};

/// Theoretical one-step rate: 2/p (Euler), min(1 + 1/p, 3/p) (Milstein), 1 + 1/p (Milstein3).
double theoretical_local_rate(Scheme scheme, double p);

/// One step of the scheme from base_point at options.base_time for every h, against an RK4
/// solution of dy = b(y) dt + sigma(y) x'(t) dt; returns the log-log regression slope.
LocalErrorProbe local_error_probe(const Problem& problem, Scheme scheme, const SmoothDriver& driver,
                                  const Vector& base_point, const std::vector<double>& steps,
                                  const ProbeOptions& options = {});

/// sigma(y) = y, b = 0, xi = 1 with x(t) = 3 sin(8 t + 0.3).
Problem default_probe_problem();
SmoothDriver default_probe_driver();
std::vector<double> default_probe_steps();  // 2^-6 .. 2^-12

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace stiffrough
