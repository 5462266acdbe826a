#include "stiffrough/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

namespace stiffrough {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

const char* to_string(ProblemId id) {
  switch (id) {
    case ProblemId::example1:
      return "example1";
    case ProblemId::example2:
      return "example2";
    case ProblemId::example3:
      return "example3";
    case ProblemId::custom:
      return "custom";
  }
  return "unknown";
}

ProblemId parse_problem_id(std::string_view name) {
  for (ProblemId id : {ProblemId::example1, ProblemId::example2, ProblemId::example3, ProblemId::custom}) {
    if (name == to_string(id)) {
      return id;
    }
  }
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

Problem make_problem(ProblemId id) {
  Problem p;
  p.horizon = 1.0;
  switch (id) {
    case ProblemId::example1:
      p.drift = catalogue::cubic_drift();
      p.initial = Vector{{-3.0}};
      return p;
    case ProblemId::example2:
      p.drift = catalogue::linear_drift(70.0);
      p.initial = Vector{{2.7}};
      return p;
    case ProblemId::example3:
      p.drift = catalogue::cubic_vector_drift(2);
      p.diffusion = catalogue::two_dimensional_example();
      p.initial = Vector{{10.0, -10.0}};
      return p;
    case ProblemId::custom:
      break;
  }
  throw std::invalid_argument("custom problems have no built-in definition");
}

std::vector<double> default_hurst(ProblemId id) {
  switch (id) {
    case ProblemId::example1:
      return {0.5};
    case ProblemId::example2:
      return {0.75};
    case ProblemId::example3:
      return {5.0 / 12.0, 5.0 / 12.0};
    case ProblemId::custom:
      break;
  }
  return {0.5};
}

Problem StudyConfig::resolved_problem() const {
  if (problem == ProblemId::custom) {
    if (!custom_problem) {
      throw std::invalid_argument("custom study needs a problem definition");
    }
    return *custom_problem;
  }
  return make_problem(problem);
}

void StudyConfig::validate() const {
  const Problem p = resolved_problem();
  p.validate();
  if (p.horizon != 1.0 && p.horizon <= 0.0) {
    throw std::invalid_argument("invalid horizon");
  }
  if (min_exponent < 0 || min_exponent > max_exponent) {
    throw std::invalid_argument("step exponents must satisfy 0 <= min <= max");
  }
  if (reference_exponent <= max_exponent) {
    throw std::invalid_argument("reference exponent " + std::to_string(reference_exponent) +
                                " must exceed every step exponent (max " + std::to_string(max_exponent) + ")");
  }
  if (reference_exponent > 30) {
    throw std::invalid_argument("reference exponent too large");
  }
  if ((std::size_t{1} << reference_exponent) > max_fbm_steps) {
    throw std::invalid_argument("reference grid 2^" + std::to_string(reference_exponent) +
                                " exceeds the fBm step cap " + std::to_string(max_fbm_steps));
  }
  if (seeds.empty()) {
    throw std::invalid_argument("study needs at least one seed");
  }
  if (p.additive() && !supports_additive(scheme)) {
    throw std::invalid_argument(std::string(to_string(scheme)) + " needs a diffusion field; " +
                                to_string(problem) + " has additive noise");
  }
  if (!p.additive() && !supports_multiplicative(scheme)) {
    throw std::invalid_argument(std::string(to_string(scheme)) + " is for additive noise only");
  }
  FbmConfig fbm;
  fbm.hurst = hurst;
  fbm.dimension = p.noise_dim();
  fbm.grid = Grid(p.horizon, std::size_t{1} << reference_exponent);
  fbm.max_steps = max_fbm_steps;
  fbm.validate();
}

bool StudyResult::all_bounded() const {
  for (const auto& s : seeds) {
    if (s.reference_bounded && !*s.reference_bounded) {
      return false;
    }
    for (const auto& row : s.table.rows) {
      if (row.bounded && !*row.bounded) {
        return false;
      }
    }
  }
  return true;
}

std::size_t StudyResult::boundedness_checks() const {
  std::size_t count = 0;
  for (const auto& s : seeds) {
    count += s.reference_bounded.has_value() ? 1 : 0;
    for (const auto& row : s.table.rows) {
      count += row.bounded.has_value() ? 1 : 0;
    }
  }
  return count;
}

std::vector<double> eoc(std::span<const double> errors, std::span<const double> steps) {
  if (errors.size() != steps.size()) {
    throw std::invalid_argument("eoc needs one error per step");
  }
  for (double e : errors) {
    if (!(e > 0.0)) {
      throw std::invalid_argument("eoc needs positive errors, got " + std::to_string(e));
    }
  }
  std::vector<double> out;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(steps[i] > 0.0 && steps[i] < steps[i - 1])) {
      throw std::invalid_argument("eoc needs positive, strictly decreasing steps");
    }
    out.push_back((std::log(errors[i]) - std::log(errors[i - 1])) / (std::log(steps[i]) - std::log(steps[i - 1])));
  }
  return out;
}

void fill_eoc(ErrorTable& table) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    auto& row = table.rows[i];
    row.eoc.reset();
    if (i == 0) {
      continue;
    }
    const auto& prev = table.rows[i - 1];
    if (row.flagged || prev.flagged || !(row.error > 0.0) || !(prev.error > 0.0)) {
      continue;
    }
    const double errors[] = {prev.error, row.error};
    const double steps[] = {prev.step, row.step};
    row.eoc = eoc(errors, steps).front();
    sum += *row.eoc;
    ++count;
  }
  table.average_eoc = count > 0 ? std::optional<double>(sum / static_cast<double>(count)) : std::nullopt;
}

namespace {

std::optional<bool> certify(const Problem& problem, Scheme scheme, const SamplePath& driver,
                            const Trajectory& trajectory) {
  const double h = driver.grid.step();
  if (!problem.additive() || scheme != Scheme::implicit_euler || 2.0 * problem.drift.one_sided_lipschitz * h > 1.0) {
    return std::nullopt;
  }
  const double bound = boundedness_bound(problem, driver);
  return max_state_norm(trajectory) <= bound * (1.0 + 1e-12);
}

SeedStudy study_one_seed(const StudyConfig& config, const Problem& problem, std::uint64_t seed) {
  FbmConfig fbm;
  fbm.hurst = config.hurst;
  fbm.dimension = problem.noise_dim();
  fbm.grid = Grid(problem.horizon, std::size_t{1} << config.reference_exponent);
  fbm.max_steps = config.max_fbm_steps;
  const SamplePath driver = sample_fbm(fbm, seed);

  SeedStudy out;
  out.seed = seed;
  std::optional<Trajectory> reference;
  try {
    reference = integrate(config.scheme, problem, driver, config.integration);
    out.reference_bounded = certify(problem, config.scheme, driver, *reference);
  } catch (const IntegrationFailure& failure) {
    out.reference_failed = true;
    out.reference_note = failure.what();
  }

  for (int e = config.min_exponent; e <= config.max_exponent; ++e) {
    ErrorRow row;
    row.step = std::ldexp(problem.horizon, -e);
    const SamplePath coarse = restrict_path(driver, std::size_t{1} << (config.reference_exponent - e));
    if (!reference) {
      row.flagged = true;
      row.error = kNaN;
      row.note = "reference failed: " + out.reference_note;
      out.table.rows.push_back(std::move(row));
      continue;
    }
    try {
      const Trajectory approx = integrate(config.scheme, problem, coarse, config.integration);
      row.error = max_node_error(*reference, approx);
      row.bounded = certify(problem, config.scheme, coarse, approx);
    } catch (const IntegrationFailure& failure) {
      row.flagged = true;
      row.error = kNaN;
      row.note = failure.what();
    }
    out.table.rows.push_back(std::move(row));
  }
  fill_eoc(out.table);
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<SeedStudy>& seeds) {
  std::vector<AggregateRow> out;
  if (seeds.empty()) {
    return out;
  }
  const std::size_t rows = seeds.front().table.rows.size();
  for (std::size_t i = 0; i < rows; ++i) {
    AggregateRow agg;
    agg.step = seeds.front().table.rows[i].step;
    std::vector<double> errors;
    double eoc_sum = 0.0;
    std::size_t eoc_count = 0;
    for (const auto& s : seeds) {
      const auto& row = s.table.rows[i];
      if (!row.flagged) {
        errors.push_back(row.error);
      }
      if (row.eoc) {
        eoc_sum += *row.eoc;
        ++eoc_count;
      }
    }
    agg.samples = errors.size();
    if (!errors.empty()) {
      agg.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
      if (errors.size() > 1) {
        double sq = 0.0;
        for (double e : errors) {
          sq += (e - agg.mean_error) * (e - agg.mean_error);
        }
        agg.std_error = std::sqrt(sq / static_cast<double>(errors.size() - 1));
      }
    } else {
      agg.mean_error = kNaN;
    }
    if (eoc_count > 0) {
      agg.mean_eoc = eoc_sum / static_cast<double>(eoc_count);
    }
    out.push_back(agg);
  }
  return out;
}

}  // namespace

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const Problem problem = config.resolved_problem();

  StudyResult result;
  result.config = config;
  result.seeds.resize(config.seeds.size());

  // Factorize up front so workers only read the cache.
  {
    FbmConfig fbm;
    fbm.hurst = config.hurst;
    fbm.dimension = problem.noise_dim();
    fbm.grid = Grid(problem.horizon, std::size_t{1} << config.reference_exponent);
    for (std::size_t c = 0; c < fbm.dimension; ++c) {
      CholeskyCache::global().factor(fbm.hurst_for(c), fbm.grid);
    }
  }

  std::size_t workers = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t worker) {
    try {
      for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
        result.seeds[i] = study_one_seed(config, problem, config.seeds[i]);
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(work, w);
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  result.aggregate = aggregate(result.seeds);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : result.seeds) {
    if (s.table.average_eoc) {
      sum += *s.table.average_eoc;
      ++count;
    }
  }
  if (count > 0) {
    result.mean_average_eoc = sum / static_cast<double>(count);
  }
  if (!config.output.empty()) {
    write_study(result, config.output);
  }
  return result;
}

void write_error_table_csv(std::ostream& out, const ErrorTable& table) {
  out << "h,error,eoc\n";
  for (const auto& row : table.rows) {
    out << format_number(row.step) << ',' << (row.flagged ? std::string("nan") : format_number(row.error)) << ','
        << (row.eoc ? format_number(*row.eoc) : std::string()) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "h,mean_error,mean_eoc,std_error\n";
  for (const auto& row : rows) {
    out << format_number(row.step) << ',' << (row.samples > 0 ? format_number(row.mean_error) : std::string("nan"))
        << ',' << (row.mean_eoc ? format_number(*row.mean_eoc) : std::string()) << ','
        << format_number(row.std_error) << '\n';
  }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  return out;
}

}  // namespace

void write_study(const StudyResult& result, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& s : result.seeds) {
    const std::string suffix = "seed_" + std::to_string(s.seed) + ".csv";
    auto table = open_output(directory / ("errors_" + suffix));
    write_error_table_csv(table, s.table);
    auto loglog = open_output(directory / ("loglog_" + suffix));
    loglog << "h,error\n";
    for (const auto& row : s.table.rows) {
      if (!row.flagged) {
        loglog << format_number(row.step) << ',' << format_number(row.error) << '\n';
      }
    }
  }
  auto agg = open_output(directory / "aggregate.csv");
  write_aggregate_csv(agg, result.aggregate);
  auto mean = open_output(directory / "loglog_mean.csv");
  mean << "h,mean_error\n";
  for (const auto& row : result.aggregate) {
    if (row.samples > 0) {
      mean << format_number(row.step) << ',' << format_number(row.mean_error) << '\n';
    }
  }
  auto flags = open_output(directory / "flags.csv");
  flags << "seed,h,reason\n";
  for (const auto& s : result.seeds) {
    for (const auto& row : s.table.rows) {
      if (row.flagged) {
        std::string reason = row.note;
        std::replace(reason.begin(), reason.end(), ',', ';');
        flags << s.seed << ',' << format_number(row.step) << ',' << reason << '\n';
      }
    }
  }
}

std::size_t count_sign_flips(const Trajectory& trajectory) {
  std::size_t flips = 0;
  const auto& y = trajectory.states;
  for (std::size_t j = 2; j < y.size(); ++j) {
    const double before = y[j - 1][0] - y[j - 2][0];
    const double after = y[j][0] - y[j - 1][0];
    if (before * after < 0.0) {
      ++flips;
    }
  }
  return flips;
}

namespace {

StabilityTrace trace_of(Trajectory trajectory, double factor) {
  StabilityTrace t;
  t.sign_flips = count_sign_flips(trajectory);
  t.max_amplitude = max_state_norm(trajectory);
  t.contraction_factor = factor;
  t.stable = factor <= 1.0;
  t.trajectory = std::move(trajectory);
  return t;
}

}  // namespace

StabilityReport stability_demo(double h, const StabilityOptions& options) {
  if (!(h > 0.0 && h <= 1.0)) {
    throw std::invalid_argument("step size must lie in (0, 1]");
  }
  const double steps_real = 1.0 / h;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real) {
    throw std::invalid_argument("step size " + std::to_string(h) + " does not divide the unit interval");
  }
  const Problem problem = make_problem(ProblemId::example2);
  const Grid grid(problem.horizon, steps);

  SamplePath driver(grid, PathValues::Zero(static_cast<Eigen::Index>(steps + 1), 1));
  if (options.with_noise) {
    FbmConfig fbm;
    fbm.hurst = {options.hurst};
    const std::size_t reference = std::size_t{1} << options.reference_exponent;
    if (reference >= steps && reference % steps == 0) {
      fbm.grid = Grid(problem.horizon, reference);
      fbm.max_steps = std::max(fbm.max_steps, reference);
      driver = restrict_path(sample_fbm(fbm, options.seed), reference / steps);
    } else {
      fbm.grid = grid;
      fbm.max_steps = std::max(fbm.max_steps, steps);
      driver = sample_fbm(fbm, options.seed);
    }
  }

  StabilityReport report;
  report.step = grid.step();
  report.hurst = options.hurst;
  report.with_noise = options.with_noise;
  const double rate = -problem.drift.one_sided_lipschitz;
  const double explicit_factor = std::abs(1.0 - rate * report.step);
  const double implicit_factor = 1.0 / (1.0 + rate * report.step);
  try {
    report.explicit_run = trace_of(explicit_euler(problem, driver), explicit_factor);
  } catch (const IntegrationFailure& failure) {
    report.explicit_run.contraction_factor = explicit_factor;
    report.explicit_run.stable = false;
    report.explicit_run.failure = failure.what();
  }
  report.implicit_run = trace_of(implicit_euler_additive(problem, driver), implicit_factor);
  return report;
}

Vector SmoothDriver::value(double t) const {
  Vector out(static_cast<Eigen::Index>(dimension()));
  for (std::size_t i = 0; i < dimension(); ++i) {
    out[static_cast<Eigen::Index>(i)] = amplitude[i] * std::sin(frequency[i] * t + phase[i]);
  }
  return out;
}

Vector SmoothDriver::derivative(double t) const {
  Vector out(static_cast<Eigen::Index>(dimension()));
  for (std::size_t i = 0; i < dimension(); ++i) {
    out[static_cast<Eigen::Index>(i)] = amplitude[i] * frequency[i] * std::cos(frequency[i] * t + phase[i]);
  }
  return out;
}

double theoretical_local_rate(Scheme scheme, double p) {
  switch (scheme) {
    case Scheme::semi_implicit_milstein:
    case Scheme::simplified_milstein:
      return std::min(1.0 + 1.0 / p, 3.0 / p);
    case Scheme::semi_implicit_milstein3:
    case Scheme::simplified_milstein3:
      return 1.0 + 1.0 / p;
    default:
      return 2.0 / p;
  }
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) {
    return kNaN;
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

namespace {

// dy/dt = b(y) + sigma(y) x'(t), or b(y) + x'(t) for additive problems.
Vector smooth_rhs(const Problem& problem, const SmoothDriver& driver, double t, const Vector& y) {
  const Vector dx = driver.derivative(t);
  const Vector noise = problem.diffusion ? Vector(problem.diffusion->value(y) * dx) : dx;
  return problem.drift.value(y) + noise;
}

Vector rk4_reference(const Problem& problem, const SmoothDriver& driver, double t0, double h, const Vector& y0,
                     std::size_t substeps) {
  const double dt = h / static_cast<double>(substeps);
  Vector y = y0;
  for (std::size_t n = 0; n < substeps; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    const Vector k1 = smooth_rhs(problem, driver, t, y);
    const Vector k2 = smooth_rhs(problem, driver, t + 0.5 * dt, y + 0.5 * dt * k1);
    const Vector k3 = smooth_rhs(problem, driver, t + 0.5 * dt, y + 0.5 * dt * k2);
    const Vector k4 = smooth_rhs(problem, driver, t + dt, y + dt * k3);
    y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace

LocalErrorProbe local_error_probe(const Problem& problem, Scheme scheme, const SmoothDriver& driver,
                                  const Vector& base_point, const std::vector<double>& steps,
                                  const ProbeOptions& options) {
  problem.validate();
  if (driver.dimension() != problem.noise_dim()) {
    throw std::invalid_argument("probe driver dimension does not match the problem");
  }
  LocalErrorProbe probe;
  probe.scheme = scheme;
  probe.steps = steps;
  probe.theoretical_rate = theoretical_local_rate(scheme, driver.regularity_p);
  const double t0 = options.base_time;
  for (double h : steps) {
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::round(h / options.fine_step)));
    // Piecewise-linear lift of the driver on [t0, t0 + h] at the fine spacing.
    LiftSegment lift = LiftSegment::zero(driver.dimension(), true);
    Vector previous = driver.value(t0);
    for (std::size_t n = 1; n <= substeps; ++n) {
      const Vector current = driver.value(t0 + h * static_cast<double>(n) / static_cast<double>(substeps));
      lift = chen_compose(lift, LiftSegment::linear(current - previous, true));
      previous = current;
    }
    const Vector approx = scheme_step(scheme, problem, base_point, h, lift);
    const Vector exact = rk4_reference(problem, driver, t0, h, base_point, substeps);
    probe.errors.push_back((approx - exact).norm());
  }
  probe.slope = loglog_slope(probe.steps, probe.errors);
  return probe;
}

Problem default_probe_problem() {
  Problem p;
  p.drift = catalogue::zero_drift(1);
  p.diffusion = catalogue::scalar_linear_diffusion();
  p.initial = Vector{{1.0}};
  p.horizon = 1.0;
  return p;
}

SmoothDriver default_probe_driver() {
  SmoothDriver x;
  x.amplitude = {3.0};
  x.frequency = {8.0};
  x.phase = {0.3};
  x.regularity_p = 1.0;
  return x;
}

std::vector<double> default_probe_steps() {
  std::vector<double> out;
  for (int e = 6; e <= 12; ++e) {
    out.push_back(std::ldexp(1.0, -e));
  }
  return out;
}

}  // namespace stiffrough
