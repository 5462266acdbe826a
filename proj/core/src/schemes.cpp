#include "stiffrough/schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace stiffrough {

namespace {

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr std::array<SchemeName, 7> kSchemeNames{{
    {Scheme::implicit_euler, "implicit-euler"},
    {Scheme::explicit_euler, "explicit-euler"},
    {Scheme::semi_implicit_euler, "semi-implicit-euler"},
    {Scheme::semi_implicit_milstein, "milstein"},
    {Scheme::semi_implicit_milstein3, "milstein3"},
    {Scheme::simplified_milstein, "simplified-milstein"},
    {Scheme::simplified_milstein3, "simplified-milstein3"},
}};

}  // namespace

const char* to_string(Scheme scheme) {
  for (const auto& entry : kSchemeNames) {
    if (entry.scheme == scheme) {
      return entry.name;
    }
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (const auto& entry : kSchemeNames) {
    if (name == entry.name) {
      return entry.scheme;
    }
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> schemes = [] {
    std::vector<Scheme> out;
    for (const auto& entry : kSchemeNames) {
      out.push_back(entry.scheme);
    }
    return out;
  }();
  return schemes;
}

bool is_implicit(Scheme scheme) { return scheme != Scheme::explicit_euler; }

bool supports_additive(Scheme scheme) {
  return scheme == Scheme::implicit_euler || scheme == Scheme::explicit_euler;
}

bool supports_multiplicative(Scheme scheme) { return scheme != Scheme::implicit_euler; }

void Problem::validate() const {
  if (!drift.value) {
    throw std::invalid_argument("problem has no drift");
  }
  if (static_cast<std::size_t>(initial.size()) != drift.dim) {
    throw std::invalid_argument("initial value has dimension " + std::to_string(initial.size()) +
                                " but the drift acts on R^" + std::to_string(drift.dim));
  }
  if (diffusion) {
    if (diffusion->state_dim != drift.dim) {
      throw std::invalid_argument("diffusion and drift disagree on the state dimension");
    }
    if (!diffusion->value) {
      throw std::invalid_argument("diffusion field has no evaluator");
    }
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("problem horizon must be positive");
  }
}

IntegrationFailure::IntegrationFailure(Kind kind, std::size_t step, const std::string& detail)
    : std::runtime_error((kind == Kind::solver ? "implicit solve failed at step " : "overflow at step ") +
                         std::to_string(step) + ": " + detail),
      kind_(kind),
      step_(step) {}

namespace {

enum class Correction { none, level2, level3 };

void check_path(const Problem& problem, const Grid& grid, std::size_t noise_dim) {
  problem.validate();
  if (noise_dim != problem.noise_dim()) {
    throw std::invalid_argument("driver has " + std::to_string(noise_dim) + " components, problem expects " +
                                std::to_string(problem.noise_dim()));
  }
  if (std::abs(grid.horizon() - problem.horizon) > 1e-12 * problem.horizon) {
    throw std::invalid_argument("driver horizon does not match the problem horizon");
  }
}

void require_well_posed(const Problem& problem, double h) {
  if (!(problem.drift.one_sided_lipschitz * h < 1.0)) {
    throw std::invalid_argument("drift-implicit scheme needs C_b h < 1, got C_b h = " +
                                std::to_string(problem.drift.one_sided_lipschitz * h));
  }
}

const DiffusionField& require_diffusion(const Problem& problem, Scheme scheme) {
  if (!problem.diffusion) {
    throw std::invalid_argument(std::string(to_string(scheme)) + " needs a diffusion field");
  }
  return *problem.diffusion;
}

// y + sum_i sigma_i(y) x^i + sum_{ij} sigma_i sigma_j Id(y) X2_ij + sum_{ijk} sigma_i sigma_j sigma_k Id(y) X3_ijk
Vector rough_taylor_increment(const DiffusionField& sigma, const Vector& y, const LiftSegment& seg,
                              Correction correction) {
  Vector r = y + sigma.value(y) * seg.increment;
  const std::size_t m = sigma.noise_dim;
  if (correction == Correction::none) {
    return r;
  }
  const CompositionTable first = first_order_composition(sigma, y);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      r += first(i, j) * seg.level2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  if (correction == Correction::level3) {
    const CompositionTable second = second_order_composition(sigma, y);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
          r += second(i, j, k) * seg.level3(i, j, k);
        }
      }
    }
  }
  return r;
}

// The same with X2 = dx⊗dx/2 and X3 = dx⊗dx⊗dx/6 written out.
Vector simplified_increment(const DiffusionField& sigma, const Vector& y, const Vector& dx, Correction correction) {
  Vector r = y + sigma.value(y) * dx;
  const std::size_t m = sigma.noise_dim;
  const auto at = [&dx](std::size_t i) { return dx[static_cast<Eigen::Index>(i)]; };
  const CompositionTable first = first_order_composition(sigma, y);
  Vector level2 = Vector::Zero(y.size());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      level2 += first(i, j) * (at(i) * at(j));
    }
  }
  r += 0.5 * level2;
  if (correction == Correction::level3) {
    const CompositionTable second = second_order_composition(sigma, y);
    Vector level3 = Vector::Zero(y.size());
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
          level3 += second(i, j, k) * (at(i) * at(j) * at(k));
        }
      }
    }
    r += level3 / 6.0;
  }
  return r;
}

Vector implicit_solve(const Problem& problem, double h, const Vector& r, const SolverOptions& solver,
                      std::size_t step) {
  try {
    return solve_step(problem.drift, h, r, solver).solution;
  } catch (const SolverFailure& failure) {
    throw IntegrationFailure(IntegrationFailure::Kind::solver, step, failure.what());
  }
}

void check_growth(const Vector& y, std::size_t step, const IntegrationOptions& options) {
  if (!y.allFinite()) {
    throw IntegrationFailure(IntegrationFailure::Kind::overflow, step, "state is not finite");
  }
  if (y.norm() > options.blowup_threshold) {
    throw IntegrationFailure(IntegrationFailure::Kind::overflow, step,
                             "|y| = " + std::to_string(y.norm()) + " exceeds " +
                                 std::to_string(options.blowup_threshold));
  }
}

template <typename StepFn>
Trajectory run(const Problem& problem, const Grid& grid, const IntegrationOptions& options, StepFn&& step) {
  Trajectory traj{grid, {}};
  traj.states.reserve(grid.num_nodes());
  traj.states.push_back(problem.initial);
  for (std::size_t r = 0; r < grid.steps(); ++r) {
    Vector next = step(traj.states.back(), r);
    check_growth(next, r + 1, options);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Trajectory run_lift_scheme(const Problem& problem, const RoughLift& lift, const IntegrationOptions& options,
                           Scheme scheme, Correction correction) {
  check_path(problem, lift.grid(), lift.dimension());
  const DiffusionField& sigma = require_diffusion(problem, scheme);
  if (correction == Correction::level3 && !lift.has_level3()) {
    throw std::invalid_argument(std::string(to_string(scheme)) + " needs a lift with level-3 tensors");
  }
  const double h = lift.grid().step();
  require_well_posed(problem, h);
  return run(problem, lift.grid(), options, [&](const Vector& y, std::size_t r) {
    const Vector rhs = rough_taylor_increment(sigma, y, lift.segment(r), correction);
    return implicit_solve(problem, h, rhs, options.solver, r + 1);
  });
}

Trajectory run_simplified(const Problem& problem, const SamplePath& path, const IntegrationOptions& options,
                          Scheme scheme, Correction correction) {
  check_path(problem, path.grid, path.dimension());
  const DiffusionField& sigma = require_diffusion(problem, scheme);
  const double h = path.grid.step();
  require_well_posed(problem, h);
  return run(problem, path.grid, options, [&](const Vector& y, std::size_t r) {
    const Vector rhs = simplified_increment(sigma, y, path.increment(r, r + 1), correction);
    return implicit_solve(problem, h, rhs, options.solver, r + 1);
  });
}

}  // namespace

Trajectory implicit_euler_additive(const Problem& problem, const SamplePath& path, const IntegrationOptions& options) {
  check_path(problem, path.grid, path.dimension());
  if (!problem.additive()) {
    throw std::invalid_argument("implicit-euler is the additive-noise scheme; use semi-implicit-euler");
  }
  const double h = path.grid.step();
  require_well_posed(problem, h);
  return run(problem, path.grid, options, [&](const Vector& y, std::size_t r) {
    const Vector rhs = y + path.increment(r, r + 1);
    return implicit_solve(problem, h, rhs, options.solver, r + 1);
  });
}

Trajectory explicit_euler(const Problem& problem, const SamplePath& path, const IntegrationOptions& options) {
  check_path(problem, path.grid, path.dimension());
  const double h = path.grid.step();
  return run(problem, path.grid, options, [&](const Vector& y, std::size_t r) -> Vector {
    const Vector dx = path.increment(r, r + 1);
    const Vector noise = problem.diffusion ? Vector(problem.diffusion->value(y) * dx) : dx;
    return y + h * problem.drift.value(y) + noise;
  });
}

Trajectory semi_implicit_euler(const Problem& problem, const RoughLift& lift, const IntegrationOptions& options) {
  return run_lift_scheme(problem, lift, options, Scheme::semi_implicit_euler, Correction::none);
}

Trajectory semi_implicit_milstein(const Problem& problem, const RoughLift& lift, const IntegrationOptions& options) {
  return run_lift_scheme(problem, lift, options, Scheme::semi_implicit_milstein, Correction::level2);
}

Trajectory semi_implicit_milstein3(const Problem& problem, const RoughLift& lift, const IntegrationOptions& options) {
  return run_lift_scheme(problem, lift, options, Scheme::semi_implicit_milstein3, Correction::level3);
}

Trajectory simplified_milstein(const Problem& problem, const SamplePath& path, const IntegrationOptions& options) {
  return run_simplified(problem, path, options, Scheme::simplified_milstein, Correction::level2);
}

Trajectory simplified_milstein3(const Problem& problem, const SamplePath& path, const IntegrationOptions& options) {
  return run_simplified(problem, path, options, Scheme::simplified_milstein3, Correction::level3);
}

Trajectory integrate(Scheme scheme, const Problem& problem, const SamplePath& path, const IntegrationOptions& options) {
  switch (scheme) {
    case Scheme::implicit_euler:
      return implicit_euler_additive(problem, path, options);
    case Scheme::explicit_euler:
      return explicit_euler(problem, path, options);
    case Scheme::semi_implicit_euler:
      return semi_implicit_euler(problem, piecewise_linear_lift(path, false), options);
    case Scheme::semi_implicit_milstein:
      return semi_implicit_milstein(problem, piecewise_linear_lift(path, false), options);
    case Scheme::semi_implicit_milstein3:
      return semi_implicit_milstein3(problem, piecewise_linear_lift(path, true), options);
    case Scheme::simplified_milstein:
      return simplified_milstein(problem, path, options);
    case Scheme::simplified_milstein3:
      return simplified_milstein3(problem, path, options);
  }
  throw std::invalid_argument("unknown scheme");
}

Vector scheme_step(Scheme scheme, const Problem& problem, const Vector& y, double h, const LiftSegment& segment,
                   const SolverOptions& solver) {
  problem.validate();
  if (segment.dimension() != problem.noise_dim()) {
    throw std::invalid_argument("lift segment dimension does not match the problem's noise");
  }
  if (is_implicit(scheme)) {
    require_well_posed(problem, h);
  }
  const auto solve = [&](const Vector& rhs) { return solve_step(problem.drift, h, rhs, solver).solution; };
  switch (scheme) {
    case Scheme::implicit_euler:
      if (!problem.additive()) {
        throw std::invalid_argument("implicit-euler is the additive-noise scheme");
      }
      return solve(y + segment.increment);
    case Scheme::explicit_euler: {
      const Vector noise =
          problem.diffusion ? Vector(problem.diffusion->value(y) * segment.increment) : segment.increment;
      return y + h * problem.drift.value(y) + noise;
    }
    case Scheme::semi_implicit_euler:
      return solve(rough_taylor_increment(require_diffusion(problem, scheme), y, segment, Correction::none));
    case Scheme::semi_implicit_milstein:
      return solve(rough_taylor_increment(require_diffusion(problem, scheme), y, segment, Correction::level2));
    case Scheme::semi_implicit_milstein3:
      if (!segment.has_level3) {
        throw std::invalid_argument("milstein3 needs a level-3 segment");
      }
      return solve(rough_taylor_increment(require_diffusion(problem, scheme), y, segment, Correction::level3));
    case Scheme::simplified_milstein:
      return solve(
          simplified_increment(require_diffusion(problem, scheme), y, segment.increment, Correction::level2));
    case Scheme::simplified_milstein3:
      return solve(
          simplified_increment(require_diffusion(problem, scheme), y, segment.increment, Correction::level3));
  }
  throw std::invalid_argument("unknown scheme");
}

double max_node_error(const Trajectory& fine, const Trajectory& coarse) {
  const std::size_t nf = fine.grid.steps();
  const std::size_t nc = coarse.grid.steps();
  if (nc == 0 || nf % nc != 0 || std::abs(fine.grid.horizon() - coarse.grid.horizon()) > 1e-12) {
    throw std::invalid_argument("reference grid does not refine the coarse grid");
  }
  const std::size_t factor = nf / nc;
  double worst = 0.0;
  for (std::size_t n = 0; n <= nc; ++n) {
    worst = std::max(worst, (fine.states[n * factor] - coarse.states[n]).norm());
  }
  return worst;
}

double boundedness_bound(const Problem& problem, const SamplePath& path) {
  const double horizon = path.grid.horizon();
  double max_drift = 0.0;
  double max_path = 0.0;
  for (std::size_t n = 0; n < path.grid.num_nodes(); ++n) {
    const Vector x = path.at(n);
    max_path = std::max(max_path, x.norm());
    if (n >= 1) {
      max_drift = std::max(max_drift, problem.drift.value(x).norm());
    }
  }
  const double growth = std::max(problem.drift.one_sided_lipschitz, 0.0);
  return std::exp(2.0 * growth * horizon) * (problem.initial.norm() + max_drift * horizon) + max_path;
}

double max_state_norm(const Trajectory& trajectory) {
  double worst = 0.0;
  for (const auto& y : trajectory.states) {
    worst = std::max(worst, y.norm());
  }
  return worst;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const std::size_t d = trajectory.states.empty() ? 0 : static_cast<std::size_t>(trajectory.states.front().size());
  out << "t";
  for (std::size_t c = 0; c < d; ++c) {
    out << ",y" << (c + 1);
  }
  out << '\n';
  char buf[64];
  for (std::size_t j = 0; j < trajectory.states.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", trajectory.grid.node(j));
    out << buf;
    for (std::size_t c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", trajectory.states[j][static_cast<Eigen::Index>(c)]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace stiffrough
