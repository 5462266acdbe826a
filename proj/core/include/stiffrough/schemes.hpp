#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stiffrough/fields.hpp"
#include "stiffrough/grid.hpp"
#include "stiffrough/implicit_solver.hpp"
#include "stiffrough/rough_lift.hpp"

namespace stiffrough {

enum class Scheme {
  implicit_euler,           // additive noise, drift-implicit
  explicit_euler,           // forward Euler, additive or multiplicative
  semi_implicit_euler,      // first-order rough Taylor term, drift-implicit
  semi_implicit_milstein,   // + level-2 term
  semi_implicit_milstein3,  // + level-3 term
  simplified_milstein,      // level 2 replaced by dx⊗dx/2
  simplified_milstein3,     // + level 3 replaced by dx⊗dx⊗dx/6
};

const char* to_string(Scheme scheme);
/// Accepts the names produced by to_string; throws std::invalid_argument otherwise.
Scheme parse_scheme(std::string_view name);
const std::vector<Scheme>& all_schemes();
bool is_implicit(Scheme scheme);
/// Schemes defined for dy = b(y) dt + dx without a diffusion field.
bool supports_additive(Scheme scheme);
/// Schemes defined for dy = b(y) dt + sigma(y) dx.
bool supports_multiplicative(Scheme scheme);

/// dy = b(y) dt + sigma(y) dx on [0, horizon], y(0) = initial. Without a diffusion the noise is additive.
struct Problem {
  DriftField drift;
  std::optional<DiffusionField> diffusion;
  Vector initial;
  double horizon = 1.0;

  std::size_t state_dim() const { return drift.dim; }
  std::size_t noise_dim() const { return diffusion ? diffusion->noise_dim : drift.dim; }
  bool additive() const { return !diffusion.has_value(); }
  void validate() const;
};

struct Trajectory {
  Grid grid;
  std::vector<Vector> states;  // one per node, states[0] = initial
};

struct IntegrationOptions {
  SolverOptions solver;
  /// States with a larger Euclidean norm are reported as a blow-up.
  double blowup_threshold = 1e12;
};

/// A failed step: the implicit solve did not converge or the state overflowed.
class IntegrationFailure : public std::runtime_error {
 public:
  enum class Kind { solver, overflow };

  IntegrationFailure(Kind kind, std::size_t step, const std::string& detail);
  Kind kind() const { return kind_; }
  std::size_t step() const { return step_; }

 private:
  Kind kind_;
  std::size_t step_;
};

// Additive noise: y_{j+1} = y_j + h b(y_{j+1}) + x_{j+1} - x_j.
Trajectory implicit_euler_additive(const Problem& problem, const SamplePath& path,
                                   const IntegrationOptions& options = {});

// y_{j+1} = y_j + h b(y_j) + (x_{j+1} - x_j), or sum_i sigma_i(y_j) x^i with a diffusion.
Trajectory explicit_euler(const Problem& problem, const SamplePath& path, const IntegrationOptions& options = {});

// Rough Taylor schemes of order 1, 2, 3 against an arbitrary lift.
Trajectory semi_implicit_euler(const Problem& problem, const RoughLift& lift, const IntegrationOptions& options = {});
Trajectory semi_implicit_milstein(const Problem& problem, const RoughLift& lift,
                                  const IntegrationOptions& options = {});
Trajectory semi_implicit_milstein3(const Problem& problem, const RoughLift& lift,
                                   const IntegrationOptions& options = {});

// The same with the iterated integrals replaced by products of path increments.
Trajectory simplified_milstein(const Problem& problem, const SamplePath& path, const IntegrationOptions& options = {});
Trajectory simplified_milstein3(const Problem& problem, const SamplePath& path,
                                const IntegrationOptions& options = {});

/// Runs any scheme on a path. The lift-based schemes get the piecewise-linear lift of the path.
Trajectory integrate(Scheme scheme, const Problem& problem, const SamplePath& path,
                     const IntegrationOptions& options = {});

/// One step of a scheme from y over an interval of length h carrying the given lift segment.
/// The simplified schemes only look at segment.increment.
Vector scheme_step(Scheme scheme, const Problem& problem, const Vector& y, double h, const LiftSegment& segment,
                   const SolverOptions& solver = {});

/// max over the coarse nodes of |fine(t_n) - coarse(t_n)|; the fine grid must refine the coarse one.
double max_node_error(const Trajectory& fine, const Trajectory& coarse);

/// Bound on max_n |y_n| for the additive implicit Euler scheme when 2 C_b h <= 1:
///   e^{2 C_b^+ T} (|xi| + max_{n>=1} |b(x_n)| T) + max_n |x_n|.
double boundedness_bound(const Problem& problem, const SamplePath& path);

double max_state_norm(const Trajectory& trajectory);

/// CSV with header t,y1..yd and one row per node.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace stiffrough
