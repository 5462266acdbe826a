#pragma once

#include <stdexcept>
#include <string>

#include "stiffrough/fields.hpp"

namespace stiffrough {

enum class SolveMethod { newton, contraction };

const char* to_string(SolveMethod method);

struct SolveReport {
  Vector solution;
  int iterations = 0;  // Newton plus fallback iterations
  double residual = 0.0;
  SolveMethod method_used = SolveMethod::newton;
};

struct SolverOptions {
  double tolerance = 1e-12;
  int max_newton_iterations = 50;
  int max_fallback_iterations = 1000;
  /// Newton hands over to the damped fixed-point iteration after this many
  /// consecutive iterations without a residual decrease.
  int stall_limit = 5;
};

/// Raised when neither Newton nor the fallback reaches the tolerance.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Solves y - h b(y) = r for the unique y, which exists when C_b h < 1.
///
/// Newton starts from r and takes at least one step unless r is an exact root. It uses the
/// analytic drift Jacobian when supplied and central differences otherwise. If the residual stalls, a damped Picard iteration
/// y <- (y + r + h b(y)) / 2 takes over. The residual |y - r - h b(y)| of the returned
/// solution is re-evaluated before returning. The tolerance is absolute, floored at a
/// few ulps of the magnitudes involved so it stays reachable for large states.
///
/// Throws std::invalid_argument when C_b h >= 1 or tol <= 0, SolverFailure on budget exhaustion.
SolveReport solve_step(const DriftField& drift, double h, const Vector& r, const SolverOptions& options = {});

}  // namespace stiffrough
