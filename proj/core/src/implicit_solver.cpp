#include "stiffrough/implicit_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stiffrough {

const char* to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::newton:
      return "newton";
    case SolveMethod::contraction:
      return "contraction";
  }
  return "unknown";
}

namespace {

struct Evaluation {
  Vector drift;
  double residual;
  double floor;  // rounding floor of the residual at this point
};

Evaluation evaluate(const DriftField& drift, double h, const Vector& r, const Vector& y) {
  Evaluation e;
  e.drift = drift.value(y);
  const Vector g = y - h * e.drift - r;
  e.residual = g.allFinite() ? g.norm() : std::numeric_limits<double>::infinity();
  constexpr double kUlps = 16.0;
  e.floor = kUlps * std::numeric_limits<double>::epsilon() * (y.norm() + r.norm() + std::abs(h) * e.drift.norm());
  return e;
}

}  // namespace

SolveReport solve_step(const DriftField& drift, double h, const Vector& r, const SolverOptions& options) {
  if (!(drift.one_sided_lipschitz * h < 1.0)) {
    throw std::invalid_argument("implicit step needs C_b h < 1, got C_b h = " +
                                std::to_string(drift.one_sided_lipschitz * h));
  }
  if (!(options.tolerance > 0.0)) {
    throw std::invalid_argument("solver tolerance must be positive");
  }
  if (static_cast<std::size_t>(r.size()) != drift.dim) {
    throw std::invalid_argument("right-hand side has dimension " + std::to_string(r.size()) + ", drift has " +
                                std::to_string(drift.dim));
  }

  const auto d = r.size();
  const Matrix identity = Matrix::Identity(d, d);
  SolveReport report;
  report.solution = r;
  Evaluation current = evaluate(drift, h, r, r);
  const auto converged = [&](const Evaluation& e) { return e.residual <= std::max(options.tolerance, e.floor); };

  Vector best = r;
  double best_residual = current.residual;
  int stalled = 0;
  int iterations = 0;
  // At least one Newton step unless r is an exact root.
  const auto keep_going = [&] { return iterations == 0 ? current.residual > 0.0 : !converged(current); };
  while (keep_going() && iterations < options.max_newton_iterations && stalled < options.stall_limit) {
    const Matrix jb = drift.has_jacobian() ? drift.jacobian(report.solution)
                                           : finite_difference_jacobian(drift, report.solution);
    const Vector g = report.solution - h * current.drift - r;
    const Vector step = (identity - h * jb).partialPivLu().solve(g);
    ++iterations;
    const Vector next = report.solution - step;
    if (!next.allFinite()) {
      stalled = options.stall_limit;
      break;
    }
    report.solution = next;
    current = evaluate(drift, h, r, report.solution);
    if (current.residual < best_residual) {
      best = report.solution;
      best_residual = current.residual;
      stalled = 0;
    } else {
      ++stalled;
    }
  }

  if (!converged(current)) {
    report.solution = best;
    current = evaluate(drift, h, r, best);
  }
  if (!converged(current)) {
    report.method_used = SolveMethod::contraction;
    int fallback = 0;
    while (!converged(current) && fallback < options.max_fallback_iterations) {
      report.solution = 0.5 * (report.solution + r + h * current.drift);
      current = evaluate(drift, h, r, report.solution);
      ++fallback;
    }
    iterations += fallback;
  }

  report.iterations = iterations;
  report.residual = current.residual;
  if (!converged(current)) {
    throw SolverFailure("implicit step did not converge: residual " + std::to_string(current.residual) + " after " +
                            std::to_string(iterations) + " iterations",
                        current.residual, iterations);
  }
  return report;
}

}  // namespace stiffrough
