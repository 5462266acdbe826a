#include "stiffrough/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stiffrough {

Grid::Grid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("grid horizon must be positive and finite, got " + std::to_string(horizon));
  }
  if (steps == 0) {
    throw std::invalid_argument("grid needs at least one step");
  }
}

double Grid::node(std::size_t j) const {
  if (j >= steps_) {
    return horizon_;
  }
  return static_cast<double>(j) * horizon_ / static_cast<double>(steps_);
}

std::vector<double> Grid::nodes() const {
  std::vector<double> out(num_nodes());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = node(j);
  }
  return out;
}

Grid make_grid(double horizon, long long steps) {
  if (steps < 1) {
    throw std::invalid_argument("grid needs at least one step, got " + std::to_string(steps));
  }
  return Grid(horizon, static_cast<std::size_t>(steps));
}

SamplePath::SamplePath(Grid g, PathValues v) : grid(g), values(std::move(v)) {
  if (static_cast<std::size_t>(values.rows()) != grid.num_nodes()) {
    throw std::invalid_argument("path has " + std::to_string(values.rows()) + " rows but grid has " +
                                std::to_string(grid.num_nodes()) + " nodes");
  }
  if (values.cols() < 1) {
    throw std::invalid_argument("path needs at least one component");
  }
}

SamplePath make_scalar_path(const Grid& grid, const std::vector<double>& values) {
  PathValues v(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t j = 0; j < values.size(); ++j) {
    v(static_cast<Eigen::Index>(j), 0) = values[j];
  }
  return SamplePath(grid, std::move(v));
}

namespace {

double distance(const SamplePath& path, std::size_t s, std::size_t t) {
  return (path.values.row(static_cast<Eigen::Index>(t)) - path.values.row(static_cast<Eigen::Index>(s))).norm();
}

}  // namespace

double holder_norm(const SamplePath& path, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("Hoelder exponent must lie in (0, 1], got " + std::to_string(alpha));
  }
  const std::size_t n = path.grid.num_nodes();
  double best = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      const double gap = path.grid.node(t) - path.grid.node(s);
      best = std::max(best, distance(path, s, t) / std::pow(gap, alpha));
    }
  }
  return best;
}

double p_variation_norm(const SamplePath& path, double p, std::size_t first, std::size_t last) {
  if (!(p >= 1.0)) {
    throw std::invalid_argument("p-variation needs p >= 1, got " + std::to_string(p));
  }
  if (first > last || last >= path.grid.num_nodes()) {
    throw std::invalid_argument("invalid node range for p-variation");
  }
  // best[k]: largest sum of |increment|^p over chains in [first, first + k] that end at first + k.
  std::vector<double> best(last - first + 1, 0.0);
  double overall = 0.0;
  for (std::size_t t = first + 1; t <= last; ++t) {
    double value = 0.0;
    for (std::size_t s = first; s < t; ++s) {
      value = std::max(value, best[s - first] + std::pow(distance(path, s, t), p));
    }
    best[t - first] = value;
    overall = std::max(overall, value);
  }
  return std::pow(overall, 1.0 / p);
}

double p_variation_norm(const SamplePath& path, double p) {
  return p_variation_norm(path, p, 0, path.grid.steps());
}

double sup_norm(const SamplePath& path) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < path.values.rows(); ++j) {
    best = std::max(best, path.values.row(j).norm());
  }
  return best;
}

double control_superadditivity_violation(const SamplePath& path, double p) {
  const std::size_t n = path.grid.num_nodes();
  std::vector<double> omega(n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s; t < n; ++t) {
      omega[s * n + t] = std::pow(p_variation_norm(path, p, s, t), p);
    }
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s; t < n; ++t) {
      for (std::size_t u = t; u < n; ++u) {
        worst = std::max(worst, omega[s * n + t] + omega[t * n + u] - omega[s * n + u]);
      }
    }
  }
  return worst;
}

}  // namespace stiffrough
