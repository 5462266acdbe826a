#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace stiffrough {

/// Row-major node-by-component storage: row j holds the value at t_j.
using PathValues = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform partition t_j = j*T/N of [0, T].
class Grid {
 public:
  Grid(double horizon, std::size_t steps);

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  std::size_t num_nodes() const { return steps_ + 1; }
  double step() const { return horizon_ / static_cast<double>(steps_); }

  /// t_N is returned as exactly T.
  double node(std::size_t j) const;
  std::vector<double> nodes() const;

  bool operator==(const Grid& other) const = default;

 private:
  double horizon_;
  std::size_t steps_;
};

/// Throws std::invalid_argument unless horizon > 0 and steps >= 1.
Grid make_grid(double horizon, long long steps);

/// An m-dimensional discrete path sampled at every node of a grid.
struct SamplePath {
  Grid grid;
  PathValues values;  // num_nodes x m

  SamplePath(Grid g, PathValues v);

  std::size_t dimension() const { return static_cast<std::size_t>(values.cols()); }
  Eigen::VectorXd at(std::size_t j) const { return values.row(static_cast<Eigen::Index>(j)).transpose(); }
  Eigen::VectorXd increment(std::size_t s, std::size_t t) const { return at(t) - at(s); }
};

/// Scalar path convenience constructor.
SamplePath make_scalar_path(const Grid& grid, const std::vector<double>& values);

/// Discrete alpha-Hoelder seminorm: max over node pairs s < t of |x_t - x_s| / (t - s)^alpha.
double holder_norm(const SamplePath& path, double alpha);

/// Exact discrete p-variation, sup over node subsequences of (sum |increment|^p)^(1/p).
/// O(N^2) dynamic programming over the best chain ending at each node.
double p_variation_norm(const SamplePath& path, double p);

/// p-variation restricted to the nodes first..last (inclusive).
double p_variation_norm(const SamplePath& path, double p, std::size_t first, std::size_t last);

/// max_j |x_j|.
double sup_norm(const SamplePath& path);

/// Largest violation of omega(s,t) + omega(t,u) <= omega(s,u) over all node triples,
/// with omega(s,t) the p-th power of the p-variation on [s,t]. Non-positive means superadditive.
double control_superadditivity_violation(const SamplePath& path, double p);

}  // namespace stiffrough
