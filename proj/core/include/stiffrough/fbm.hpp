#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <shared_mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "stiffrough/grid.hpp"

namespace stiffrough {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Default cap on the reference grid size; the dense covariance is N x N.
inline constexpr std::size_t kDefaultMaxFbmSteps = std::size_t{1} << 12;

/// Multidimensional fractional Brownian motion with independent components.
struct FbmConfig {
  std::vector<double> hurst;  // one entry per component, or a single entry shared by all
  std::size_t dimension = 1;
  Grid grid{1.0, 1};
  std::uint64_t seed = 0;
  std::size_t max_steps = kDefaultMaxFbmSteps;

  double hurst_for(std::size_t component) const;
  void validate() const;
};

/// Raised when a pivot of the Cholesky factorization is not strictly positive.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(std::size_t index, double pivot);
  std::size_t index() const { return index_; }
  double pivot() const { return pivot_; }

 private:
  std::size_t index_;
  double pivot_;
};

/// Covariance of B^H at the strictly positive nodes t_1..t_N:
/// C(i,j) = (t_i^{2H} + t_j^{2H} - |t_i - t_j|^{2H}) / 2.
DenseMatrix covariance_matrix(double hurst, const Grid& grid);

/// Lower-triangular L with L L^T = M. Only the lower triangle of M is read.
DenseMatrix cholesky(const DenseMatrix& matrix);

/// Thread-safe cache of Cholesky factors keyed by (H, T, N).
class CholeskyCache {
 public:
  std::shared_ptr<const DenseMatrix> factor(double hurst, const Grid& grid);
  std::size_t size() const;
  void clear();

  static CholeskyCache& global();

 private:
  using Key = std::tuple<double, double, std::size_t>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const DenseMatrix>> entries_;
};

/// Standard normal variates for one component of one seed. The stream depends on
/// (seed, component) only.
std::vector<double> standard_normals(std::uint64_t seed, std::size_t component, std::size_t count);

/// Samples one path: component i is L_i V_i at t_1..t_N and 0 at t_0.
SamplePath sample_fbm(const FbmConfig& config, std::uint64_t seed);
SamplePath sample_fbm(const FbmConfig& config);

/// Same, with the factors taken from the given cache.
SamplePath sample_fbm(const FbmConfig& config, std::uint64_t seed, CholeskyCache& cache);

/// Keeps every factor-th node, endpoints included.
SamplePath restrict_path(const SamplePath& path, std::size_t factor);

/// CSV with header t,x1..xm and one row per node.
void write_path_csv(std::ostream& out, const SamplePath& path);

}  // namespace stiffrough
