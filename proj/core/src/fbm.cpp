#include "stiffrough/fbm.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <random>
#include <string>

namespace stiffrough {

double FbmConfig::hurst_for(std::size_t component) const {
  if (hurst.size() == 1) {
    return hurst.front();
  }
  return hurst.at(component);
}

void FbmConfig::validate() const {
  if (dimension < 1) {
    throw std::invalid_argument("fBm needs at least one component");
  }
  if (hurst.empty() || (hurst.size() != 1 && hurst.size() != dimension)) {
    throw std::invalid_argument("need one Hurst parameter or one per component (" + std::to_string(dimension) +
                                "), got " + std::to_string(hurst.size()));
  }
  for (double h : hurst) {
    if (!(h > 0.0 && h < 1.0)) {
      throw std::invalid_argument("Hurst parameter must lie in (0, 1), got " + std::to_string(h));
    }
  }
  if (grid.steps() > max_steps) {
    throw std::invalid_argument("fBm grid has " + std::to_string(grid.steps()) + " steps, above the configured cap " +
                                std::to_string(max_steps));
  }
}

NotPositiveDefinite::NotPositiveDefinite(std::size_t index, double pivot)
    : std::runtime_error("matrix is not positive definite: pivot " + std::to_string(index) + " is " +
                         std::to_string(pivot)),
      index_(index),
      pivot_(pivot) {}

DenseMatrix covariance_matrix(double hurst, const Grid& grid) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw std::invalid_argument("Hurst parameter must lie in (0, 1), got " + std::to_string(hurst));
  }
  const auto n = static_cast<Eigen::Index>(grid.steps());
  const double two_h = 2.0 * hurst;
  std::vector<double> power(static_cast<std::size_t>(n) + 1);
  // |t_i - t_j| = |i - j| * h on a uniform grid, so the lag powers share the node powers.
  for (Eigen::Index i = 0; i <= n; ++i) {
    power[static_cast<std::size_t>(i)] = std::pow(grid.node(static_cast<std::size_t>(i)), two_h);
  }
  DenseMatrix cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto lag = static_cast<std::size_t>(i - j);
      const double value = 0.5 * (power[static_cast<std::size_t>(i + 1)] + power[static_cast<std::size_t>(j + 1)] -
                                  power[lag]);
      cov(i, j) = value;
      cov(j, i) = value;
    }
  }
  return cov;
}

DenseMatrix cholesky(const DenseMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("cholesky needs a square matrix");
  }
  const Eigen::Index n = matrix.rows();
  DenseMatrix lower = DenseMatrix::Zero(n, n);
  // Row-oriented Cholesky-Crout: every inner product runs over contiguous row prefixes.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dot = lower.row(i).head(j).dot(lower.row(j).head(j));
      lower(i, j) = (matrix(i, j) - dot) / lower(j, j);
    }
    const double pivot = matrix(i, i) - lower.row(i).head(i).squaredNorm();
    if (!(pivot > 0.0)) {
      throw NotPositiveDefinite(static_cast<std::size_t>(i), pivot);
    }
    lower(i, i) = std::sqrt(pivot);
  }
  return lower;
}

std::shared_ptr<const DenseMatrix> CholeskyCache::factor(double hurst, const Grid& grid) {
  const Key key{hurst, grid.horizon(), grid.steps()};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      return it->second;
    }
  }
  std::unique_lock lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) {
    return it->second;
  }
  auto computed = std::make_shared<const DenseMatrix>(cholesky(covariance_matrix(hurst, grid)));
  entries_.emplace(key, computed);
  return computed;
}

std::size_t CholeskyCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void CholeskyCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

CholeskyCache& CholeskyCache::global() {
  static CholeskyCache cache;
  return cache;
}

std::vector<double> standard_normals(std::uint64_t seed, std::size_t component, std::size_t count) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(component), static_cast<std::uint32_t>(component >> 32)};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(count);
  for (double& v : out) {
    v = normal(engine);
  }
  return out;
}

SamplePath sample_fbm(const FbmConfig& config, std::uint64_t seed, CholeskyCache& cache) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(config.grid.steps());
  const auto m = static_cast<Eigen::Index>(config.dimension);
  PathValues values = PathValues::Zero(n + 1, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto factor = cache.factor(config.hurst_for(static_cast<std::size_t>(c)), config.grid);
    const std::vector<double> normals = standard_normals(seed, static_cast<std::size_t>(c), static_cast<std::size_t>(n));
    const Eigen::Map<const Eigen::VectorXd> v(normals.data(), n);
    const Eigen::VectorXd sample = factor->triangularView<Eigen::Lower>() * v;
    values.col(c).tail(n) = sample;
  }
  return SamplePath(config.grid, std::move(values));
}

SamplePath sample_fbm(const FbmConfig& config, std::uint64_t seed) {
  return sample_fbm(config, seed, CholeskyCache::global());
}

SamplePath sample_fbm(const FbmConfig& config) { return sample_fbm(config, config.seed); }

SamplePath restrict_path(const SamplePath& path, std::size_t factor) {
  const std::size_t n = path.grid.steps();
  if (factor == 0 || n % factor != 0) {
    throw std::invalid_argument("restriction factor " + std::to_string(factor) + " does not divide " +
                                std::to_string(n) + " steps");
  }
  const std::size_t coarse = n / factor;
  PathValues values(static_cast<Eigen::Index>(coarse + 1), path.values.cols());
  for (std::size_t j = 0; j <= coarse; ++j) {
    values.row(static_cast<Eigen::Index>(j)) = path.values.row(static_cast<Eigen::Index>(j * factor));
  }
  return SamplePath(Grid(path.grid.horizon(), coarse), std::move(values));
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
  out << "t";
  for (Eigen::Index c = 0; c < path.values.cols(); ++c) {
    out << ",x" << (c + 1);
  }
  out << '\n';
  char buf[64];
  for (std::size_t j = 0; j < path.grid.num_nodes(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", path.grid.node(j));
    out << buf;
    for (Eigen::Index c = 0; c < path.values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", path.values(static_cast<Eigen::Index>(j), c));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace stiffrough
