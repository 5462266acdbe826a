#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace stiffrough {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Drift b: R^d -> R^d with a declared one-sided Lipschitz constant C_b:
///   <b(u) - b(v), u - v> <= C_b |u - v|^2.
/// C_b is declared by the caller; audit_one_sided_lipschitz can falsify it but not prove it.
struct DriftField {
  std::size_t dim = 1;
  std::function<Vector(const Vector&)> value;
  /// Optional analytic Jacobian; the implicit solver differences b when it is absent.
  std::function<Matrix(const Vector&)> jacobian;
  double one_sided_lipschitz = 0.0;
  /// Optional local Lipschitz modulus as a function of the radius.
  std::function<double(double)> local_lipschitz;

  Vector operator()(const Vector& y) const { return value(y); }
  bool has_jacobian() const { return static_cast<bool>(jacobian); }
};

/// Jacobians of the diffusion vector fields: entry i is the d x d matrix
/// J_i(a, beta) = d sigma_i^a / d y_beta.
using FieldJacobians = std::vector<Matrix>;

/// Hessians: entry [i][a] is the d x d matrix of d^2 sigma_i^a / (d y_beta d y_alpha).
using FieldHessians = std::vector<std::vector<Matrix>>;

/// Diffusion sigma = (sigma_1, ..., sigma_m) as a d x m matrix whose column i is sigma_i,
/// together with its first and second derivatives.
struct DiffusionField {
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  std::function<Matrix(const Vector&)> value;
  std::function<FieldJacobians(const Vector&)> first_derivative;
  std::function<FieldHessians(const Vector&)> second_derivative;

  Matrix operator()(const Vector& y) const { return value(y); }
};

/// Table of d-vectors indexed by (i, j) or (i, j, k) in the noise directions.
class CompositionTable {
 public:
  CompositionTable(std::size_t noise_dim, std::size_t rank, std::size_t state_dim);

  std::size_t noise_dim() const { return m_; }
  std::size_t rank() const { return rank_; }
  Vector& operator()(std::size_t i, std::size_t j) { return entries_[i * m_ + j]; }
  const Vector& operator()(std::size_t i, std::size_t j) const { return entries_[i * m_ + j]; }
  Vector& operator()(std::size_t i, std::size_t j, std::size_t k) { return entries_[(i * m_ + j) * m_ + k]; }
  const Vector& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return entries_[(i * m_ + j) * m_ + k];
  }
  const std::vector<Vector>& entries() const { return entries_; }

 private:
  std::size_t m_;
  std::size_t rank_;
  std::vector<Vector> entries_;
};

/// (i,j) -> sigma_i sigma_j Id(xi) = sum_alpha sigma_i^alpha(xi) d_alpha sigma_j(xi).
CompositionTable first_order_composition(const DiffusionField& sigma, const Vector& xi);

/// (i,j,k) -> sigma_i sigma_j sigma_k Id(xi)
///   = sum_{beta,alpha} sigma_i^beta d_beta sigma_j^alpha d_alpha sigma_k + sigma_i^beta sigma_j^alpha d_beta d_alpha sigma_k.
CompositionTable second_order_composition(const DiffusionField& sigma, const Vector& xi);

/// Largest entrywise gap between the analytic first derivative and central differences of sigma.
double first_derivative_mismatch(const DiffusionField& sigma, const Vector& xi, double eps = 1e-4);
/// Same for the second derivative against central differences of the analytic first derivative.
double second_derivative_mismatch(const DiffusionField& sigma, const Vector& xi, double eps = 1e-4);

/// Central-difference Jacobian of a drift, step scaled by the state magnitude.
Matrix finite_difference_jacobian(const DriftField& drift, const Vector& y, double rel_step = 1e-7);

struct LipschitzAudit {
  double max_ratio = -std::numeric_limits<double>::infinity();  // largest <b(u)-b(v),u-v>/|u-v|^2 seen
  std::size_t samples = 0;
  bool consistent = true;  // max_ratio <= declared C_b (up to rounding)
};

/// Random spot check of the one-sided Lipschitz condition on pairs drawn from the ball of given radius.
LipschitzAudit audit_one_sided_lipschitz(const DriftField& drift, double radius, std::size_t samples,
                                         std::uint64_t seed);

/// Raised when a field is evaluated where it has no derivative.
class FieldDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace catalogue {

/// b(y) = y - y^3, C_b = 1.
DriftField cubic_drift();
/// b(y) = -rate * y, C_b = -rate.
DriftField linear_drift(double rate);
/// b(y) = y - |y|^2 y in R^d, C_b = 1.
DriftField cubic_vector_drift(std::size_t dim);
/// b = 0, C_b = 0.
DriftField zero_drift(std::size_t dim);

/// sigma_1(y) = (cos y_2, -0.9 - 10 cos y_1), sigma_2(y) = (cos |y|, 0).
/// Derivatives of |y| are only available for |y| > 1e-12.
DiffusionField two_dimensional_example();
/// Column i of the identity: the additive-noise case.
DiffusionField identity_diffusion(std::size_t dim);
/// Constant diffusion matrix.
DiffusionField constant_diffusion(const Matrix& value);
/// Scalar sigma(y) = y.
DiffusionField scalar_linear_diffusion();

}  // namespace catalogue

}  // namespace stiffrough
