#include "stiffrough/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace stiffrough {

CompositionTable::CompositionTable(std::size_t noise_dim, std::size_t rank, std::size_t state_dim)
    : m_(noise_dim), rank_(rank) {
  std::size_t count = 1;
  for (std::size_t r = 0; r < rank; ++r) {
    count *= noise_dim;
  }
  entries_.assign(count, Vector::Zero(static_cast<Eigen::Index>(state_dim)));
}

CompositionTable first_order_composition(const DiffusionField& sigma, const Vector& xi) {
  const Matrix s = sigma.value(xi);
  const FieldJacobians jac = sigma.first_derivative(xi);
  CompositionTable out(sigma.noise_dim, 2, sigma.state_dim);
  for (std::size_t i = 0; i < sigma.noise_dim; ++i) {
    for (std::size_t j = 0; j < sigma.noise_dim; ++j) {
      out(i, j) = jac[j] * s.col(static_cast<Eigen::Index>(i));
    }
  }
  return out;
}

CompositionTable second_order_composition(const DiffusionField& sigma, const Vector& xi) {
  const std::size_t m = sigma.noise_dim;
  const std::size_t d = sigma.state_dim;
  const Matrix s = sigma.value(xi);
  const FieldJacobians jac = sigma.first_derivative(xi);
  const FieldHessians hess = sigma.second_derivative(xi);
  CompositionTable out(m, 3, d);
  for (std::size_t i = 0; i < m; ++i) {
    const auto si = s.col(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < m; ++j) {
      const auto sj = s.col(static_cast<Eigen::Index>(j));
      // sum_beta sigma_i^beta d_beta sigma_j
      const Vector inner = jac[j] * si;
      for (std::size_t k = 0; k < m; ++k) {
        Vector entry = jac[k] * inner;
        for (std::size_t a = 0; a < d; ++a) {
          entry[static_cast<Eigen::Index>(a)] += si.dot(hess[k][a] * sj);
        }
        out(i, j, k) = std::move(entry);
      }
    }
  }
  return out;
}

double first_derivative_mismatch(const DiffusionField& sigma, const Vector& xi, double eps) {
  const FieldJacobians jac = sigma.first_derivative(xi);
  double worst = 0.0;
  for (std::size_t beta = 0; beta < sigma.state_dim; ++beta) {
    Vector up = xi;
    Vector down = xi;
    up[static_cast<Eigen::Index>(beta)] += eps;
    down[static_cast<Eigen::Index>(beta)] -= eps;
    const Matrix diff = (sigma.value(up) - sigma.value(down)) / (2.0 * eps);
    for (std::size_t i = 0; i < sigma.noise_dim; ++i) {
      const Vector fd = diff.col(static_cast<Eigen::Index>(i));
      const Vector exact = jac[i].col(static_cast<Eigen::Index>(beta));
      worst = std::max(worst, (fd - exact).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double second_derivative_mismatch(const DiffusionField& sigma, const Vector& xi, double eps) {
  const FieldHessians hess = sigma.second_derivative(xi);
  double worst = 0.0;
  for (std::size_t alpha = 0; alpha < sigma.state_dim; ++alpha) {
    Vector up = xi;
    Vector down = xi;
    up[static_cast<Eigen::Index>(alpha)] += eps;
    down[static_cast<Eigen::Index>(alpha)] -= eps;
    const FieldJacobians jup = sigma.first_derivative(up);
    const FieldJacobians jdown = sigma.first_derivative(down);
    for (std::size_t i = 0; i < sigma.noise_dim; ++i) {
      // column alpha of the difference quotient holds d_alpha d_beta sigma_i^a for every (a, beta)
      const Matrix fd = (jup[i] - jdown[i]) / (2.0 * eps);
      for (std::size_t a = 0; a < sigma.state_dim; ++a) {
        for (std::size_t beta = 0; beta < sigma.state_dim; ++beta) {
          const double exact = hess[i][a](static_cast<Eigen::Index>(beta), static_cast<Eigen::Index>(alpha));
          worst = std::max(worst, std::abs(fd(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(beta)) - exact));
        }
      }
    }
  }
  return worst;
}

Matrix finite_difference_jacobian(const DriftField& drift, const Vector& y, double rel_step) {
  const auto d = y.size();
  Matrix jac(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const double step = rel_step * std::max(1.0, std::abs(y[c]));
    Vector up = y;
    Vector down = y;
    up[c] += step;
    down[c] -= step;
    jac.col(c) = (drift.value(up) - drift.value(down)) / (up[c] - down[c]);
  }
  return jac;
}

LipschitzAudit audit_one_sided_lipschitz(const DriftField& drift, double radius, std::size_t samples,
                                         std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  const auto d = static_cast<Eigen::Index>(drift.dim);
  LipschitzAudit audit;
  for (std::size_t n = 0; n < samples; ++n) {
    Vector u(d);
    Vector v(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      u[c] = coord(engine);
      v[c] = coord(engine);
    }
    const Vector diff = u - v;
    const double sq = diff.squaredNorm();
    if (sq == 0.0) {
      continue;
    }
    const double ratio = (drift.value(u) - drift.value(v)).dot(diff) / sq;
    audit.max_ratio = std::max(audit.max_ratio, ratio);
    ++audit.samples;
  }
  const double slack = 1e-9 * std::max(1.0, std::abs(drift.one_sided_lipschitz));
  audit.consistent = audit.max_ratio <= drift.one_sided_lipschitz + slack;
  return audit;
}

namespace catalogue {

DriftField cubic_drift() {
  DriftField b;
  b.dim = 1;
  b.value = [](const Vector& y) { return Vector{{y[0] - y[0] * y[0] * y[0]}}; };
  b.jacobian = [](const Vector& y) { return Matrix{{1.0 - 3.0 * y[0] * y[0]}}; };
  b.one_sided_lipschitz = 1.0;
  b.local_lipschitz = [](double radius) { return 1.0 + 3.0 * radius * radius; };
  return b;
}

DriftField linear_drift(double rate) {
  DriftField b;
  b.dim = 1;
  b.value = [rate](const Vector& y) -> Vector { return -rate * y; };
  b.jacobian = [rate](const Vector&) { return Matrix{{-rate}}; };
  b.one_sided_lipschitz = -rate;
  b.local_lipschitz = [rate](double) { return std::abs(rate); };
  return b;
}

DriftField cubic_vector_drift(std::size_t dim) {
  DriftField b;
  b.dim = dim;
  b.value = [](const Vector& y) -> Vector { return y - y.squaredNorm() * y; };
  b.jacobian = [](const Vector& y) -> Matrix {
    const auto d = y.size();
    return (1.0 - y.squaredNorm()) * Matrix::Identity(d, d) - 2.0 * y * y.transpose();
  };
  b.one_sided_lipschitz = 1.0;
  b.local_lipschitz = [](double radius) { return 1.0 + 3.0 * radius * radius; };
  return b;
}

DriftField zero_drift(std::size_t dim) {
  DriftField b;
  b.dim = dim;
  b.value = [dim](const Vector&) -> Vector { return Vector::Zero(static_cast<Eigen::Index>(dim)); };
  b.jacobian = [dim](const Vector&) -> Matrix {
    return Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  };
  b.one_sided_lipschitz = 0.0;
  b.local_lipschitz = [](double) { return 0.0; };
  return b;
}

namespace {

constexpr double kMinRadius = 1e-12;

double checked_radius(const Vector& y) {
  const double r = y.norm();
  if (!(r > kMinRadius)) {
    throw FieldDomainError("derivative of |y| is undefined at |y| = " + std::to_string(r));
  }
  return r;
}

}  // namespace

DiffusionField two_dimensional_example() {
  DiffusionField s;
  s.state_dim = 2;
  s.noise_dim = 2;
  s.value = [](const Vector& y) {
    Matrix out(2, 2);
    out(0, 0) = std::cos(y[1]);
    out(1, 0) = -0.9 - 10.0 * std::cos(y[0]);
    out(0, 1) = std::cos(y.norm());
    out(1, 1) = 0.0;
    return out;
  };
  s.first_derivative = [](const Vector& y) {
    FieldJacobians jac(2, Matrix::Zero(2, 2));
    jac[0](0, 1) = -std::sin(y[1]);
    jac[0](1, 0) = 10.0 * std::sin(y[0]);
    const double r = checked_radius(y);
    jac[1].row(0) = (-std::sin(r) / r) * y.transpose();
    return jac;
  };
  s.second_derivative = [](const Vector& y) {
    FieldHessians hess(2, std::vector<Matrix>(2, Matrix::Zero(2, 2)));
    hess[0][0](1, 1) = -std::cos(y[1]);
    hess[0][1](0, 0) = 10.0 * std::cos(y[0]);
    // d_b d_a cos(r) = -cos(r) y_a y_b / r^2 - sin(r) (delta_ab / r - y_a y_b / r^3)
    const double r = checked_radius(y);
    const Matrix outer = y * y.transpose();
    hess[1][0] = -std::cos(r) * outer / (r * r) - std::sin(r) * (Matrix::Identity(2, 2) / r - outer / (r * r * r));
    return hess;
  };
  return s;
}

DiffusionField constant_diffusion(const Matrix& value) {
  DiffusionField s;
  s.state_dim = static_cast<std::size_t>(value.rows());
  s.noise_dim = static_cast<std::size_t>(value.cols());
  const auto d = value.rows();
  const auto m = static_cast<std::size_t>(value.cols());
  s.value = [value](const Vector&) { return value; };
  s.first_derivative = [d, m](const Vector&) { return FieldJacobians(m, Matrix::Zero(d, d)); };
  s.second_derivative = [d, m](const Vector&) {
    return FieldHessians(m, std::vector<Matrix>(static_cast<std::size_t>(d), Matrix::Zero(d, d)));
  };
  return s;
}

DiffusionField identity_diffusion(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return constant_diffusion(Matrix::Identity(d, d));
}

DiffusionField scalar_linear_diffusion() {
  DiffusionField s;
  s.value = [](const Vector& y) { return Matrix{{y[0]}}; };
  s.first_derivative = [](const Vector&) { return FieldJacobians{Matrix{{1.0}}}; };
  s.second_derivative = [](const Vector&) { return FieldHessians{{Matrix{{0.0}}}}; };
  return s;
}

}  // namespace catalogue

}  // namespace stiffrough
