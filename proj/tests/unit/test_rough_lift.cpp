#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "stiffrough/rough_lift.hpp"

namespace {

using namespace stiffrough;

// Iterated integrals of a piecewise-linear path straight from the definition:
// X2^{ij}_{s,t} = sum_{a<b} dx_a^i dx_b^j + sum_a dx_a^i dx_a^j / 2, and the analogous
// ordered triple sum at level 3.
struct Signature {
  Eigen::VectorXd x1;
  Eigen::MatrixXd x2;
  std::vector<double> x3;  // (i*m + j)*m + k
};

Signature direct_signature(const std::vector<Eigen::VectorXd>& d) {
  const auto m = static_cast<std::size_t>(d.front().size());
  Signature s{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)),
              Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)),
              std::vector<double>(m * m * m, 0.0)};
  const std::size_t n = d.size();
  for (std::size_t a = 0; a < n; ++a) {
    s.x1 += d[a];
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double v = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        v += 0.5 * d[a][i] * d[a][j];
        for (std::size_t b = a + 1; b < n; ++b) {
          v += d[a][i] * d[b][j];
        }
      }
      s.x2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      for (std::size_t k = 0; k < m; ++k) {
        double w = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
          w += d[a][i] * d[a][j] * d[a][k] / 6.0;
          for (std::size_t b = a + 1; b < n; ++b) {
            w += 0.5 * d[a][i] * d[a][j] * d[b][k] + 0.5 * d[a][i] * d[b][j] * d[b][k];
            for (std::size_t c = b + 1; c < n; ++c) {
              w += d[a][i] * d[b][j] * d[c][k];
            }
          }
        }
        s.x3[(i * m + j) * m + k] = w;
      }
    }
  }
  return s;
}

SamplePath random_path(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::normal_distribution<double> normal;
  PathValues v(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(m));
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      v(r, c) = normal(rng);
    }
  }
  return SamplePath(Grid(1.0, n), v);
}

LiftSegment random_segment(std::mt19937_64& rng, std::size_t m) {
  std::normal_distribution<double> normal;
  LiftSegment s = LiftSegment::zero(m, true);
  for (std::size_t i = 0; i < m; ++i) {
    s.increment[static_cast<Eigen::Index>(i)] = normal(rng);
    for (std::size_t j = 0; j < m; ++j) {
      s.level2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = normal(rng);
      for (std::size_t k = 0; k < m; ++k) {
        s.level3(i, j, k) = normal(rng);
      }
    }
  }
  return s;
}

double level3_gap(const Tensor3& a, const Tensor3& b) {
  double g = 0.0;
  for (std::size_t q = 0; q < a.data().size(); ++q) {
    g = std::max(g, std::abs(a.data()[q] - b.data()[q]));
  }
  return g;
}

TEST(PiecewiseLinearLift, TwoDimensionalSegment) {
  const LiftSegment s = LiftSegment::linear(Eigen::Vector2d(1.0, 2.0), false);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.5, 1.0, 1.0, 2.0;
  EXPECT_TRUE(s.level2.isApprox(expected, 1e-15));
  EXPECT_FALSE(s.has_level3);
}

TEST(PiecewiseLinearLift, ScalarSegment) {
  const auto path = make_scalar_path(make_grid(1.0, 1), {0.0, 3.0});
  const RoughLift lift = piecewise_linear_lift(path, true);
  EXPECT_DOUBLE_EQ(lift.segment(0).level2(0, 0), 4.5);
  EXPECT_DOUBLE_EQ(lift.segment(0).level3(0, 0, 0), 4.5);
}

TEST(PiecewiseLinearLift, TwoIntervalsCompose) {
  const Eigen::Vector2d u(0.3, -1.2);
  const Eigen::Vector2d w(2.0, 0.7);
  PathValues v(3, 2);
  v.row(0) << 0.0, 0.0;
  v.row(1) = u.transpose();
  v.row(2) = (u + w).transpose();
  const RoughLift lift = piecewise_linear_lift(SamplePath(Grid(1.0, 2), v), false);
  const Eigen::MatrixXd expected = 0.5 * u * u.transpose() + 0.5 * w * w.transpose() + u * w.transpose();
  EXPECT_LE((lift.span(0, 2).level2 - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PiecewiseLinearLift, ScalarIdentitiesPerInterval) {
  std::mt19937_64 rng(3);
  const RoughLift lift = piecewise_linear_lift(random_path(rng, 9, 1), true);
  for (const LiftSegment& s : lift.segments()) {
    const double d = s.increment[0];
    EXPECT_EQ(s.level2(0, 0), 0.5 * d * d);
    EXPECT_NEAR(s.level3(0, 0, 0), d * d * d / 6.0, 1e-15 * std::abs(d * d * d) + 1e-300);
  }
}

TEST(PiecewiseLinearLift, SpansMatchDirectIteratedIntegrals) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 3);
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const SamplePath path = random_path(rng, n, m);
    const RoughLift lift = piecewise_linear_lift(path, true);
    for (std::size_t s = 0; s <= n; ++s) {
      for (std::size_t t = s + 1; t <= n; ++t) {
        std::vector<Eigen::VectorXd> d;
        for (std::size_t r = s; r < t; ++r) {
          d.push_back(path.increment(r, r + 1));
        }
        const Signature want = direct_signature(d);
        const LiftSegment got = lift.span(s, t);
        EXPECT_LE((got.increment - want.x1).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((got.level2 - want.x2).cwiseAbs().maxCoeff(), 1e-12);
        double g3 = 0.0;
        for (std::size_t q = 0; q < want.x3.size(); ++q) {
          g3 = std::max(g3, std::abs(got.level3.data()[q] - want.x3[q]));
        }
        EXPECT_LE(g3, 1e-12);
      }
    }
  }
}

TEST(ChenCompose, ZeroRightFactorIsNeutral) {
  std::mt19937_64 rng(5);
  const LiftSegment a = random_segment(rng, 3);
  const LiftSegment c = chen_compose(a, LiftSegment::zero(3, true));
  EXPECT_EQ(c.increment, a.increment);
  EXPECT_EQ(c.level2, a.level2);
  EXPECT_EQ(c.level3.data(), a.level3.data());
}

TEST(ChenCompose, Associative) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 3);
    const LiftSegment a = random_segment(rng, m);
    const LiftSegment b = random_segment(rng, m);
    const LiftSegment c = random_segment(rng, m);
    const LiftSegment left = chen_compose(chen_compose(a, b), c);
    const LiftSegment right = chen_compose(a, chen_compose(b, c));
    EXPECT_LE((left.increment - right.increment).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((left.level2 - right.level2).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE(level3_gap(left.level3, right.level3), 1e-13);
  }
}

TEST(ChenCompose, ScalarExample) {
  const LiftSegment u = LiftSegment::linear(Eigen::VectorXd::Constant(1, 1.0), false);
  EXPECT_DOUBLE_EQ(chen_compose(u, u).level2(0, 0), 2.0);
}

TEST(ChenCompose, LevelThreeDroppedWhenEitherSideLacksIt) {
  const LiftSegment a = LiftSegment::linear(Eigen::Vector2d(1, 2), true);
  const LiftSegment b = LiftSegment::linear(Eigen::Vector2d(1, 2), false);
  EXPECT_FALSE(chen_compose(a, b).has_level3);
  EXPECT_TRUE(chen_compose(a, a).has_level3);
}

TEST(Geometricity, PiecewiseLinearIsGeometric) {
  std::mt19937_64 rng(8);
  const RoughLift lift = piecewise_linear_lift(random_path(rng, 12, 3), true);
  EXPECT_LE(geometricity_defect(lift), 1e-14);
  EXPECT_LE(geometricity_defect_all_pairs(lift), 1e-12);
}

TEST(Geometricity, ZeroAreaHasHalfSquaredIncrement) {
  LiftSegment s = LiftSegment::zero(2, false);
  s.increment << 1.0, -3.0;
  EXPECT_DOUBLE_EQ(geometricity_defect(s), 4.5);
}

TEST(Geometricity, AntisymmetricAreaDoesNotCount) {
  LiftSegment s = LiftSegment::linear(Eigen::Vector2d(1.0, -3.0), false);
  s.level2(0, 1) += 0.7;
  s.level2(1, 0) -= 0.7;
  EXPECT_LE(geometricity_defect(s), 1e-15);
}

TEST(RoughHolder, ZeroPath) {
  const auto path = make_scalar_path(make_grid(1.0, 4), {0, 0, 0, 0, 0});
  EXPECT_EQ(rough_holder_norm(piecewise_linear_lift(path, false), 2.0), 0.0);
}

TEST(RoughHolder, LinearScalarPath) {
  const Grid g = make_grid(1.0, 8);
  std::vector<double> x = g.nodes();
  const double norm = rough_holder_norm(piecewise_linear_lift(make_scalar_path(g, x), false), 2.0);
  EXPECT_NEAR(norm, 1.0 + std::sqrt(0.5), 1e-14);
}

TEST(RoughHolder, Homogeneous) {
  std::mt19937_64 rng(9);
  const SamplePath p = random_path(rng, 8, 2);
  const double base = rough_holder_norm(piecewise_linear_lift(p, false), 2.5);
  for (double lambda : {-3.0, 0.5, 2.0}) {
    const SamplePath scaled(p.grid, lambda * p.values);
    EXPECT_NEAR(rough_holder_norm(piecewise_linear_lift(scaled, false), 2.5), std::abs(lambda) * base,
                1e-12 * std::abs(lambda) * base);
  }
}

TEST(RoughHolder, RejectsPBelowTwo) {
  const auto path = make_scalar_path(make_grid(1.0, 2), {0, 1, 0});
  EXPECT_THROW(rough_holder_norm(piecewise_linear_lift(path, false), 1.5), std::invalid_argument);
}

class ChenProperty : public ::testing::TestWithParam<int> {};

TEST_P(ChenProperty, ResidualsVanishOnRandomLifts) {
  std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(GetParam()));
  std::uniform_int_distribution<std::size_t> dim(1, 3);
  std::uniform_int_distribution<std::size_t> steps(1, 16);
  const RoughLift lift = piecewise_linear_lift(random_path(rng, steps(rng), dim(rng)), true);
  const ChenResiduals r = chen_residuals(lift);
  EXPECT_LE(r.level1, 1e-12);
  EXPECT_LE(r.level2, 1e-12);
  EXPECT_LE(r.level3, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Seeds, ChenProperty, ::testing::Range(0, 25));

TEST(Geometricity, DetectsCorruptedSegment) {
  std::mt19937_64 rng(12);
  const RoughLift lift = piecewise_linear_lift(random_path(rng, 4, 2), true);
  std::vector<LiftSegment> segs = lift.segments();
  segs[1].level2(0, 1) += 1.0;
  const RoughLift bad(lift.grid(), segs);
  EXPECT_GT(geometricity_defect(bad), 0.4);
}

}  // namespace
