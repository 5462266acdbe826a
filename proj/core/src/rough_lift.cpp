#include "stiffrough/rough_lift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stiffrough {

double Tensor3::max_abs() const {
  double best = 0.0;
  for (double v : data_) {
    best = std::max(best, std::abs(v));
  }
  return best;
}

LiftSegment LiftSegment::zero(std::size_t m, bool with_level3) {
  LiftSegment seg;
  const auto n = static_cast<Eigen::Index>(m);
  seg.increment = Eigen::VectorXd::Zero(n);
  seg.level2 = Eigen::MatrixXd::Zero(n, n);
  seg.has_level3 = with_level3;
  if (with_level3) {
    seg.level3 = Tensor3(m);
  }
  return seg;
}

LiftSegment LiftSegment::linear(const Eigen::VectorXd& v, bool with_level3) {
  const auto m = static_cast<std::size_t>(v.size());
  LiftSegment seg;
  seg.increment = v;
  seg.level2 = 0.5 * v * v.transpose();
  seg.has_level3 = with_level3;
  if (with_level3) {
    seg.level3 = Tensor3(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
          seg.level3(i, j, k) = v[static_cast<Eigen::Index>(i)] * v[static_cast<Eigen::Index>(j)] *
                                v[static_cast<Eigen::Index>(k)] / 6.0;
        }
      }
    }
  }
  return seg;
}

LiftSegment chen_compose(const LiftSegment& left, const LiftSegment& right) {
  if (left.dimension() != right.dimension()) {
    throw std::invalid_argument("cannot compose lifts of different dimension");
  }
  const std::size_t m = left.dimension();
  LiftSegment out;
  out.increment = left.increment + right.increment;
  out.level2 = left.level2 + right.level2 + left.increment * right.increment.transpose();
  out.has_level3 = left.has_level3 && right.has_level3;
  if (out.has_level3) {
    out.level3 = Tensor3(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t j = 0; j < m; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        for (std::size_t k = 0; k < m; ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          out.level3(i, j, k) = left.level3(i, j, k) + right.level3(i, j, k) +
                                left.level2(ii, jj) * right.increment[kk] +
                                left.increment[ii] * right.level2(jj, kk);
        }
      }
    }
  }
  return out;
}

RoughLift::RoughLift(Grid grid, std::vector<LiftSegment> segments)
    : grid_(grid), segments_(std::move(segments)), dimension_(0), has_level3_(true) {
  if (segments_.size() != grid_.steps()) {
    throw std::invalid_argument("lift has " + std::to_string(segments_.size()) + " segments for a grid of " +
                                std::to_string(grid_.steps()) + " steps");
  }
  dimension_ = segments_.front().dimension();
  for (const auto& seg : segments_) {
    const auto m = static_cast<Eigen::Index>(dimension_);
    if (seg.dimension() != dimension_ || seg.level2.rows() != m || seg.level2.cols() != m) {
      throw std::invalid_argument("lift segments disagree on dimension");
    }
    if (seg.has_level3 && seg.level3.extent() != dimension_) {
      throw std::invalid_argument("level-3 tensor has the wrong extent");
    }
    has_level3_ = has_level3_ && seg.has_level3;
  }
}

LiftSegment RoughLift::span(std::size_t s, std::size_t t) const {
  if (s > t || t > grid_.steps()) {
    throw std::out_of_range("invalid span " + std::to_string(s) + ".." + std::to_string(t));
  }
  LiftSegment acc = LiftSegment::zero(dimension_, has_level3_);
  for (std::size_t r = s; r < t; ++r) {
    acc = chen_compose(acc, segments_[r]);
  }
  return acc;
}

std::vector<LiftSegment> RoughLift::all_spans() const {
  const std::size_t n = grid_.num_nodes();
  std::vector<LiftSegment> out(n * n);
  for (std::size_t s = 0; s < n; ++s) {
    LiftSegment acc = LiftSegment::zero(dimension_, has_level3_);
    out[span_index(s, s)] = acc;
    for (std::size_t t = s + 1; t < n; ++t) {
      acc = chen_compose(acc, segments_[t - 1]);
      out[span_index(s, t)] = acc;
    }
  }
  return out;
}

RoughLift piecewise_linear_lift(const SamplePath& path, bool include_level3) {
  std::vector<LiftSegment> segments;
  segments.reserve(path.grid.steps());
  for (std::size_t r = 0; r < path.grid.steps(); ++r) {
    segments.push_back(LiftSegment::linear(path.increment(r, r + 1), include_level3));
  }
  return RoughLift(path.grid, std::move(segments));
}

double geometricity_defect(const LiftSegment& segment) {
  const Eigen::MatrixXd sym = 0.5 * (segment.level2 + segment.level2.transpose());
  const Eigen::MatrixXd half_square = 0.5 * segment.increment * segment.increment.transpose();
  return (sym - half_square).cwiseAbs().maxCoeff();
}

double geometricity_defect(const RoughLift& lift) {
  double worst = 0.0;
  for (const auto& seg : lift.segments()) {
    worst = std::max(worst, geometricity_defect(seg));
  }
  return worst;
}

double geometricity_defect_all_pairs(const RoughLift& lift) {
  const auto spans = lift.all_spans();
  const std::size_t n = lift.grid().num_nodes();
  double worst = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      worst = std::max(worst, geometricity_defect(spans[lift.span_index(s, t)]));
    }
  }
  return worst;
}

ChenResiduals chen_residuals(const RoughLift& lift) {
  const auto spans = lift.all_spans();
  const std::size_t n = lift.grid().num_nodes();
  const std::size_t m = lift.dimension();
  ChenResiduals worst;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t u = s; u < n; ++u) {
      for (std::size_t t = u; t < n; ++t) {
        const auto& st = spans[lift.span_index(s, t)];
        const auto& su = spans[lift.span_index(s, u)];
        const auto& ut = spans[lift.span_index(u, t)];
        worst.level1 =
            std::max(worst.level1, (st.increment - su.increment - ut.increment).cwiseAbs().maxCoeff());
        const Eigen::MatrixXd r2 =
            st.level2 - su.level2 - ut.level2 - su.increment * ut.increment.transpose();
        worst.level2 = std::max(worst.level2, r2.cwiseAbs().maxCoeff());
        if (!lift.has_level3()) {
          continue;
        }
        for (std::size_t i = 0; i < m; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          for (std::size_t j = 0; j < m; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            for (std::size_t k = 0; k < m; ++k) {
              const auto kk = static_cast<Eigen::Index>(k);
              const double lhs = st.level3(i, j, k) - su.level3(i, j, k) - ut.level3(i, j, k);
              const double rhs = su.level2(ii, jj) * ut.increment[kk] + su.increment[ii] * ut.level2(jj, kk);
              worst.level3 = std::max(worst.level3, std::abs(lhs - rhs));
            }
          }
        }
      }
    }
  }
  return worst;
}

double rough_holder_norm(const RoughLift& lift, double p) {
  if (!(p >= 2.0)) {
    throw std::invalid_argument("rough Hoelder norm needs p >= 2, got " + std::to_string(p));
  }
  const auto spans = lift.all_spans();
  const Grid& grid = lift.grid();
  const std::size_t n = grid.num_nodes();
  double level1 = 0.0;
  double level2 = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      const double gap = grid.node(t) - grid.node(s);
      const auto& seg = spans[lift.span_index(s, t)];
      level1 = std::max(level1, seg.increment.norm() / std::pow(gap, 1.0 / p));
      level2 = std::max(level2, seg.level2.norm() / std::pow(gap, 2.0 / p));
    }
  }
  return level1 + std::sqrt(level2);
}

}  // namespace stiffrough
