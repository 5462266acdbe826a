#pragma once

#include <cstddef>
#include <vector>

#include "stiffrough/grid.hpp"

namespace stiffrough {

/// Dense m x m x m tensor; element (i,j,k) is the level-3 coordinate X^{3;i,j,k}.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(std::size_t m) : m_(m), data_(m * m * m, 0.0) {}

  std::size_t extent() const { return m_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * m_ + j) * m_ + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * m_ + j) * m_ + k]; }
  const std::vector<double>& data() const { return data_; }

  /// Entrywise max |.|.
  double max_abs() const;

 private:
  std::size_t m_ = 0;
  std::vector<double> data_;
};

/// Truncated signature of a path over one interval: the increment, X^2 (m x m,
/// element (i,j) is X^{2;i,j}) and optionally X^3.
struct LiftSegment {
  Eigen::VectorXd increment;
  Eigen::MatrixXd level2;
  Tensor3 level3;
  bool has_level3 = false;

  std::size_t dimension() const { return static_cast<std::size_t>(increment.size()); }

  static LiftSegment zero(std::size_t m, bool with_level3);
  /// Iterated integrals of the straight segment with increment v: v⊗v/2 and v⊗v⊗v/6.
  static LiftSegment linear(const Eigen::VectorXd& v, bool with_level3);
};

/// Chen composition of adjacent segments [s,u] and [u,t] into [s,t].
/// Level 3 is carried only when both inputs carry it.
LiftSegment chen_compose(const LiftSegment& left, const LiftSegment& right);

/// Per-interval lift on a grid; spans over several intervals are composed on demand.
class RoughLift {
 public:
  RoughLift(Grid grid, std::vector<LiftSegment> segments);

  const Grid& grid() const { return grid_; }
  std::size_t dimension() const { return dimension_; }
  bool has_level3() const { return has_level3_; }
  const std::vector<LiftSegment>& segments() const { return segments_; }
  const LiftSegment& segment(std::size_t r) const { return segments_.at(r); }

  /// Composition of the segments covering nodes s..t, s <= t.
  LiftSegment span(std::size_t s, std::size_t t) const;

  /// All spans (s, t) with s <= t, row-major in (s, t); index via span_index.
  std::vector<LiftSegment> all_spans() const;
  std::size_t span_index(std::size_t s, std::size_t t) const { return s * grid_.num_nodes() + t; }

 private:
  Grid grid_;
  std::vector<LiftSegment> segments_;
  std::size_t dimension_;
  bool has_level3_;
};

/// Canonical lift of the piecewise-linear interpolation of the path.
RoughLift piecewise_linear_lift(const SamplePath& path, bool include_level3);

/// Max over intervals of the entrywise max |Sym(X^2) - x⊗x/2|.
double geometricity_defect(const RoughLift& lift);
/// Same, over every node pair instead of the elementary intervals.
double geometricity_defect_all_pairs(const RoughLift& lift);
double geometricity_defect(const LiftSegment& segment);

struct ChenResiduals {
  double level1 = 0.0;
  double level2 = 0.0;
  double level3 = 0.0;
};

/// Worst residual of the level 1/2/3 Chen identities over all node triples s <= u <= t.
ChenResiduals chen_residuals(const RoughLift& lift);

/// sup |x_{s,t}| / |t-s|^{1/p} + sqrt(sup |X^2_{s,t}| / |t-s|^{2/p}) over node pairs;
/// tensor magnitudes are Frobenius norms. Needs p >= 2.
double rough_holder_norm(const RoughLift& lift, double p);

}  // namespace stiffrough
