#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "bsmmr/domain.hpp"

namespace bsmmr {

/// Nonempty subset of covariate axes as a bitmask: bit d set <=> axis d active.
/// Subprocess masks run 1 .. 2^m - 1.
using SubsetMask = std::uint32_t;

inline bool axis_active(SubsetMask s, int d) { return (s >> d) & 1u; }
inline int subset_count(int dim) { return (1 << dim) - 1; }

struct SupportPoint {
  Eigen::VectorXd location;
  double level = 0.0;

  bool operator==(const SupportPoint& o) const { return level == o.level && location == o.location; }
};

/// Componentwise u <= v (ties count in both directions).
inline bool precedes(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return (u.array() <= v.array()).all();
}

/// One region's piecewise-constant monotone function as a partitioned marked
/// point process. Level at x is the highest mark among points below x, or
/// delta_min when no point lies below x.
///
/// Within a subprocess points are kept sorted by their first active coordinate,
/// so a point index refers to that order.
class MonotoneSurface {
 public:
  MonotoneSurface() = default;
  MonotoneSurface(CovariateBox sampling_box, double delta_min, double delta_max, int n_max);

  const CovariateBox& box() const { return box_; }
  int dim() const { return box_.dim(); }
  double delta_min() const { return delta_min_; }
  double delta_max() const { return delta_max_; }
  int n_max() const { return n_max_; }
  int subsets() const { return static_cast<int>(subprocesses_.size()); }

  /// Total point count n(Delta_k).
  int size() const { return total_; }
  bool at_capacity() const { return total_ >= n_max_; }

  const std::vector<SupportPoint>& points(SubsetMask s) const { return subprocesses_.at(s - 1); }
  int count(SubsetMask s) const { return static_cast<int>(points(s).size()); }

  /// True iff x lies in the subspace of subprocess s: strictly above the box's
  /// lower bound exactly on the active axes, at the lower bound elsewhere.
  bool in_subspace(SubsetMask s, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Subprocess whose subspace contains x, 0 if x is the box's lower corner.
  SubsetMask subset_of(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// |X_{k,i}|: product of box widths over the active axes.
  double subspace_volume(SubsetMask s) const;

  bool occupied(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  template <typename F>
  void for_each_point(F&& f) const {
    for (int i = 0; i < subsets(); ++i)
      for (const auto& pt : subprocesses_[i]) f(static_cast<SubsetMask>(i + 1), pt);
  }

  bool operator==(const MonotoneSurface& o) const {
    return box_ == o.box_ && delta_min_ == o.delta_min_ && delta_max_ == o.delta_max_ && n_max_ == o.n_max_ &&
           subprocesses_ == o.subprocesses_;
  }

 private:
  friend MonotoneSurface apply_birth(const MonotoneSurface&, SupportPoint);
  friend MonotoneSurface apply_death(const MonotoneSurface&, SubsetMask, int);
  friend MonotoneSurface apply_shift(const MonotoneSurface&, SubsetMask, int, SupportPoint);

  int first_axis(SubsetMask s) const;
  void insert(SubsetMask s, SupportPoint pt);

  CovariateBox box_;
  double delta_min_ = 0.0;
  double delta_max_ = 1.0;
  int n_max_ = 1;
  int total_ = 0;
  std::vector<std::vector<SupportPoint>> subprocesses_;
};

/// Level at x; throws OutOfDomain outside the sampling box.
double evaluate(const MonotoneSurface& surface, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Same without the domain check (hot path; caller guarantees x in box).
double evaluate_unchecked(const MonotoneSurface& surface, const Eigen::Ref<const Eigen::VectorXd>& x);

struct LevelBounds {
  double lower;
  double upper;
  double width() const { return upper - lower; }
};

/// [b_l, b_u] for a new mark at xi_star: bounded below by marks of points below
/// xi_star and above by marks of points above it, clipped to [delta_min, delta_max].
LevelBounds birth_level_bounds(const MonotoneSurface& surface, const Eigen::Ref<const Eigen::VectorXd>& xi_star);
LevelBounds level_bounds_excluding(const MonotoneSurface& surface, SubsetMask skip_subset, int skip_index,
                                   const Eigen::Ref<const Eigen::VectorXd>& x);

/// Per-axis location window for shifting point j of subprocess s without
/// changing the coordinate order within the subprocess. Inactive axes collapse
/// to the box's lower bound.
CovariateBox shift_location_bounds(const MonotoneSurface& surface, SubsetMask s, int j);

MonotoneSurface apply_birth(const MonotoneSurface& surface, SupportPoint point);
MonotoneSurface apply_death(const MonotoneSurface& surface, SubsetMask s, int j);
MonotoneSurface apply_shift(const MonotoneSurface& surface, SubsetMask s, int j, SupportPoint point);

/// Region where two one-move-apart surfaces can differ: the upper orthant of
/// `corner`, with the exact cells (inside the sampling box) on which the
/// levels differ.
struct ChangedRegion {
  Eigen::VectorXd corner;
  std::vector<CovariateBox> cells;
  bool touched = false;  // false when the surfaces hold identical points
};

ChangedRegion changed_region(const MonotoneSurface& before, const MonotoneSurface& after);
/// Corner of the orthant that contains every location present in exactly one of
/// the two surfaces; nullopt when their point sets coincide.
std::optional<Eigen::VectorXd> changed_corner(const MonotoneSurface& before, const MonotoneSurface& after);

std::map<SubsetMask, bool> subset_emptiness(const MonotoneSurface& surface);

}  // namespace bsmmr
