#include "bsmmr/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsmmr/grid.hpp"

namespace bsmmr {

MonotoneSurface::MonotoneSurface(CovariateBox sampling_box, double delta_min, double delta_max, int n_max)
    : box_(std::move(sampling_box)), delta_min_(delta_min), delta_max_(delta_max), n_max_(n_max) {
  if (!box_.valid()) throw Error(ErrorCode::InvalidBox, "surface sampling box");
  if (box_.dim() > 16) throw Error(ErrorCode::DimensionMismatch, "at most 16 covariates");
  if (!(delta_min < delta_max)) throw Error(ErrorCode::BadHyperparameter, "delta_min must be < delta_max");
  subprocesses_.resize(static_cast<std::size_t>(subset_count(box_.dim())));
}

bool MonotoneSurface::in_subspace(SubsetMask s, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (s == 0 || static_cast<int>(s) > subsets() || !box_.contains(x)) return false;
  for (int d = 0; d < dim(); ++d) {
    const bool above = x(d) > box_.lower(d);
    if (above != axis_active(s, d)) return false;
  }
  return true;
}

SubsetMask MonotoneSurface::subset_of(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  SubsetMask s = 0;
  for (int d = 0; d < dim(); ++d)
    if (x(d) > box_.lower(d)) s |= 1u << d;
  return s;
}

double MonotoneSurface::subspace_volume(SubsetMask s) const {
  double v = 1.0;
  for (int d = 0; d < dim(); ++d)
    if (axis_active(s, d)) v *= box_.upper(d) - box_.lower(d);
  return v;
}

bool MonotoneSurface::occupied(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const SubsetMask s = subset_of(x);
  if (s == 0) return false;
  for (const auto& pt : points(s))
    if (pt.location == x) return true;
  return false;
}

int MonotoneSurface::first_axis(SubsetMask s) const {
  for (int d = 0; d < dim(); ++d)
    if (axis_active(s, d)) return d;
  return 0;
}

void MonotoneSurface::insert(SubsetMask s, SupportPoint pt) {
  auto& list = subprocesses_[s - 1];
  const int d = first_axis(s);
  auto pos = std::upper_bound(list.begin(), list.end(), pt.location(d),
                              [d](double v, const SupportPoint& p) { return v < p.location(d); });
  list.insert(pos, std::move(pt));
  ++total_;
}

double evaluate_unchecked(const MonotoneSurface& surface, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double level = surface.delta_min();
  surface.for_each_point([&](SubsetMask, const SupportPoint& pt) {
    if (pt.level > level && precedes(pt.location, x)) level = pt.level;
  });
  return level;
}

double evaluate(const MonotoneSurface& surface, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!surface.box().contains(x)) throw Error(ErrorCode::OutOfDomain, "evaluation point outside sampling box");
  return evaluate_unchecked(surface, x);
}

LevelBounds level_bounds_excluding(const MonotoneSurface& surface, SubsetMask skip_subset, int skip_index,
                                   const Eigen::Ref<const Eigen::VectorXd>& x) {
  LevelBounds b{surface.delta_min(), surface.delta_max()};
  for (int i = 1; i <= surface.subsets(); ++i) {
    const auto s = static_cast<SubsetMask>(i);
    const auto& list = surface.points(s);
    for (int j = 0; j < static_cast<int>(list.size()); ++j) {
      if (s == skip_subset && j == skip_index) continue;
      const auto& pt = list[j];
      if (pt.level > b.lower && precedes(pt.location, x)) b.lower = pt.level;
      if (pt.level < b.upper && precedes(x, pt.location)) b.upper = pt.level;
    }
  }
  return b;
}

LevelBounds birth_level_bounds(const MonotoneSurface& surface, const Eigen::Ref<const Eigen::VectorXd>& xi_star) {
  return level_bounds_excluding(surface, 0, -1, xi_star);
}

CovariateBox shift_location_bounds(const MonotoneSurface& surface, SubsetMask s, int j) {
  const auto& list = surface.points(s);
  if (list.empty()) throw Error(ErrorCode::EmptySubprocess, "shift on empty subprocess");
  if (j < 0 || j >= static_cast<int>(list.size())) throw Error(ErrorCode::EmptySubprocess, "point index out of range");
  const auto& box = surface.box();
  const auto& xi = list[j].location;
  CovariateBox window{box.lower, box.lower};
  for (int d = 0; d < surface.dim(); ++d) {
    if (!axis_active(s, d)) continue;
    double lo = box.lower(d);
    double hi = box.upper(d);
    for (int o = 0; o < static_cast<int>(list.size()); ++o) {
      if (o == j) continue;
      const double c = list[o].location(d);
      if (c < xi(d)) lo = std::max(lo, c);
      if (c > xi(d)) hi = std::min(hi, c);
    }
    window.lower(d) = lo;
    window.upper(d) = hi;
  }
  return window;
}

namespace {

void require_birth_valid(const MonotoneSurface& surface, const SupportPoint& point, SubsetMask s) {
  if (point.location.size() != surface.dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension");
  if (!surface.box().contains(point.location)) throw Error(ErrorCode::OutOfDomain, "point outside sampling box");
  if (s == 0) throw Error(ErrorCode::MonotoneViolation, "point at the box's lower corner belongs to no subprocess");
  if (surface.occupied(point.location)) throw Error(ErrorCode::MonotoneViolation, "location already occupied");
}

}  // namespace

MonotoneSurface apply_birth(const MonotoneSurface& surface, SupportPoint point) {
  const SubsetMask s = surface.subset_of(point.location);
  require_birth_valid(surface, point, s);
  if (surface.at_capacity()) throw Error(ErrorCode::CapacityExceeded, "n_max reached");
  const auto b = birth_level_bounds(surface, point.location);
  if (point.level < b.lower || point.level > b.upper)
    throw Error(ErrorCode::MonotoneViolation, "level outside [b_l, b_u]");
  MonotoneSurface out = surface;
  out.insert(s, std::move(point));
  return out;
}

MonotoneSurface apply_death(const MonotoneSurface& surface, SubsetMask s, int j) {
  if (s == 0 || static_cast<int>(s) > surface.subsets() || surface.points(s).empty())
    throw Error(ErrorCode::EmptySubprocess, "death on empty subprocess");
  if (j < 0 || j >= surface.count(s)) throw Error(ErrorCode::EmptySubprocess, "point index out of range");
  MonotoneSurface out = surface;
  auto& list = out.subprocesses_[s - 1];
  list.erase(list.begin() + j);
  --out.total_;
  return out;
}

MonotoneSurface apply_shift(const MonotoneSurface& surface, SubsetMask s, int j, SupportPoint point) {
  const auto window = shift_location_bounds(surface, s, j);
  if (point.location.size() != surface.dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension");
  if (!surface.in_subspace(s, point.location))
    throw Error(ErrorCode::MonotoneViolation, "shifted location leaves its subprocess");
  const auto& list = surface.points(s);
  const auto& old = list[j].location;
  for (int d = 0; d < surface.dim(); ++d) {
    if (!axis_active(s, d)) continue;
    if (point.location(d) <= window.lower(d) || point.location(d) > window.upper(d))
      throw Error(ErrorCode::MonotoneViolation, "shifted location outside its window");
    for (int o = 0; o < static_cast<int>(list.size()); ++o) {
      if (o == j) continue;
      const double c = list[o].location(d);
      const bool was_below = c < old(d);
      const bool now_below = c < point.location(d);
      if (was_below != now_below || c == point.location(d))
        throw Error(ErrorCode::MonotoneViolation, "shift changes the coordinate order");
    }
  }
  if (point.location != old && surface.occupied(point.location))
    throw Error(ErrorCode::MonotoneViolation, "location already occupied");
  const auto b = level_bounds_excluding(surface, s, j, point.location);
  if (point.level < b.lower || point.level > b.upper)
    throw Error(ErrorCode::MonotoneViolation, "shifted level outside its monotone interval");
  MonotoneSurface out = apply_death(surface, s, j);
  out.insert(s, std::move(point));
  return out;
}

std::optional<Eigen::VectorXd> changed_corner(const MonotoneSurface& before, const MonotoneSurface& after) {
  std::optional<Eigen::VectorXd> corner;
  auto absorb = [&](const Eigen::VectorXd& loc) {
    if (!corner) corner = loc;
    else corner = corner->cwiseMin(loc);
  };
  const int n = std::min(before.subsets(), after.subsets());
  for (int i = 1; i <= n; ++i) {
    const auto s = static_cast<SubsetMask>(i);
    const auto& a = before.points(s);
    const auto& b = after.points(s);
    for (const auto& pa : a)
      if (std::find(b.begin(), b.end(), pa) == b.end()) absorb(pa.location);
    for (const auto& pb : b)
      if (std::find(a.begin(), a.end(), pb) == a.end()) absorb(pb.location);
  }
  return corner;
}

ChangedRegion changed_region(const MonotoneSurface& before, const MonotoneSurface& after) {
  ChangedRegion out;
  auto corner = changed_corner(before, after);
  if (!corner) {
    out.corner = before.box().upper;
    return out;
  }
  out.touched = true;
  out.corner = *corner;
  CovariateBox orthant{before.box().lower.cwiseMax(*corner), before.box().upper};
  if (!orthant.valid()) return out;
  RectilinearGrid grid(orthant, {&before, &after});
  std::vector<double> la, lb;
  grid.levels(before, la);
  grid.levels(after, lb);
  for (std::size_t c = 0; c < grid.cell_count(); ++c)
    if (la[c] != lb[c]) out.cells.push_back(grid.cell_box(c));
  return out;
}

std::map<SubsetMask, bool> subset_emptiness(const MonotoneSurface& surface) {
  std::map<SubsetMask, bool> out;
  for (int i = 1; i <= surface.subsets(); ++i) out[static_cast<SubsetMask>(i)] = surface.points(i).empty();
  return out;
}

}  // namespace bsmmr
