#include "bsmmr/grid.hpp"

#include <algorithm>

namespace bsmmr {

RectilinearGrid::RectilinearGrid(const CovariateBox& domain, std::initializer_list<const MonotoneSurface*> surfaces) {
  const int m = domain.dim();
  edges_.resize(m);
  widths_.resize(m);
  strides_.assign(m, 1);
  for (int d = 0; d < m; ++d) {
    auto& e = edges_[d];
    e.push_back(domain.lower(d));
    e.push_back(domain.upper(d));
    for (const auto* s : surfaces) {
      s->for_each_point([&](SubsetMask, const SupportPoint& pt) {
        const double c = pt.location(d);
        if (c > domain.lower(d) && c < domain.upper(d)) e.push_back(c);
      });
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    widths_[d].resize(e.size() - 1);
    for (std::size_t i = 0; i + 1 < e.size(); ++i) widths_[d][i] = e[i + 1] - e[i];
  }
  cells_ = 1;
  for (int d = m - 1; d >= 0; --d) {
    strides_[d] = cells_;
    cells_ *= static_cast<std::size_t>(cells_along(d));
  }
}

void RectilinearGrid::levels(const MonotoneSurface& surface, std::vector<double>& out) const {
  const int m = dim();
  out.assign(cells_, surface.delta_min());
  // Seed each point at the first cell it dominates, then propagate a running
  // maximum along every axis.
  surface.for_each_point([&](SubsetMask, const SupportPoint& pt) {
    std::size_t flat = 0;
    for (int d = 0; d < m; ++d) {
      const auto& e = edges_[d];
      const auto last = e.end() - 1;  // lower edges only
      auto it = std::lower_bound(e.begin(), last, pt.location(d));
      if (it == last) return;
      flat += static_cast<std::size_t>(it - e.begin()) * strides_[d];
    }
    out[flat] = std::max(out[flat], pt.level);
  });
  if (surface.size() == 0) return;
  for (int d = 0; d < m; ++d) {
    const std::size_t stride = strides_[d];
    const auto n = static_cast<std::size_t>(cells_along(d));
    for (std::size_t c = 0; c < cells_; ++c) {
      if ((c / stride) % n == 0) continue;
      out[c] = std::max(out[c], out[c - stride]);
    }
  }
}

CovariateBox RectilinearGrid::cell_box(std::size_t flat) const {
  const int m = dim();
  CovariateBox box{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (int d = 0; d < m; ++d) {
    const auto i = (flat / strides_[d]) % static_cast<std::size_t>(cells_along(d));
    box.lower(d) = edges_[d][i];
    box.upper(d) = edges_[d][i + 1];
  }
  return box;
}

}  // namespace bsmmr
