#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <vector>

#include "bsmmr/domain.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr {

/// Rectilinear partition of a box whose breakpoints include every support-point
/// coordinate of the given surfaces that falls strictly inside the box. On each
/// cell every such surface is constant.
class RectilinearGrid {
 public:
  RectilinearGrid(const CovariateBox& domain, std::initializer_list<const MonotoneSurface*> surfaces);

  int dim() const { return static_cast<int>(edges_.size()); }
  std::size_t cell_count() const { return cells_; }
  const std::vector<double>& edges(int d) const { return edges_[d]; }
  int cells_along(int d) const { return static_cast<int>(edges_[d].size()) - 1; }

  /// Levels of `surface` on every cell, row-major (last axis fastest).
  void levels(const MonotoneSurface& surface, std::vector<double>& out) const;

  /// Calls f(flat_index, volume) for every cell.
  template <typename F>
  void for_each_cell(F&& f) const {
    const int m = dim();
    std::vector<int> idx(m, 0);
    for (std::size_t c = 0; c < cells_; ++c) {
      double vol = 1.0;
      for (int d = 0; d < m; ++d) vol *= widths_[d][idx[d]];
      f(c, vol);
      for (int d = m - 1; d >= 0; --d) {
        if (++idx[d] < cells_along(d)) break;
        idx[d] = 0;
      }
    }
  }

  CovariateBox cell_box(std::size_t flat) const;

 private:
  std::vector<std::vector<double>> edges_;
  std::vector<std::vector<double>> widths_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 0;
};

}  // namespace bsmmr
