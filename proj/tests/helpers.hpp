#pragma once

#include <gtest/gtest.h>

#include <initializer_list>
#include <utility>
#include <vector>

#include "bsmmr/domain.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr::test {

inline Eigen::VectorXd v(std::initializer_list<double> xs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

inline CovariateBox unit2() { return CovariateBox::unit(2); }

/// Surface on `box` from (location, level) pairs born in the given order.
inline MonotoneSurface surface(const CovariateBox& box, std::vector<std::pair<Eigen::VectorXd, double>> pts,
                               double dmin = 0.0, double dmax = 1.0, int n_max = 200) {
  MonotoneSurface s(box, dmin, dmax, n_max);
  for (auto& [loc, lvl] : pts) s = apply_birth(s, SupportPoint{loc, lvl});
  return s;
}

inline RegionData gaussian_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  RegionData d;
  d.x = x;
  d.y = y;
  return d;
}

inline RegionData empty_rows(int m, bool binomial = false) {
  RegionData d;
  d.x.resize(0, m);
  d.y.resize(0);
  if (binomial) d.trials = Eigen::VectorXi(0);
  return d;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::Io;
}

}  // namespace bsmmr::test
