#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "bsmmr/domain.hpp"
#include "bsmmr/grid.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr {

/// Pointwise discrepancy |(1+a)^p - (1+b)^p| |a-b|^q for levels already offset by
/// delta_min. Equal levels give exactly 0 for every (p, q), including q = 0.
template <typename Scalar>
Scalar integrand(Scalar a, Scalar b, Scalar p, Scalar q) {
  using std::abs;
  using std::pow;
  if (a == b) return Scalar(0);
  const Scalar gap = abs(a - b);
  const Scalar level_term = (p == Scalar(1)) ? gap : abs(pow(Scalar(1) + a, p) - pow(Scalar(1) + b, p));
  Scalar gap_term;
  if (q == Scalar(0)) gap_term = Scalar(1);
  else if (q == Scalar(1)) gap_term = gap;
  else if (q == Scalar(2)) gap_term = gap * gap;
  else gap_term = pow(gap, q);
  return level_term * gap_term;
}

/// Cells on which two surfaces are jointly constant, with their levels.
struct CellDecomposition {
  RectilinearGrid grid;
  std::vector<double> levels_a;
  std::vector<double> levels_b;

  CellDecomposition(const CovariateBox& domain, const MonotoneSurface& a, const MonotoneSurface& b);
};

/// Exact integral of the discrepancy integrand over `domain`.
double dpq(const MonotoneSurface& a, const MonotoneSurface& b, double p, double q, const CovariateBox& domain);

/// dpq(new, other) - dpq(old, other), integrating only over the changed orthant.
double dpq_delta(const MonotoneSurface& old_surface, const MonotoneSurface& new_surface,
                 const MonotoneSurface& other, double p, double q, const CovariateBox& domain);

/// As dpq_delta with the changed-orthant corner supplied by the caller.
double dpq_delta_at(const Eigen::Ref<const Eigen::VectorXd>& corner, const MonotoneSurface& old_surface,
                    const MonotoneSurface& new_surface, const MonotoneSurface& other, double p, double q,
                    const CovariateBox& domain);

/// D_{p,q}(lambda_k, lambda_k') over A_{k,k'} for the graph's domain mode.
double pair_discrepancy(const RegionGraph& graph, int k, int kp, const MonotoneSurface& a,
                        const MonotoneSurface& b, double p, double q);

/// Log prior ratio of replacing surfaces[k] by new_surface: the Gibbs pair terms
/// over k's neighbours plus delta_n * log(1 - 1/eta).
double prior_log_ratio(int k, const MonotoneSurface& old_surface, const MonotoneSurface& new_surface,
                       const std::vector<MonotoneSurface>& surfaces, const RegionGraph& graph,
                       const PriorConfig& prior, int delta_n);

/// Same with a known changed-orthant corner (sampler hot path).
double prior_log_ratio_at(const Eigen::Ref<const Eigen::VectorXd>& corner, int k,
                          const MonotoneSurface& old_surface, const MonotoneSurface& new_surface,
                          const std::vector<MonotoneSurface>& surfaces, const RegionGraph& graph,
                          const PriorConfig& prior, int delta_n);

/// Unnormalised log joint prior over all K surfaces.
double log_prior(const std::vector<MonotoneSurface>& surfaces, const RegionGraph& graph, const PriorConfig& prior);

}  // namespace bsmmr
