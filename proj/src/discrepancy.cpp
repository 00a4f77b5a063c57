#include "bsmmr/discrepancy.hpp"

#include <cmath>

namespace bsmmr {

namespace {

void require_covered(const CovariateBox& domain, const MonotoneSurface& s) {
  if (!s.box().contains(domain)) throw Error(ErrorCode::DomainNotCovered, "integration domain exceeds a sampling box");
}

}  // namespace

CellDecomposition::CellDecomposition(const CovariateBox& domain, const MonotoneSurface& a, const MonotoneSurface& b)
    : grid(domain, {&a, &b}) {
  grid.levels(a, levels_a);
  grid.levels(b, levels_b);
}

double dpq(const MonotoneSurface& a, const MonotoneSurface& b, double p, double q, const CovariateBox& domain) {
  require_covered(domain, a);
  require_covered(domain, b);
  if (!domain.valid()) return 0.0;
  const CellDecomposition cells(domain, a, b);
  const double off_a = a.delta_min();
  const double off_b = b.delta_min();
  double total = 0.0;
  cells.grid.for_each_cell([&](std::size_t c, double vol) {
    total += vol * integrand(cells.levels_a[c] - off_a, cells.levels_b[c] - off_b, p, q);
  });
  return total;
}

double dpq_delta_at(const Eigen::Ref<const Eigen::VectorXd>& corner, const MonotoneSurface& old_surface,
                    const MonotoneSurface& new_surface, const MonotoneSurface& other, double p, double q,
                    const CovariateBox& domain) {
  require_covered(domain, old_surface);
  require_covered(domain, new_surface);
  require_covered(domain, other);
  const CovariateBox orthant{domain.lower.cwiseMax(corner), domain.upper};
  if (!orthant.valid()) return 0.0;
  const RectilinearGrid grid(orthant, {&old_surface, &new_surface, &other});
  std::vector<double> lo, ln, lt;
  grid.levels(old_surface, lo);
  grid.levels(new_surface, ln);
  grid.levels(other, lt);
  const double off = old_surface.delta_min();
  const double off_t = other.delta_min();
  double total = 0.0;
  grid.for_each_cell([&](std::size_t c, double vol) {
    if (lo[c] == ln[c]) return;
    const double t = lt[c] - off_t;
    total += vol * (integrand(ln[c] - off, t, p, q) - integrand(lo[c] - off, t, p, q));
  });
  return total;
}

double dpq_delta(const MonotoneSurface& old_surface, const MonotoneSurface& new_surface,
                 const MonotoneSurface& other, double p, double q, const CovariateBox& domain) {
  require_covered(domain, old_surface);
  require_covered(domain, new_surface);
  require_covered(domain, other);
  const auto corner = changed_corner(old_surface, new_surface);
  if (!corner) return 0.0;
  return dpq_delta_at(*corner, old_surface, new_surface, other, p, q, domain);
}

double pair_discrepancy(const RegionGraph& graph, int k, int kp, const MonotoneSurface& a,
                        const MonotoneSurface& b, double p, double q) {
  double total = 0.0;
  for (const auto& piece : graph.pair_domain(k, kp)) total += piece.sign * dpq(a, b, p, q, piece.box);
  return total;
}

double prior_log_ratio_at(const Eigen::Ref<const Eigen::VectorXd>& corner, int k,
                          const MonotoneSurface& old_surface, const MonotoneSurface& new_surface,
                          const std::vector<MonotoneSurface>& surfaces, const RegionGraph& graph,
                          const PriorConfig& prior, int delta_n) {
  double coupling = 0.0;
  if (prior.omega > 0.0) {
    for (int kp = 0; kp < graph.region_count(); ++kp) {
      if (kp == k) continue;
      const double w = graph.weights(k, kp);
      if (w <= 0.0) continue;
      double d = 0.0;
      for (const auto& piece : graph.pair_domain(k, kp))
        d += piece.sign * dpq_delta_at(corner, old_surface, new_surface, surfaces[kp], prior.p, prior.q, piece.box);
      coupling += w * d;
    }
  }
  return -prior.omega * coupling + delta_n * std::log1p(-1.0 / prior.eta);
}

double prior_log_ratio(int k, const MonotoneSurface& old_surface, const MonotoneSurface& new_surface,
                       const std::vector<MonotoneSurface>& surfaces, const RegionGraph& graph,
                       const PriorConfig& prior, int delta_n) {
  const auto corner = changed_corner(old_surface, new_surface);
  if (!corner) return delta_n * std::log1p(-1.0 / prior.eta);
  return prior_log_ratio_at(*corner, k, old_surface, new_surface, surfaces, graph, prior, delta_n);
}

double log_prior(const std::vector<MonotoneSurface>& surfaces, const RegionGraph& graph, const PriorConfig& prior) {
  double total = 0.0;
  const int k = graph.region_count();
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const double w = graph.weights(a, b);
      if (w <= 0.0 || prior.omega == 0.0) continue;
      total -= prior.omega * w * pair_discrepancy(graph, a, b, surfaces[a], surfaces[b], prior.p, prior.q);
    }
    total += surfaces[a].size() * std::log1p(-1.0 / prior.eta);
  }
  return total;
}

}  // namespace bsmmr
