#include "bsmmr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace bsmmr {

namespace {

void require_samples(const Chain& chain, int k) {
  if (chain.samples.empty()) throw Error(ErrorCode::EmptyChain, "chain holds no samples");
  if (k < 0 || k >= static_cast<int>(chain.samples.front().surfaces.size()))
    throw Error(ErrorCode::DimensionMismatch, "region index out of range");
}

}  // namespace

double empirical_quantile(std::vector<double>& values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptyChain, "quantile of no values");
  const auto r = static_cast<double>(values.size());
  auto idx = static_cast<std::ptrdiff_t>(std::ceil(q * r)) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
  std::nth_element(values.begin(), values.begin() + idx, values.end());
  return values[static_cast<std::size_t>(idx)];
}

Eigen::MatrixXd grid_points(const CovariateBox& box, const Eigen::VectorXi& resolution) {
  const int m = box.dim();
  if (resolution.size() != m || (resolution.array() < 1).any())
    throw Error(ErrorCode::DimensionMismatch, "grid resolution");
  const Eigen::Index cells = resolution.prod();
  Eigen::MatrixXd pts(cells, m);
  std::vector<int> idx(m, 0);
  for (Eigen::Index c = 0; c < cells; ++c) {
    for (int d = 0; d < m; ++d) {
      const double w = (box.upper(d) - box.lower(d)) / resolution(d);
      pts(c, d) = box.lower(d) + (idx[d] + 0.5) * w;
    }
    for (int d = m - 1; d >= 0; --d) {
      if (++idx[d] < resolution(d)) break;
      idx[d] = 0;
    }
  }
  return pts;
}

GridEstimate grid_summary(const Chain& chain, int k, const Eigen::VectorXi& resolution,
                          const std::vector<double>& quantiles) {
  require_samples(chain, k);
  return grid_summary(chain, k, chain.samples.front().surfaces[k].box(), resolution, quantiles);
}

GridEstimate grid_summary(const Chain& chain, int k, const CovariateBox& box, const Eigen::VectorXi& resolution,
                          const std::vector<double>& quantiles) {
  require_samples(chain, k);
  if (!chain.samples.front().surfaces[k].box().contains(box))
    throw Error(ErrorCode::OutOfDomain, "grid box leaves the surface's sampling box");
  GridEstimate g;
  g.region = k;
  g.resolution = resolution;
  g.box = box;
  g.points = grid_points(g.box, resolution);
  g.quantile_levels = quantiles;
  const Eigen::Index cells = g.points.rows();
  g.mean.resize(cells);
  g.quantiles.resize(cells, static_cast<Eigen::Index>(quantiles.size()));
  std::vector<double> values(chain.samples.size());
  for (Eigen::Index c = 0; c < cells; ++c) {
    const Eigen::VectorXd x = g.points.row(c).transpose();
    double total = 0.0;
    for (std::size_t r = 0; r < chain.samples.size(); ++r) {
      const auto& s = chain.samples[r];
      values[r] = s.nuisance.alpha(k) + evaluate_unchecked(s.surfaces[k], x);
      total += values[r];
    }
    g.mean(c) = total / static_cast<double>(values.size());
    for (std::size_t q = 0; q < quantiles.size(); ++q)
      g.quantiles(c, static_cast<Eigen::Index>(q)) = empirical_quantile(values, quantiles[q]);
  }
  return g;
}

GridEstimate grid_summary(const Chain& chain, int k, int resolution, const std::vector<double>& quantiles) {
  require_samples(chain, k);
  const int m = chain.samples.front().surfaces[k].dim();
  return grid_summary(chain, k, Eigen::VectorXi::Constant(m, resolution), quantiles);
}

ErrorSummary mae_sd(const GridEstimate& estimate, const TruthFn& truth) {
  const Eigen::Index n = estimate.points.rows();
  if (n == 0) return {};
  Eigen::VectorXd diff(n);
  for (Eigen::Index c = 0; c < n; ++c) diff(c) = estimate.mean(c) - truth(estimate.points.row(c).transpose());
  const double mean = diff.mean();
  return {diff.cwiseAbs().mean(), std::sqrt((diff.array() - mean).square().mean())};
}

double point_jump(const MonotoneSurface& surface, SubsetMask s, int j) {
  const auto& pt = surface.points(s).at(j);
  return pt.level - level_bounds_excluding(surface, s, j, pt.location).lower;
}

ThresholdReport detect_thresholds(const Chain& chain, int k, const ThresholdOptions& options) {
  require_samples(chain, k);
  const auto& first = chain.samples.front().surfaces[k];
  const double range = first.delta_max() - first.delta_min();
  ThresholdReport report;
  report.region = k;
  report.location_tol = options.location_tol.value_or(0.05);
  report.level_tol = options.level_tol.value_or(0.1 * range);
  report.min_jump = options.min_jump.value_or(0.1 * range);

  struct Candidate {
    std::size_t sample;
    Eigen::VectorXd location;
    double level;
    double jump;
  };
  std::vector<Candidate> candidates;
  for (std::size_t r = 0; r < chain.samples.size(); ++r) {
    const auto& surface = chain.samples[r].surfaces[k];
    for (int i = 1; i <= surface.subsets(); ++i) {
      const auto s = static_cast<SubsetMask>(i);
      for (int j = 0; j < surface.count(s); ++j) {
        const double jump = point_jump(surface, s, j);
        if (jump >= report.min_jump) candidates.push_back({r, surface.points(s)[j].location, surface.points(s)[j].level, jump});
      }
    }
  }
  // Descending jump; remaining ties broken on content only so the result does
  // not depend on sample order.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.jump != b.jump) return a.jump > b.jump;
    if (a.level != b.level) return a.level > b.level;
    return std::lexicographical_compare(a.location.begin(), a.location.end(), b.location.begin(), b.location.end());
  });

  struct Cluster {
    Eigen::VectorXd seed;
    double seed_level;
    Eigen::VectorXd location_sum;
    double level_sum = 0.0;
    double jump_sum = 0.0;
    int members = 0;
    std::set<std::size_t> samples;
  };
  std::vector<Cluster> clusters;
  for (const auto& c : candidates) {
    Cluster* home = nullptr;
    for (auto& cl : clusters) {
      if ((cl.seed - c.location).cwiseAbs().maxCoeff() <= report.location_tol &&
          std::abs(cl.seed_level - c.level) <= report.level_tol) {
        home = &cl;
        break;
      }
    }
    if (!home) {
      clusters.push_back(Cluster{c.location, c.level, Eigen::VectorXd::Zero(c.location.size()), 0.0, 0.0, 0, {}});
      home = &clusters.back();
    }
    home->location_sum += c.location;
    home->level_sum += c.level;
    home->jump_sum += c.jump;
    ++home->members;
    home->samples.insert(c.sample);
  }
  const auto r_total = static_cast<double>(chain.samples.size());
  for (const auto& cl : clusters) {
    ThresholdCluster out;
    out.location = cl.location_sum / cl.members;
    out.level = cl.level_sum / cl.members;
    out.jump = cl.jump_sum / cl.members;
    out.occurrence = static_cast<double>(cl.samples.size()) / r_total;
    out.members = cl.members;
    report.clusters.push_back(std::move(out));
  }
  std::stable_sort(report.clusters.begin(), report.clusters.end(),
                   [](const ThresholdCluster& a, const ThresholdCluster& b) { return a.occurrence > b.occurrence; });
  return report;
}

RelevanceReport variable_relevance(const Chain& chain, int k, double threshold) {
  require_samples(chain, k);
  const auto& first = chain.samples.front().surfaces[k];
  const int m = first.dim();
  RelevanceReport out;
  out.region = k;
  out.threshold = threshold;
  for (int i = 1; i <= first.subsets(); ++i) out.empty_probability[static_cast<SubsetMask>(i)] = 0.0;
  out.axis_redundancy = Eigen::VectorXd::Zero(m);
  for (const auto& sample : chain.samples) {
    const auto& surface = sample.surfaces[k];
    std::vector<bool> axis_empty(m, true);
    for (int i = 1; i <= surface.subsets(); ++i) {
      const auto s = static_cast<SubsetMask>(i);
      if (surface.points(s).empty()) {
        out.empty_probability[s] += 1.0;
        continue;
      }
      for (int d = 0; d < m; ++d)
        if (axis_active(s, d)) axis_empty[d] = false;
    }
    for (int d = 0; d < m; ++d)
      if (axis_empty[d]) out.axis_redundancy(d) += 1.0;
  }
  const auto r = static_cast<double>(chain.samples.size());
  for (auto& [s, p] : out.empty_probability) p /= r;
  out.axis_redundancy /= r;
  for (int d = 0; d < m; ++d) out.redundant.push_back(out.axis_redundancy(d) >= threshold);
  return out;
}

std::string grid_csv(const GridEstimate& estimate) {
  std::ostringstream os;
  os.precision(17);
  const auto m = estimate.points.cols();
  for (Eigen::Index d = 0; d < m; ++d) os << 'x' << d + 1 << ',';
  os << "mean";
  for (double q : estimate.quantile_levels) os << ",q" << q;
  os << '\n';
  for (Eigen::Index c = 0; c < estimate.points.rows(); ++c) {
    for (Eigen::Index d = 0; d < m; ++d) os << estimate.points(c, d) << ',';
    os << estimate.mean(c);
    for (Eigen::Index q = 0; q < estimate.quantiles.cols(); ++q) os << ',' << estimate.quantiles(c, q);
    os << '\n';
  }
  return os.str();
}

}  // namespace bsmmr
