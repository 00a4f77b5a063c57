#include "bsmmr/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "bsmmr/likelihood.hpp"

namespace bsmmr {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TrueFunction TrueFunction::constant(double base) {
  TrueFunction f;
  f.kind_ = Kind::Constant;
  f.base_ = base;
  return f;
}

TrueFunction TrueFunction::staircase(double base, std::vector<Eigen::VectorXd> corners, std::vector<double> jumps) {
  if (corners.size() != jumps.size()) throw Error(ErrorCode::DimensionMismatch, "one jump per corner");
  TrueFunction f;
  f.kind_ = Kind::Staircase;
  f.base_ = base;
  f.corners_ = std::move(corners);
  f.jumps_ = std::move(jumps);
  if (!f.corners_.empty()) {
    CovariateBox box{f.corners_.front(), f.corners_.front()};
    for (const auto& c : f.corners_) box = {box.lower.cwiseMin(c), box.upper.cwiseMax(c)};
    box.lower.array() -= 1.0;
    box.upper.array() += 1.0;
    f.box_ = box;
    audit_monotone(f, box);
  }
  return f;
}

TrueFunction TrueFunction::step(const Eigen::VectorXd& corner, double jump, double base) {
  return staircase(base, {corner}, {jump});
}

TrueFunction TrueFunction::product(const CovariateBox& box, double scale, double base) {
  TrueFunction f;
  f.kind_ = Kind::Product;
  f.box_ = box;
  f.scale_ = scale;
  f.base_ = base;
  audit_monotone(f, box);
  return f;
}

TrueFunction TrueFunction::additive(const CovariateBox& box, Eigen::VectorXd weights, Eigen::VectorXd powers,
                                    double base) {
  if (weights.size() != box.dim() || powers.size() != box.dim())
    throw Error(ErrorCode::DimensionMismatch, "additive truth needs one weight and power per axis");
  TrueFunction f;
  f.kind_ = Kind::Additive;
  f.box_ = box;
  f.weights_ = std::move(weights);
  f.powers_ = std::move(powers);
  f.base_ = base;
  audit_monotone(f, box);
  return f;
}

TrueFunction TrueFunction::mixture(std::vector<TrueFunction> parts) {
  TrueFunction f;
  f.kind_ = Kind::Mixture;
  f.parts_ = std::move(parts);
  bool have_box = false;
  for (const auto& p : f.parts_) {
    if (!p.box_.valid()) continue;
    f.box_ = have_box ? hull(f.box_, p.box_) : p.box_;
    have_box = true;
  }
  if (have_box) audit_monotone(f, f.box_);
  return f;
}

TrueFunction TrueFunction::surface(MonotoneSurface s) {
  TrueFunction f;
  f.kind_ = Kind::Surface;
  f.box_ = s.box();
  f.surface_ = std::move(s);
  return f;
}

namespace {

// Axis d of x rescaled to [0, 1] on box; clamped so the extension outside stays monotone.
double unit_coordinate(const CovariateBox& box, const Eigen::Ref<const Eigen::VectorXd>& x, int d) {
  return std::clamp((x(d) - box.lower(d)) / (box.upper(d) - box.lower(d)), 0.0, 1.0);
}

}  // namespace

double TrueFunction::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  switch (kind_) {
    case Kind::Constant: return base_;
    case Kind::Staircase: {
      double v = base_;
      for (std::size_t i = 0; i < corners_.size(); ++i)
        if (precedes(corners_[i], x)) v += jumps_[i];
      return v;
    }
    case Kind::Product: {
      double v = 1.0;
      for (int d = 0; d < box_.dim(); ++d) v *= unit_coordinate(box_, x, d);
      return base_ + scale_ * v;
    }
    case Kind::Additive: {
      double v = base_;
      for (int d = 0; d < box_.dim(); ++d) {
        v += weights_(d) * std::pow(unit_coordinate(box_, x, d), powers_(d));
      }
      return v;
    }
    case Kind::Mixture: {
      double v = 0.0;
      for (const auto& p : parts_) v += p(x);
      return v;
    }
    case Kind::Surface: return evaluate(*surface_, x);
  }
  return 0.0;
}

void audit_monotone(const TrueFunction& f, const CovariateBox& box, int pairs, std::uint64_t seed) {
  Rng rng(seed);
  const int m = box.dim();
  Eigen::VectorXd u(m), v(m);
  for (int i = 0; i < pairs; ++i) {
    for (int d = 0; d < m; ++d) {
      u(d) = rng.uniform(box.lower(d), box.upper(d));
      v(d) = rng.uniform(u(d), box.upper(d));
    }
    if (f(u) > f(v) + 1e-12) throw Error(ErrorCode::MonotoneViolation, "true function is not monotone");
  }
}

Eigen::MatrixXd sample_covariates(const CovariateBox& box, int count, const SamplingLaw& law, RandomSource& rng) {
  const int m = box.dim();
  Eigen::MatrixXd x(count, m);
  auto draw = [&](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, Eigen::Index row) {
    for (int d = 0; d < m; ++d) x(row, d) = rng.uniform(lo(d), hi(d));
  };
  if (law.kind == SamplingLaw::Kind::Uniform) {
    for (int t = 0; t < count; ++t) draw(box.lower, box.upper, t);
    return x;
  }
  if (law.corner.size() != m || !box.contains(law.corner))
    throw Error(ErrorCode::OutOfDomain, "threshold corner outside region box");
  if (law.above < 0 || law.above > count) throw Error(ErrorCode::Config, "threshold split count");
  int t = 0;
  for (; t < law.above; ++t) draw(law.corner, box.upper, t);
  for (; t < count; ++t) {
    do {
      draw(box.lower, box.upper, t);
    } while (precedes(law.corner, x.row(t).transpose()));
  }
  return x;
}

Dataset gen_gaussian(const std::vector<RegionDesign>& regions, std::uint64_t seed) {
  Dataset out;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const auto& r = regions[k];
    if (r.sigma < 0) throw Error(ErrorCode::BadHyperparameter, "sigma must be >= 0");
    Rng rng = Rng::stream(seed, {1, k});
    RegionData data;
    data.x = sample_covariates(r.box, r.count, r.law, rng);
    data.y.resize(r.count);
    for (int t = 0; t < r.count; ++t) data.y(t) = r.alpha + r.truth(data.x.row(t).transpose()) + r.sigma * rng.normal();
    out.push_back(std::move(data));
  }
  return out;
}

Dataset gen_binomial(const std::vector<RegionDesign>& regions, std::uint64_t seed) {
  Dataset out;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const auto& r = regions[k];
    if (r.trials < 1) throw Error(ErrorCode::BadHyperparameter, "trials must be >= 1");
    Rng rng = Rng::stream(seed, {2, k});
    RegionData data;
    data.x = sample_covariates(r.box, r.count, r.law, rng);
    data.y.resize(r.count);
    data.trials = Eigen::VectorXi::Constant(r.count, r.trials);
    for (int t = 0; t < r.count; ++t)
      data.y(t) = rng.binomial(r.trials, logistic(r.alpha + r.truth(data.x.row(t).transpose())));
    out.push_back(std::move(data));
  }
  return out;
}

RegionGraph Network::graph(std::vector<CovariateBox> boxes, DomainMode mode) const {
  if (static_cast<int>(boxes.size()) != regions) throw Error(ErrorCode::InvalidGraph, "one box per region");
  return RegionGraph::from_edges(std::move(boxes), edges, mode);
}

Network chain5() { return {"chain5", {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 5}; }

Network hub5() { return {"hub5", {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 4}, {1, 3}}, 5}; }

std::vector<Network> builtin_networks() { return {chain5(), hub5()}; }

namespace {

const CovariateBox kUnit = CovariateBox::unit(2);

// Four-step staircase rising from 0 to 2 along the diagonal.
TrueFunction diagonal_staircase(double shift = 0.0, double scale = 1.0) {
  return TrueFunction::staircase(0.0,
                                 {vec({0.25 + shift, 0.25 + shift}), vec({0.5 + shift, 0.2 + shift}),
                                  vec({0.2 + shift, 0.6 + shift}), vec({0.55 + shift, 0.55 + shift}),
                                  vec({0.8 + shift, 0.75 + shift})},
                                 {0.4 * scale, 0.3 * scale, 0.3 * scale, 0.5 * scale, 0.5 * scale});
}

Scenario two_region(std::string name, std::string description, TrueFunction a, TrueFunction b) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.graph = RegionGraph::from_edges({kUnit, kUnit}, {{0, 1}});
  s.regions = {RegionDesign{kUnit, std::move(a), 1000, {}}, RegionDesign{kUnit, std::move(b), 100, {}}};
  s.prior.delta_min = 0.0;
  s.prior.delta_max = 2.0;
  s.prior.eta = 2.0;
  return s;
}

Scenario pq_study(std::string name, std::string description, int above_1, int above_2) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.graph = RegionGraph::from_edges({kUnit, kUnit}, {{0, 1}});
  // Shared lower levels, different upper plateaus above the threshold.
  const auto lower = TrueFunction::additive(kUnit, vec({0.3, 0.3}), vec({1.0, 1.0}));
  const auto t1 = TrueFunction::mixture({lower, TrueFunction::step(vec({0.5, 0.5}), 1.2)});
  const auto t2 = TrueFunction::mixture({lower, TrueFunction::step(vec({0.5, 0.5}), 0.8)});
  auto law = [](int above) {
    return above < 0 ? SamplingLaw::uniform() : SamplingLaw::threshold_split(vec({0.5, 0.5}), above);
  };
  s.regions = {RegionDesign{kUnit, t1, 200, law(above_1), 0.0, 0.2},
               RegionDesign{kUnit, t2, 200, law(above_2), 0.0, 0.3}};
  s.prior.delta_max = 2.0;
  return s;
}

Scenario network1() {
  Scenario s;
  s.name = "network1-binomial";
  s.description = "five regions on a chain, maximum level rising from region 1 to 5";
  s.binomial = true;
  s.graph = chain5().graph(std::vector<CovariateBox>(5, kUnit));
  for (int k = 0; k < 5; ++k) {
    const double w = k / 4.0;
    const double top = 1.8 + 0.3 * k;
    auto smooth = TrueFunction::additive(kUnit, vec({0.6 * top * (1 - w), 0.6 * top * w}), vec({2.0, 1.0}));
    auto jump = TrueFunction::step(vec({0.5, 0.5}), 0.4 * top);
    s.regions.push_back(RegionDesign{kUnit, TrueFunction::mixture({smooth, jump}), 300, {}});
  }
  s.prior.delta_max = 3.0;
  return s;
}

Scenario network2() {
  Scenario s;
  s.name = "network2-binomial";
  s.description = "five regions around a hub with shifted first-axis ranges";
  s.binomial = true;
  const double lo[5] = {0.0, 0.2, 0.0, 0.1, 0.0};
  const double hi[5] = {0.7, 1.0, 0.7, 0.9, 0.7};
  const int counts[5] = {100, 500, 200, 300, 200};
  std::vector<CovariateBox> boxes;
  for (int k = 0; k < 5; ++k) boxes.push_back({vec({lo[k], 0.0}), vec({hi[k], 1.0})});
  s.graph = hub5().graph(boxes, DomainMode::Union);
  for (int k = 0; k < 5; ++k) {
    const double top = 2.6 + 0.1 * k;
    auto smooth = TrueFunction::additive(kUnit, vec({0.4 * top, 0.3 * top}), vec({1.0, 2.0}));
    auto jump = TrueFunction::step(vec({0.6, 0.4}), 0.3 * top);
    s.regions.push_back(RegionDesign{boxes[k], TrueFunction::mixture({smooth, jump}), counts[k], {}});
  }
  s.prior.delta_max = 3.0;
  return s;
}

Scenario single_region(std::string name, std::string description, TrueFunction truth, int count) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.graph = RegionGraph::from_edges({kUnit}, {});
  s.regions = {RegionDesign{kUnit, std::move(truth), count, {}, 0.0, 0.1}};
  s.prior.delta_max = 2.0;
  return s;
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"study1-gaussian",   "study2-gaussian",   "study3-gaussian",   "study4-gaussian",
          "study5-gaussian",   "pq-study1",         "pq-study2",         "pq-study3",
          "network1-binomial", "network2-binomial", "relevance-gaussian", "threshold-gaussian"};
}

Scenario make_scenario(const std::string& name) {
  const auto smooth = [](double w1, double p1, double w2, double p2) {
    return TrueFunction::additive(kUnit, vec({w1, w2}), vec({p1, p2}));
  };
  if (name == "study1-gaussian")
    return two_region(name, "identical continuous truths", smooth(1.0, 2.0, 1.0, 1.0), smooth(1.0, 2.0, 1.0, 1.0));
  if (name == "study2-gaussian")
    return two_region(name, "identical discontinuous truths", diagonal_staircase(), diagonal_staircase());
  if (name == "study3-gaussian")
    return two_region(name, "similar continuous truths", smooth(1.0, 2.0, 1.0, 1.0), smooth(0.9, 1.5, 1.1, 1.2));
  if (name == "study4-gaussian")
    return two_region(name, "similar discontinuous truths", diagonal_staircase(),
                      diagonal_staircase(0.05, 0.9));
  if (name == "study5-gaussian")
    return two_region(name, "different continuous truths", smooth(1.8, 2.0, 0.2, 1.0), smooth(0.2, 1.0, 1.8, 0.5));
  if (name == "pq-study1") return pq_study(name, "threshold at (0.5, 0.5), 150:50 above:below", 150, 150);
  if (name == "pq-study2") return pq_study(name, "threshold at (0.5, 0.5), uniform covariates", -1, -1);
  if (name == "pq-study3") return pq_study(name, "threshold at (0.5, 0.5), 25:175 above:below", 25, 25);
  if (name == "network1-binomial") return network1();
  if (name == "network2-binomial") return network2();
  // Single-region truths start at delta_min: alpha is fixed at 0 there, so a
  // raised base would need a spurious point near the lower corner.
  if (name == "relevance-gaussian")
    return single_region(name, "truth depends on x2 only",
                         TrueFunction::staircase(0.0, {vec({0.0, 0.3}), vec({0.0, 0.7})}, {0.6, 0.6}), 500);
  if (name == "threshold-gaussian")
    return single_region(name, "single step at (0.5, 0.5)", TrueFunction::step(vec({0.5, 0.5}), 1.0), 500);
  throw Error(ErrorCode::Config, "unknown preset '" + name + "'");
}

}  // namespace bsmmr
