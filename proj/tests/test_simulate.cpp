#include <cmath>

#include "helpers.hpp"

#include "bsmmr/simulate.hpp"

using namespace bsmmr;
using namespace bsmmr::test;

TEST(Simulate, NoiselessGaussianIsExact) {
  RegionDesign r{unit2(), TrueFunction::product(unit2(), 2.0, 0.1), 200, {}, 0.7, 0.0, 100};
  const auto d = gen_gaussian({r}, 3);
  ASSERT_EQ(d[0].size(), 200);
  for (Eigen::Index t = 0; t < 200; ++t)
    EXPECT_EQ(d[0].y(t), 0.7 + r.truth(d[0].x.row(t).transpose()));
}

TEST(Simulate, GaussianResidualsCentred) {
  RegionDesign r{unit2(), TrueFunction::step(v({0.5, 0.5}), 1.0), 1000, {}, 0.0, 0.05, 100};
  RegionDesign small = r;
  small.count = 100;
  const auto d = gen_gaussian({r, small}, 11);
  EXPECT_EQ(d[0].size(), 1000);
  EXPECT_EQ(d[1].size(), 100);
  double sum = 0.0;
  for (Eigen::Index t = 0; t < 1000; ++t) {
    EXPECT_TRUE(unit2().contains(d[0].x.row(t).transpose()));
    sum += d[0].y(t) - r.truth(d[0].x.row(t).transpose());
  }
  EXPECT_LT(std::abs(sum / 1000), 3 * 0.05 / std::sqrt(1000.0));
}

TEST(Simulate, BinomialAtZeroIsHalf) {
  RegionDesign r{unit2(), TrueFunction::constant(0.0), 2000, {}, 0.0, 0.05, 100};
  const auto d = gen_binomial({r}, 5);
  ASSERT_TRUE(d[0].trials);
  EXPECT_NEAR(d[0].y.sum() / (100.0 * 2000), 0.5, 0.005);
}

TEST(Simulate, ThresholdSplitCounts) {
  Rng rng(9);
  const auto x = sample_covariates(unit2(), 200, SamplingLaw::threshold_split(v({0.5, 0.5}), 150), rng);
  int above = 0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) above += (x(t, 0) >= 0.5 && x(t, 1) >= 0.5);
  EXPECT_EQ(above, 150);
}

TEST(Simulate, Networks) {
  const auto c = chain5().graph(std::vector<CovariateBox>(5, unit2()));
  const auto h = hub5().graph(std::vector<CovariateBox>(5, unit2()));
  Eigen::VectorXd deg = c.weights.rowwise().sum();
  EXPECT_EQ(deg, v({1, 2, 2, 2, 1}));
  EXPECT_EQ(h.weights.row(1).sum(), 4.0);
  for (const auto* g : {&c, &h}) {
    EXPECT_EQ(g->weights, g->weights.transpose());
    EXPECT_EQ(g->weights.diagonal().sum(), 0.0);
  }
  EXPECT_EQ(builtin_networks().size(), 2u);
}

TEST(Simulate, NetworkTwoDesign) {
  const auto s = make_scenario("network2-binomial");
  ASSERT_EQ(s.regions.size(), 5u);
  const int counts[] = {100, 500, 200, 300, 200};
  const double lo[] = {0.0, 0.2, 0.0, 0.1, 0.0}, hi[] = {0.7, 1.0, 0.7, 0.9, 0.7};
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(s.regions[k].count, counts[k]);
    EXPECT_DOUBLE_EQ(s.regions[k].box.lower(0), lo[k]);
    EXPECT_DOUBLE_EQ(s.regions[k].box.upper(0), hi[k]);
  }
  EXPECT_TRUE(s.binomial);
  EXPECT_EQ(s.graph.weights.row(1).sum(), 4.0);
}

TEST(Simulate, StudyDesignCounts) {
  const auto s = make_scenario("study1-gaussian");
  ASSERT_EQ(s.regions.size(), 2u);
  EXPECT_EQ(s.regions[0].count, 1000);
  EXPECT_EQ(s.regions[1].count, 100);
  EXPECT_EQ(s.regions[0].sigma, 0.05);
}

TEST(Simulate, ScenariosAreMonotoneAndDeterministic) {
  for (const auto& name : scenario_names()) {
    const auto s = make_scenario(name);
    for (const auto& r : s.regions) EXPECT_NO_THROW(audit_monotone(r.truth, r.box, 2000)) << name;
    const auto a = s.generate(4), b = s.generate(4);
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].x, b[k].x);
      EXPECT_EQ(a[k].y, b[k].y);
      for (Eigen::Index t = 0; t < a[k].x.rows(); ++t) EXPECT_TRUE(s.regions[k].box.contains(a[k].x.row(t).transpose()));
    }
  }
  EXPECT_EQ(code_of([] { make_scenario("no-such-preset"); }), ErrorCode::Config);
}

TEST(Simulate, AuditCatchesDecreasing) {
  EXPECT_EQ(code_of([] { TrueFunction::additive(unit2(), v({-1.0, 1.0}), v({1.0, 1.0})); }),
            ErrorCode::MonotoneViolation);
  const auto s = surface(unit2(), {{v({0.5, 0.5}), 0.5}});
  EXPECT_NO_THROW(audit_monotone(TrueFunction::surface(s), unit2(), 1000));
}

TEST(Simulate, TrueFunctionForms) {
  const auto st = TrueFunction::staircase(0.1, {v({0.2, 0.2}), v({0.6, 0.6})}, {0.3, 0.5});
  EXPECT_NEAR(st(v({0.1, 0.9})), 0.1, 1e-15);
  EXPECT_NEAR(st(v({0.3, 0.3})), 0.4, 1e-15);
  EXPECT_NEAR(st(v({0.7, 0.7})), 0.9, 1e-15);
  const auto add = TrueFunction::additive(unit2(), v({1.0, 2.0}), v({1.0, 2.0}), 0.5);
  EXPECT_NEAR(add(v({0.5, 0.5})), 0.5 + 0.5 + 2.0 * 0.25, 1e-15);
  const auto mix = TrueFunction::mixture({st, add});
  EXPECT_NEAR(mix(v({0.5, 0.5})), st(v({0.5, 0.5})) + add(v({0.5, 0.5})), 1e-15);
}
