#include <cmath>

#include "helpers.hpp"

#include "bsmmr/discrepancy.hpp"
#include "bsmmr/rjmcmc.hpp"
#include "bsmmr/rng.hpp"

using namespace bsmmr;
using namespace bsmmr::test;

namespace {

// Replays a fixed list of uniforms; normals and gammas are not expected.
class ScriptedSource final : public RandomSource {
 public:
  explicit ScriptedSource(std::vector<double> u) : u_(std::move(u)) {}
  double uniform() override { return u_.at(i_++); }
  double normal() override { return 0.0; }
  double gamma(double) override { return 1.0; }
  int binomial(int, double) override { return 0; }

 private:
  std::vector<double> u_;
  std::size_t i_ = 0;
};

Problem toy(int regions, double omega, MoveProbabilities moves = {}) {
  Rng rng(2);
  std::vector<CovariateBox> boxes(regions, unit2());
  std::vector<std::pair<int, int>> edges;
  for (int k = 0; k + 1 < regions; ++k) edges.push_back({k, k + 1});
  Dataset data;
  for (int k = 0; k < regions; ++k) {
    Eigen::MatrixXd x(20, 2);
    Eigen::VectorXd y(20);
    for (int t = 0; t < 20; ++t) {
      x(t, 0) = rng.uniform();
      x(t, 1) = rng.uniform();
      y(t) = 0.5 * (x(t, 0) + x(t, 1)) + 0.1 * rng.normal();
    }
    data.push_back(gaussian_rows(x, y));
  }
  PriorConfig prior;
  prior.omega = omega;
  prior.moves = moves;
  prior.n_max = 20;
  return validate_problem(RegionGraph::from_edges(boxes, edges), data, prior, {});
}

SamplerSchedule schedule(std::int64_t it, std::int64_t burn, std::int64_t thin, std::uint64_t seed = 5) {
  SamplerSchedule s;
  s.iterations = it;
  s.burn_in = burn;
  s.thin = thin;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(Rjmcmc, DeathOnEmptyIsInstantReject) {
  const auto p = toy(1, 0.0);
  const auto st = initial_state(p);
  Rng rng(1);
  for (SubsetMask s = 1; s <= 3; ++s) EXPECT_FALSE(propose(p, st, 0, MoveKind::Death, s, rng));
  EXPECT_FALSE(propose(p, st, 0, MoveKind::Shift, 3, rng));
}

TEST(Rjmcmc, BirthRatioOnEmptySubprocess) {
  const auto p = toy(1, 0.0);
  const auto st = initial_state(p);
  for (SubsetMask s = 1; s <= 3; ++s) {
    ScriptedSource src({0.3, 0.6, 0.25});
    const auto prop = propose(p, st, 0, MoveKind::Birth, s, src);
    ASSERT_TRUE(prop);
    // |X_i| = 1 on the unit box; equal birth/death probabilities.
    EXPECT_NEAR(prop->log_proposal_ratio, std::log(1.0 * (1.0 - 0.0) / 1.0), 1e-15);
    EXPECT_EQ(prop->subset, s);
  }
  const CovariateBox wide(v({0.0, 0.0}), v({2.0, 0.5}));
  const auto q = validate_problem(RegionGraph::from_edges({wide}, {}), {empty_rows(2)}, {}, {});
  const auto sq = initial_state(q);
  ScriptedSource src({0.3, 0.6, 0.25});
  const auto prop = propose(q, sq, 0, MoveKind::Birth, 1, src);
  ASSERT_TRUE(prop);
  EXPECT_NEAR(prop->log_proposal_ratio, std::log(2.0), 1e-15);
}

TEST(Rjmcmc, ShiftWithUnchangedLevelHasZeroRatio) {
  const auto p = toy(1, 0.0);
  auto st = initial_state(p);
  st.surfaces[0] = surface(unit2(), {{v({0.3, 0.3}), 0.4}, {v({0.7, 0.7}), 0.8}});
  refresh_levels(p, st);
  const auto prop = make_shift(p, st, 0, 3, 0, {v({0.35, 0.2}), 0.4});
  ASSERT_TRUE(prop);
  // Same interval width at both locations, same level: the ratio is exactly 0.
  EXPECT_NEAR(prop->log_proposal_ratio, 0.0, 1e-15);
}

TEST(Rjmcmc, FlatShiftRatioIsProposalOnly) {
  auto base = toy(1, 0.0);
  Dataset none{empty_rows(2)};
  const auto p = validate_problem(base.graph, none, base.prior, base.likelihood);
  auto st = initial_state(p);
  st.surfaces[0] = surface(unit2(), {{v({0.3, 0.3}), 0.4}, {v({0.7, 0.7}), 0.8}});
  refresh_levels(p, st);
  const auto prop = make_shift(p, st, 0, 3, 0, {v({0.35, 0.2}), 0.6});
  ASSERT_TRUE(prop);
  EXPECT_NEAR(acceptance_log_ratio(*prop, st, p), prop->log_proposal_ratio, 1e-15);
  // Weights are levels above delta_min: old {0.4, 0.8}, new {0.6, 0.8}.
  EXPECT_NEAR(prop->log_proposal_ratio, std::log(0.6 * 1.2 / (0.4 * 1.4)), 1e-12);
}

TEST(Rjmcmc, BirthDeathAntisymmetry) {
  const auto p = toy(2, 1.0);
  auto st = initial_state(p);
  st.surfaces[0] = surface(unit2(), {{v({0.2, 0.6}), 0.3}});
  st.surfaces[1] = surface(unit2(), {{v({0.4, 0.4}), 0.5}});
  refresh_levels(p, st);
  const SupportPoint pt{v({0.5, 0.7}), 0.45};
  const auto birth = make_birth(p, st, 0, pt);
  ASSERT_TRUE(birth);
  const double fwd = acceptance_log_ratio(*birth, st, p);
  auto after = st;
  after.surfaces[0] = birth->proposed;
  refresh_levels(p, after);
  int j = 0;
  while (!(after.surfaces[0].points(3)[j] == pt)) ++j;
  const auto death = make_death(p, after, 0, 3, j);
  ASSERT_TRUE(death);
  EXPECT_NEAR(fwd + acceptance_log_ratio(*death, after, p), 0.0, 1e-10);
}

TEST(Rjmcmc, AcceptanceMatchesPosteriorOracle) {
  const auto p = toy(2, 1.0);
  auto st = initial_state(p);
  st.surfaces[0] = surface(unit2(), {{v({0.3, 0.3}), 0.4}});
  st.surfaces[1] = surface(unit2(), {{v({0.6, 0.5}), 0.7}});
  refresh_levels(p, st);
  auto posterior = [&](const std::vector<MonotoneSurface>& s) {
    return log_prior(s, p.graph, p.prior) + log_likelihood(p, 0, s[0], st.nuisance) +
           log_likelihood(p, 1, s[1], st.nuisance);
  };
  const auto birth = make_birth(p, st, 1, {v({0.2, 0.1}), 0.3});
  ASSERT_TRUE(birth);
  auto s = st.surfaces;
  s[1] = birth->proposed;
  EXPECT_NEAR(acceptance_log_ratio(*birth, st, p) - birth->log_proposal_ratio, posterior(s) - posterior(st.surfaces),
              1e-10);
}

TEST(Rjmcmc, ShiftOnlyLeavesEmptyStateUnchanged) {
  const auto p = toy(2, 0.5, {0.0, 0.0, 1.0});
  SamplerState st = initial_state(p);
  const auto before = st.surfaces;
  Rng rng(3);
  MoveCounters c;
  for (int i = 0; i < 100; ++i) step(p, st, rng, &c);
  EXPECT_EQ(st.surfaces, before);
  EXPECT_EQ(c.proposed[2], 200);
  EXPECT_EQ(c.instant_rejected[2], 200);
}

TEST(Rjmcmc, ScriptedBirthIsAccepted) {
  const auto p = toy(1, 0.0, {0.5, 0.5, 0.0});
  SamplerState st = initial_state(p);
  // subprocess {1,2}, Birth, location (0.5, 0.5), level 0.5, accept; the sigma2 draw uses gamma().
  ScriptedSource src({0.9, 0.1, 0.5, 0.5, 0.5, 0.0});
  MoveCounters c;
  step(p, st, src, &c);
  EXPECT_EQ(c.proposed[0], 1);
  EXPECT_EQ(c.accepted[0], 1);
  ASSERT_EQ(st.surfaces[0].size(), 1);
  EXPECT_EQ(st.surfaces[0].points(3)[0], (SupportPoint{v({0.5, 0.5}), 0.5}));
}

TEST(Rjmcmc, InvariantsHoldAlongChain) {
  const auto p = toy(3, 2.0);
  SamplerState st = initial_state(p);
  Rng rng(17);
  for (int i = 1; i <= 5000; ++i) {
    step(p, st, rng);
    if (i % 1000) continue;
    for (const auto& s : st.surfaces) {
      EXPECT_LE(s.size(), p.prior.n_max);
      std::vector<SupportPoint> pts;
      s.for_each_point([&](SubsetMask sub, const SupportPoint& pt) {
        EXPECT_TRUE(s.in_subspace(sub, pt.location));
        pts.push_back(pt);
      });
      for (const auto& a : pts)
        for (const auto& b : pts)
          if (precedes(a.location, b.location)) {
            EXPECT_LE(a.level, b.level);
          }
    }
  }
}

TEST(Rjmcmc, RunShapes) {
  const auto p = toy(2, 1.0);
  auto sch = schedule(300, 300, 1);
  sch.trace_points = {{v({0.5, 0.5}), v({0.2, 0.9})}, {v({0.1, 0.1})}};
  const auto empty = run(p, sch);
  EXPECT_TRUE(empty.empty());
  EXPECT_EQ(empty.counters.total_proposed(), 0);
  ASSERT_EQ(empty.traces.size(), 3u);
  for (const auto& t : empty.traces) EXPECT_EQ(t.values.size(), 300u);

  const auto c = run(p, schedule(1000, 200, 7));
  EXPECT_EQ(static_cast<std::int64_t>(c.samples.size()), (1000 - 200) / 7);
  EXPECT_EQ(c.counters.total_proposed(), 800 * 2);
}

TEST(Rjmcmc, Deterministic) {
  const auto p = toy(2, 1.0);
  auto sch = schedule(2000, 500, 10, 99);
  sch.trace_points = {{v({0.5, 0.5})}, {}};
  EXPECT_EQ(run(p, sch), run(p, sch));
  auto other = sch;
  other.seed = 100;
  EXPECT_FALSE(run(p, sch) == run(p, other));
}

TEST(Rjmcmc, CheckpointResumeIsExact) {
  const auto p = toy(2, 1.0);
  auto sch = schedule(1500, 300, 5);
  sch.trace_points = {{v({0.5, 0.5})}, {v({0.9, 0.1})}};
  Sampler whole(p, sch);
  whole.run();
  Sampler first(p, sch);
  first.advance(700);
  Sampler second(p, sch, first.checkpoint());
  second.run();
  EXPECT_TRUE(second.done());
  EXPECT_EQ(second.chain(), whole.chain());
}
