#include <filesystem>

#include "helpers.hpp"

#include "bsmmr/io.hpp"
#include "bsmmr/rjmcmc.hpp"
#include "bsmmr/selftest.hpp"

using namespace bsmmr;
using namespace bsmmr::test;

TEST(Io, RegionCsvRoundTrip) {
  Rng rng(1);
  RegionData d;
  d.x = Eigen::MatrixXd::NullaryExpr(7, 2, [&] { return rng.uniform(); });
  d.y = Eigen::VectorXd::NullaryExpr(7, [&] { return rng.normal(); });
  const auto back = parse_region_csv(region_csv(d));
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
  EXPECT_FALSE(back.trials);

  d.trials = Eigen::VectorXi::Constant(7, 100);
  d.y = Eigen::VectorXd::Constant(7, 40);
  const auto bin = parse_region_csv(region_csv(d));
  ASSERT_TRUE(bin.trials);
  EXPECT_EQ(*bin.trials, *d.trials);
}

TEST(Io, RegionCsvErrors) {
  EXPECT_THROW(parse_region_csv("a,b,y\n0.1,0.2,0.3\n"), Error);
  EXPECT_THROW(parse_region_csv("x1,x2,y\n0.1,0.2\n"), Error);
  EXPECT_THROW(parse_region_csv("x1,x2,y\n0.1,zz,0.3\n"), Error);
  EXPECT_THROW(parse_region_csv("x1,y,trials\n0.1,3,2.5\n"), Error);
}

TEST(Io, SurfaceRoundTripIsBitExact) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto s = random_surface(CovariateBox::unit(3), -0.3, 1.7, 12, 40, rng);
    const auto text = surface_to_json(s).dump();
    EXPECT_EQ(surface_from_json(Json::parse(text)), s);
  }
}

TEST(Io, SurfaceSubsetMustMatchLocation) {
  const auto s = surface(unit2(), {{v({0.3, 0.0}), 0.4}});
  auto j = surface_to_json(s);
  j["points"][0]["subset"] = Json::array({1, 2});
  EXPECT_THROW(surface_from_json(j), Error);
}

TEST(Io, ChainAndCheckpointRoundTrip) {
  Eigen::MatrixXd x(10, 2);
  x.setConstant(0.5);
  const auto p = validate_problem(RegionGraph::from_edges({unit2(), unit2()}, {{0, 1}}),
                                  {gaussian_rows(x, Eigen::VectorXd::Constant(10, 0.4)),
                                   gaussian_rows(x, Eigen::VectorXd::Constant(10, 0.6))},
                                  {}, {});
  SamplerSchedule sch{300, 100, 10, {{v({0.5, 0.5})}, {v({0.2, 0.7})}}, 3};
  Sampler sampler(p, sch);
  sampler.advance(150);
  const auto cp = sampler.checkpoint();
  const auto cp2 = checkpoint_from_json(Json::parse(checkpoint_to_json(cp).dump()));
  EXPECT_EQ(cp2.surfaces, cp.surfaces);
  EXPECT_EQ(cp2.nuisance, cp.nuisance);
  EXPECT_EQ(cp2.rng_state, cp.rng_state);
  EXPECT_EQ(cp2.sweep, cp.sweep);
  EXPECT_EQ(cp2.chain, cp.chain);

  sampler.run();
  const auto& c = sampler.chain();
  EXPECT_EQ(chain_from_json(Json::parse(chain_to_json(c).dump())), c);
  const auto no_traces = chain_from_json(chain_to_json(c, false));
  EXPECT_TRUE(no_traces.traces.empty());
  EXPECT_EQ(no_traces.samples, c.samples);

  const auto csv = trace_csv(c);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sweep,region,point,level");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 300);
}

TEST(Io, ConfigRoundTripAndUnknownKeys) {
  RunConfig c;
  c.regions = {{unit2(), "region1.csv"}, {CovariateBox(v({0.2, 0.0}), v({1.0, 1.0})), "region2.csv"}};
  c.edges = {{0, 1}};
  c.domain_mode = DomainMode::Union;
  c.prior.omega = 12.5;
  c.prior.p = -1.0;
  CarBaseline car;
  car.initial = v({-0.5, 0.25});
  c.likelihood.baseline = car;
  c.likelihood.family = BinomialFamily{};
  c.cv.transform = OmegaTransform::Log;
  c.cv.fold_schedule.iterations = 999;
  c.seed = 42;
  const Json j = config_to_json(c);
  const auto back = config_from_json(Json::parse(j.dump()));
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.regions[1].box, c.regions[1].box);
  EXPECT_EQ(std::get<CarBaseline>(back.likelihood.baseline).initial, car.initial);

  Json bad = j;
  bad["prior"]["omgea"] = 1.0;
  EXPECT_EQ(code_of([&] { config_from_json(bad); }), ErrorCode::Config);
  bad = j;
  bad["extra"] = true;
  EXPECT_EQ(code_of([&] { config_from_json(bad); }), ErrorCode::Config);
  bad = j;
  bad["prior"]["eta"] = "two";
  EXPECT_EQ(code_of([&] { config_from_json(bad); }), ErrorCode::Config);
}

TEST(Io, TruthRoundTrip) {
  const auto f = TrueFunction::mixture({TrueFunction::staircase(0.1, {v({0.2, 0.3})}, {0.5}),
                                        TrueFunction::additive(unit2(), v({0.3, 0.7}), v({2.0, 0.5})),
                                        TrueFunction::product(unit2(), 1.5)});
  const auto g = truth_from_json(Json::parse(truth_to_json(f).dump()));
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = v({rng.uniform(), rng.uniform()});
    EXPECT_EQ(g(x), f(x));
  }
}

TEST(Io, LoadProblemResolvesPaths) {
  const auto dir = std::filesystem::temp_directory_path() / "bsmmr_io_test";
  std::filesystem::remove_all(dir);
  Eigen::MatrixXd x(2, 2);
  x << 0.1, 0.2, 0.3, 0.4;
  write_region_csv(dir / "r1.csv", gaussian_rows(x, v({1.0, 2.0})));
  RunConfig c;
  c.regions = {{unit2(), "r1.csv"}, {unit2(), ""}};
  c.edges = {{0, 1}};
  const auto p = load_problem(c, dir);
  EXPECT_EQ(p.data[0].size(), 2);
  EXPECT_EQ(p.data[1].size(), 0);
  EXPECT_EQ(p.graph.weights(0, 1), 1.0);
  c.regions[0].data = "missing.csv";
  EXPECT_THROW(load_problem(c, dir), Error);
  std::filesystem::remove_all(dir);
}
