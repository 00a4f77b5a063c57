#include <cmath>
#include <numbers>

#include "helpers.hpp"

#include "bsmmr/chain.hpp"
#include "bsmmr/likelihood.hpp"
#include "bsmmr/rng.hpp"
#include "bsmmr/selftest.hpp"

using namespace bsmmr;
using namespace bsmmr::test;

namespace {

Problem one_region(RegionData d, LikelihoodSpec lik = {}) {
  return validate_problem(RegionGraph::from_edges({unit2()}, {}), {std::move(d)}, {}, std::move(lik));
}

RegionData random_rows(Rng& rng, int n, bool binomial) {
  RegionData d;
  d.x.resize(n, 2);
  d.y.resize(n);
  if (binomial) d.trials = Eigen::VectorXi(n);
  for (int t = 0; t < n; ++t) {
    d.x(t, 0) = rng.uniform();
    d.x(t, 1) = rng.uniform();
    if (binomial) {
      (*d.trials)(t) = 1 + static_cast<int>(rng.index(30));
      d.y(t) = static_cast<double>(rng.index((*d.trials)(t) + 1));
    } else {
      d.y(t) = rng.normal();
    }
  }
  return d;
}

double naive(const Problem& p, const MonotoneSurface& s, const NuisanceState& nu) {
  const auto& d = p.data[0];
  double sum = 0.0;
  for (Eigen::Index t = 0; t < d.size(); ++t) {
    const double eta = nu.alpha(0) + evaluate(s, d.x.row(t).transpose());
    if (p.likelihood.gaussian()) {
      const double r = d.y(t) - eta;
      sum += -0.5 * std::log(2 * std::numbers::pi * nu.sigma2(0)) - r * r / (2 * nu.sigma2(0));
    } else {
      const double n = (*d.trials)(t), y = d.y(t);
      const double pr = 1.0 / (1.0 + std::exp(-eta));
      sum += std::lgamma(n + 1) - std::lgamma(y + 1) - std::lgamma(n - y + 1) + y * std::log(pr) +
             (n - y) * std::log(1 - pr);
    }
  }
  return sum;
}

}  // namespace

TEST(Likelihood, GaussianZeroResidual) {
  Eigen::MatrixXd x(1, 2);
  x << 0.7, 0.7;
  const auto s = surface(unit2(), {{v({0.5, 0.5}), 0.4}});
  auto p = one_region(gaussian_rows(x, v({0.3 + 0.4})));
  NuisanceState nu = initial_nuisance(p);
  nu.alpha(0) = 0.3;
  nu.sigma2(0) = 0.2;
  EXPECT_NEAR(log_likelihood(p, 0, s, nu), -0.5 * std::log(2 * std::numbers::pi * 0.2), 1e-14);
}

TEST(Likelihood, BinomialHalf) {
  RegionData d;
  d.x = Eigen::MatrixXd::Constant(1, 2, 0.2);
  d.y = v({50});
  d.trials = Eigen::VectorXi::Constant(1, 100);
  LikelihoodSpec lik;
  lik.family = BinomialFamily{};
  const auto p = one_region(d, lik);
  const auto nu = initial_nuisance(p);
  const MonotoneSurface s(unit2(), 0.0, 1.0, 10);
  const double expect = std::lgamma(101) - 2 * std::lgamma(51) + 100 * std::log(0.5);
  EXPECT_NEAR(log_likelihood(p, 0, s, nu), expect, 1e-12);
}

TEST(Likelihood, MatchesNaiveAndDeltaIsExact) {
  Rng rng(21);
  for (bool binomial : {false, true}) {
    LikelihoodSpec lik;
    if (binomial) lik.family = BinomialFamily{};
    for (int rep = 0; rep < 200; ++rep) {
      const auto p = one_region(random_rows(rng, 25, binomial), lik);
      auto nu = initial_nuisance(p);
      nu.alpha(0) = rng.normal() * 0.5;
      if (!binomial) nu.sigma2(0) = 0.1 + rng.uniform();
      const auto s = random_surface(unit2(), 0.0, 1.0, 6, 50, rng);
      EXPECT_NEAR(log_likelihood(p, 0, s, nu), naive(p, s, nu), 1e-12 * std::max(1.0, std::abs(naive(p, s, nu))));
      const Eigen::VectorXd loc = v({rng.uniform(), rng.uniform()});
      if (s.occupied(loc)) continue;
      const auto b = birth_level_bounds(s, loc);
      const auto t = apply_birth(s, {loc, rng.uniform(b.lower, b.upper)});
      const double full = log_likelihood(p, 0, t, nu) - log_likelihood(p, 0, s, nu);
      EXPECT_NEAR(log_likelihood_delta(p, 0, s, t, nu), full, 1e-10);
    }
  }
}

TEST(Likelihood, DeltaZeroCases) {
  Eigen::MatrixXd x(2, 2);
  x << 0.1, 0.1, 0.2, 0.3;
  const auto p = one_region(gaussian_rows(x, v({0.0, 1.0})));
  const auto nu = initial_nuisance(p);
  const auto s = surface(unit2(), {{v({0.15, 0.15}), 0.3}});
  const auto t = apply_birth(s, {v({0.8, 0.8}), 0.9});
  EXPECT_EQ(log_likelihood_delta(p, 0, s, t, nu), 0.0);

  const auto q = one_region(empty_rows(2));
  const auto u = apply_birth(s, {v({0.05, 0.05}), 0.1});
  EXPECT_EQ(log_likelihood_delta(q, 0, s, u, initial_nuisance(q)), 0.0);
}

TEST(Likelihood, Sigma2PriorDrawWithoutData) {
  GaussianFamily fam;
  fam.sigma2_shape = 3.0;
  fam.sigma2_scale = 2.0;
  const auto d = empty_rows(2);
  Rng rng(4);
  double sum = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) sum += gibbs_update_sigma2(fam, d, 0.0, Eigen::VectorXd(0), rng);
  EXPECT_NEAR(sum / n, 2.0 / (3.0 - 1.0), 0.03);
}

TEST(Likelihood, Sigma2ConjugateMoment) {
  GaussianFamily fam;
  Rng rng(8);
  const int t = 200;
  RegionData d;
  d.x = Eigen::MatrixXd::Constant(t, 2, 0.5);
  d.y.resize(t);
  for (int i = 0; i < t; ++i) d.y(i) = 0.3 * rng.normal();
  const Eigen::VectorXd levels = Eigen::VectorXd::Zero(t);
  const double ss = d.y.squaredNorm();
  const double a = fam.sigma2_shape + t / 2.0, b = fam.sigma2_scale + ss / 2.0;
  const double mean = b / (a - 1), sd = mean / std::sqrt(a - 2);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += gibbs_update_sigma2(fam, d, 0.0, levels, rng);
  EXPECT_NEAR(sum / n, mean, 4 * sd / std::sqrt(n));
}

TEST(Likelihood, Sigma2Concentrates) {
  Rng rng(12);
  const int t = 10000;
  RegionData d;
  d.x.resize(t, 2);
  d.y.resize(t);
  const auto truth = surface(unit2(), {{v({0.5, 0.5}), 0.6}, {v({0.2, 0.0}), 0.3}});
  for (int i = 0; i < t; ++i) {
    d.x(i, 0) = rng.uniform();
    d.x(i, 1) = rng.uniform();
    d.y(i) = evaluate(truth, d.x.row(i).transpose()) + 0.05 * rng.normal();
  }
  const auto p = one_region(d);
  const auto nu = initial_nuisance(p);
  double sum = 0.0;
  for (int i = 0; i < 500; ++i) sum += std::sqrt(gibbs_update_sigma2(p, 0, truth, nu, rng));
  EXPECT_NEAR(sum / 500, 0.05, 0.005);
}

TEST(Likelihood, CarDifferenceVariance) {
  const auto g = RegionGraph::from_edges({unit2(), unit2()}, {{0, 1}});
  CarBaseline car;
  car.initial_tau = 4.0;
  car.update_tau = false;
  car.proposal_sd = 0.8;
  LikelihoodSpec lik;
  lik.baseline = car;
  const auto p = validate_problem(g, {empty_rows(2), empty_rows(2)}, {}, lik);
  auto nu = initial_nuisance(p);
  const std::vector<Eigen::VectorXd> levels{Eigen::VectorXd(0), Eigen::VectorXd(0)};
  Rng rng(31);
  const int n = 50000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    mh_update_alpha(p, levels, nu, rng);
    const double diff = nu.alpha(0) - nu.alpha(1);
    s1 += diff;
    s2 += diff * diff;
  }
  EXPECT_EQ(nu.tau, 4.0);
  const double var = s2 / n - (s1 / n) * (s1 / n);
  // Var(a1 - a2) under exp(-tau/2 (a1 - a2)^2) is 1/tau.
  EXPECT_NEAR(var, 0.25, 0.025);
}

TEST(Likelihood, CarDensity) {
  auto g = RegionGraph::from_edges({unit2(), unit2(), unit2()}, {{0, 1}, {1, 2}});
  g.weights(0, 1) = g.weights(1, 0) = 2.0;
  EXPECT_NEAR(car_log_density(v({1.0, 0.0, 0.5}), g, 3.0), -1.5 * (2.0 * 1.0 + 0.25), 1e-14);
}

TEST(Likelihood, PredictiveMean) {
  const auto s02 = surface(unit2(), {{v({0.5, 0.5}), 0.2}});
  const auto s04 = surface(unit2(), {{v({0.5, 0.5}), 0.4}});
  Chain chain;
  NuisanceState nu{v({0.0}), v({1.0}), 1.0};
  chain.samples = {{{s02}, nu}, {{s04}, nu}};
  LikelihoodSpec gauss;
  EXPECT_NEAR(predictive_mean(chain, gauss, 0, v({0.6, 0.6})), 0.3, 1e-15);

  LikelihoodSpec binom;
  binom.family = BinomialFamily{};
  Chain flat;
  NuisanceState bn{v({0.0}), Eigen::VectorXd(0), 1.0};
  flat.samples = {{{MonotoneSurface(unit2(), 0.0, 1.0, 5)}, bn}, {{MonotoneSurface(unit2(), 0.0, 1.0, 5)}, bn}};
  EXPECT_NEAR(predictive_mean(flat, binom, 0, v({0.3, 0.3}), 100), 50.0, 1e-12);

  EXPECT_EQ(code_of([&] { predictive_mean(Chain{}, gauss, 0, v({0.3, 0.3})); }), ErrorCode::EmptyChain);
  EXPECT_EQ(code_of([&] { predictive_mean(chain, gauss, 0, v({1.3, 0.3})); }), ErrorCode::OutOfDomain);
}
