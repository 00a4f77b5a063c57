#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bsmmr/domain.hpp"
#include "bsmmr/rng.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr {

/// Known monotone regression function used to simulate data and score fits.
///
///   Constant   base
///   Staircase  base + sum_i jumps[i] * [corners[i] <= x]
///   Product    base + scale * prod_d u_d          (u = x rescaled to [0,1] on box)
///   Additive   base + sum_d weights[d] * u_d^powers[d]
///   Mixture    sum of parts
///   Surface    a fixed MonotoneSurface
class TrueFunction {
 public:
  enum class Kind { Constant, Staircase, Product, Additive, Mixture, Surface };

  static TrueFunction constant(double base);
  static TrueFunction staircase(double base, std::vector<Eigen::VectorXd> corners, std::vector<double> jumps);
  static TrueFunction step(const Eigen::VectorXd& corner, double jump, double base = 0.0);
  static TrueFunction product(const CovariateBox& box, double scale, double base = 0.0);
  static TrueFunction additive(const CovariateBox& box, Eigen::VectorXd weights, Eigen::VectorXd powers,
                               double base = 0.0);
  static TrueFunction mixture(std::vector<TrueFunction> parts);
  static TrueFunction surface(MonotoneSurface s);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Kind kind() const { return kind_; }
  double base() const { return base_; }
  double scale() const { return scale_; }
  const std::vector<Eigen::VectorXd>& corners() const { return corners_; }
  const std::vector<double>& jumps() const { return jumps_; }
  const CovariateBox& box() const { return box_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& powers() const { return powers_; }
  const std::vector<TrueFunction>& parts() const { return parts_; }
  const std::optional<MonotoneSurface>& fixed_surface() const { return surface_; }

 private:
  Kind kind_ = Kind::Constant;
  double base_ = 0.0;
  double scale_ = 0.0;
  std::vector<Eigen::VectorXd> corners_;
  std::vector<double> jumps_;
  CovariateBox box_;
  Eigen::VectorXd weights_, powers_;
  std::vector<TrueFunction> parts_;
  std::optional<MonotoneSurface> surface_;
};

/// Checks f(u) <= f(v) on `pairs` random ordered pairs in box; throws MonotoneViolation.
void audit_monotone(const TrueFunction& f, const CovariateBox& box, int pairs = 10000, std::uint64_t seed = 7);

/// How covariates are drawn inside a region box. ThresholdSplit puts `above`
/// rows uniformly on {x >= corner} and the rest uniformly on its complement.
struct SamplingLaw {
  enum class Kind { Uniform, ThresholdSplit };
  Kind kind = Kind::Uniform;
  Eigen::VectorXd corner;
  int above = 0;

  static SamplingLaw uniform() { return {}; }
  static SamplingLaw threshold_split(Eigen::VectorXd corner, int above) {
    return {Kind::ThresholdSplit, std::move(corner), above};
  }
};

struct RegionDesign {
  CovariateBox box;
  TrueFunction truth;
  int count = 0;
  SamplingLaw law;
  double alpha = 0.0;
  double sigma = 0.05;  // Gaussian
  int trials = 100;     // Binomial
};

Eigen::MatrixXd sample_covariates(const CovariateBox& box, int count, const SamplingLaw& law, RandomSource& rng);

/// y = alpha + lambda(x) + sigma * N(0, 1).
Dataset gen_gaussian(const std::vector<RegionDesign>& regions, std::uint64_t seed);
/// y ~ Binomial(trials, logistic(alpha + lambda(x))).
Dataset gen_binomial(const std::vector<RegionDesign>& regions, std::uint64_t seed);

struct Network {
  std::string name;
  std::vector<std::pair<int, int>> edges;  // 0-based
  int regions = 0;

  RegionGraph graph(std::vector<CovariateBox> boxes, DomainMode mode = DomainMode::Intersection) const;
};

Network chain5();
Network hub5();
std::vector<Network> builtin_networks();

/// One of the shipped simulation scenarios.
struct Scenario {
  std::string name;
  std::string description;
  RegionGraph graph;
  std::vector<RegionDesign> regions;
  bool binomial = false;
  PriorConfig prior;  // suggested prior (delta range, p, q, eta)

  Dataset generate(std::uint64_t seed) const {
    return binomial ? gen_binomial(regions, seed) : gen_gaussian(regions, seed);
  }
};

std::vector<std::string> scenario_names();
/// Throws Error(Config) for an unknown name.
Scenario make_scenario(const std::string& name);

}  // namespace bsmmr
