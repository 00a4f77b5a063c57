#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "bsmmr/error.hpp"

namespace bsmmr {

/// Axis-aligned covariate box [lower, upper] in R^m.
struct CovariateBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  CovariateBox() = default;
  CovariateBox(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {}

  static CovariateBox unit(int dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
  }

  int dim() const { return static_cast<int>(lower.size()); }
  double volume() const { return (upper - lower).prod(); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
  }
  bool contains(const CovariateBox& other) const {
    return (other.lower.array() >= lower.array()).all() && (other.upper.array() <= upper.array()).all();
  }
  bool valid() const {
    return lower.size() >= 1 && lower.size() == upper.size() && (lower.array() < upper.array()).all();
  }
  bool operator==(const CovariateBox& o) const { return lower == o.lower && upper == o.upper; }
};

/// Nonempty (positive-volume) intersection, or nullopt.
std::optional<CovariateBox> intersect(const CovariateBox& a, const CovariateBox& b);
/// Smallest box containing both.
CovariateBox hull(const CovariateBox& a, const CovariateBox& b);

enum class DomainMode { Intersection, Union };

/// Signed box pieces whose indicator sum equals the indicator of A_{k,k'}.
struct DomainPiece {
  CovariateBox box;
  double sign;
};

struct RegionGraph {
  std::vector<CovariateBox> boxes;
  Eigen::MatrixXd weights;  // K x K, symmetric, zero diagonal
  DomainMode domain_mode = DomainMode::Intersection;

  /// d_{k,k'} = 1 for the listed (0-based) pairs, 0 otherwise.
  static RegionGraph from_edges(std::vector<CovariateBox> boxes,
                                const std::vector<std::pair<int, int>>& edges,
                                DomainMode mode = DomainMode::Intersection);

  int region_count() const { return static_cast<int>(boxes.size()); }
  int dim() const { return boxes.empty() ? 0 : boxes.front().dim(); }
  bool has_coupling() const;
  std::vector<int> neighbors(int k) const;

  /// Integration domain A_{k,k'} as inclusion-exclusion pieces (empty when the
  /// intersection is empty in Intersection mode).
  std::vector<DomainPiece> pair_domain(int k, int kp) const;

  /// Box on which region k's surface lives: X_k, or the hull of X_k and its
  /// neighbours' boxes in Union mode so that extrapolated levels are defined.
  CovariateBox sampling_box(int k) const;
};

struct RegionData {
  Eigen::MatrixXd x;  // T x m
  Eigen::VectorXd y;  // T
  std::optional<Eigen::VectorXi> trials;

  Eigen::Index size() const { return y.size(); }
};

using Dataset = std::vector<RegionData>;

struct MoveProbabilities {
  double birth = 0.3;
  double death = 0.3;
  double shift = 0.4;
};

struct PriorConfig {
  double omega = 0.0;
  double eta = 2.0;
  double p = 1.0;
  double q = 1.0;
  double delta_min = 0.0;
  double delta_max = 1.0;
  int n_max = 200;
  MoveProbabilities moves;
};

struct GaussianFamily {
  double sigma2_shape = 1.0;  // Inverse-Gamma(a, b)
  double sigma2_scale = 0.005;
  double initial_sigma2 = 0.1;
};
struct BinomialFamily {};

struct FixedBaseline {
  Eigen::VectorXd values;
};

/// Intrinsic CAR on the baselines with conjugate Gamma(shape, scale) prior on tau.
struct CarBaseline {
  double tau_shape = 1.0;
  double tau_scale = 0.01;
  double proposal_sd = 0.05;
  double initial_tau = 1.0;
  bool update_tau = true;
  bool center = false;  // recenter alpha to sum zero after each sweep
  Eigen::VectorXd initial;  // empty -> zeros
};

struct LikelihoodSpec {
  std::variant<GaussianFamily, BinomialFamily> family = GaussianFamily{};
  std::variant<FixedBaseline, CarBaseline> baseline = FixedBaseline{};

  bool gaussian() const { return std::holds_alternative<GaussianFamily>(family); }
  bool car() const { return std::holds_alternative<CarBaseline>(baseline); }
};

/// Validated aggregate. Only validate_problem constructs a "checked" one.
struct Problem {
  RegionGraph graph;
  Dataset data;
  PriorConfig prior;
  LikelihoodSpec likelihood;

  int region_count() const { return graph.region_count(); }
  int dim() const { return graph.dim(); }
};

/// Checks every invariant of the four inputs; throws ValidationError listing all violations.
Problem validate_problem(RegionGraph graph, Dataset data, PriorConfig prior, LikelihoodSpec lik);

}  // namespace bsmmr
