#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsmmr/chain.hpp"
#include "bsmmr/domain.hpp"

namespace bsmmr {

/// Posterior summaries of alpha_k + lambda_k at the centres of a regular grid.
struct GridEstimate {
  int region = 0;
  Eigen::VectorXi resolution;
  CovariateBox box;
  Eigen::MatrixXd points;  // cells x m, last axis fastest
  Eigen::VectorXd mean;
  std::vector<double> quantile_levels;
  Eigen::MatrixXd quantiles;  // cells x levels
};

/// Inverse empirical CDF: the ceil(q R)-th smallest value, so a median of two
/// values is the lower one.
double empirical_quantile(std::vector<double>& values, double q);

/// Regular grid of cell centres on `box`.
Eigen::MatrixXd grid_points(const CovariateBox& box, const Eigen::VectorXi& resolution);

GridEstimate grid_summary(const Chain& chain, int k, const Eigen::VectorXi& resolution,
                          const std::vector<double>& quantiles = {0.025, 0.5, 0.975});
GridEstimate grid_summary(const Chain& chain, int k, int resolution,
                          const std::vector<double>& quantiles = {0.025, 0.5, 0.975});
/// Grid over `box` instead of the surface's sampling box; box must lie inside it.
GridEstimate grid_summary(const Chain& chain, int k, const CovariateBox& box, const Eigen::VectorXi& resolution,
                          const std::vector<double>& quantiles = {0.025, 0.5, 0.975});

struct ErrorSummary {
  double mae = 0.0;
  double sd = 0.0;
};

using TruthFn = std::function<double(const Eigen::VectorXd&)>;

/// Mean absolute error and (population) standard deviation of est - truth over cells.
ErrorSummary mae_sd(const GridEstimate& estimate, const TruthFn& truth);

struct ThresholdOptions {
  std::optional<double> location_tol;  // default 0.05
  std::optional<double> level_tol;     // default 0.1 (delta_max - delta_min)
  std::optional<double> min_jump;      // default 0.1 (delta_max - delta_min)
};

struct ThresholdCluster {
  Eigen::VectorXd location;  // centroid of member locations
  double level = 0.0;        // mean member level
  double jump = 0.0;         // mean member jump
  double occurrence = 0.0;   // fraction of samples with a member
  int members = 0;
};

struct ThresholdReport {
  int region = 0;
  double location_tol = 0.0;
  double level_tol = 0.0;
  double min_jump = 0.0;
  std::vector<ThresholdCluster> clusters;  // by decreasing occurrence
};

/// Jump of point j of subprocess s: its level minus the level the surface
/// would have at its location without it.
double point_jump(const MonotoneSurface& surface, SubsetMask s, int j);

ThresholdReport detect_thresholds(const Chain& chain, int k, const ThresholdOptions& options = {});

struct RelevanceReport {
  int region = 0;
  std::map<SubsetMask, double> empty_probability;  // per subprocess
  Eigen::VectorXd axis_redundancy;  // P(every subprocess using axis d is empty)
  std::vector<bool> redundant;      // axis_redundancy >= threshold
  double threshold = 0.9;
};

RelevanceReport variable_relevance(const Chain& chain, int k, double threshold = 0.9);

std::string grid_csv(const GridEstimate& estimate);

}  // namespace bsmmr
