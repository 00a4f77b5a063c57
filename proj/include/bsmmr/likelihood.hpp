#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "bsmmr/domain.hpp"
#include "bsmmr/rng.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr {

struct Chain;

struct NuisanceState {
  Eigen::VectorXd alpha;
  Eigen::VectorXd sigma2;  // empty for Binomial
  double tau = 1.0;

  bool operator==(const NuisanceState& o) const {
    return alpha == o.alpha && sigma2 == o.sigma2 && tau == o.tau;
  }
};

NuisanceState initial_nuisance(const Problem& problem);

inline double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

/// Log density of one observation given the linear predictor alpha + lambda.
double row_log_density(const LikelihoodSpec& lik, double y, int trials, double linear, double sigma2);

/// lambda_k at every row of region k.
Eigen::VectorXd row_levels(const MonotoneSurface& surface, const RegionData& data);

double log_likelihood(const Problem& problem, int k, const MonotoneSurface& surface, const NuisanceState& nuisance);
/// Same from precomputed row levels.
double log_likelihood_levels(const LikelihoodSpec& lik, const RegionData& data, double alpha, double sigma2,
                             const Eigen::VectorXd& levels);

struct RowUpdate {
  Eigen::Index row;
  double level;
};

/// Rows inside the upper orthant of `corner` whose level under `after` differs
/// from `cached`, with their new levels.
std::vector<RowUpdate> changed_rows(const RegionData& data, const MonotoneSurface& after,
                                    const Eigen::Ref<const Eigen::VectorXd>& corner, const Eigen::VectorXd& cached);

double log_likelihood_delta_rows(const LikelihoodSpec& lik, const RegionData& data, double alpha, double sigma2,
                                 const Eigen::VectorXd& cached, const std::vector<RowUpdate>& updates);

/// log L(new) - log L(old), touching only rows where the surfaces can differ.
double log_likelihood_delta(const Problem& problem, int k, const MonotoneSurface& surface_old,
                            const MonotoneSurface& surface_new, const NuisanceState& nuisance);

/// Draw from IG(a + T/2, b + SS/2) given the current row levels.
double gibbs_update_sigma2(const GaussianFamily& family, const RegionData& data, double alpha,
                           const Eigen::VectorXd& levels, RandomSource& rng);
double gibbs_update_sigma2(const Problem& problem, int k, const MonotoneSurface& surface,
                           const NuisanceState& nuisance, RandomSource& rng);

/// -tau/2 * sum over edges of w (alpha_k - alpha_k')^2.
double car_log_density(const Eigen::VectorXd& alpha, const RegionGraph& graph, double tau);

/// One random-walk Metropolis pass over the baselines under the intrinsic CAR
/// prior, then a conjugate Gamma draw for tau. `levels[k]` are the row levels
/// of surface k. Returns the number of accepted alpha proposals.
int mh_update_alpha(const Problem& problem, const std::vector<Eigen::VectorXd>& levels, NuisanceState& nuisance,
                    RandomSource& rng);
int mh_update_alpha(const Problem& problem, const std::vector<MonotoneSurface>& surfaces, NuisanceState& nuisance,
                    RandomSource& rng);

/// Posterior-predictive mean at x: average of alpha + lambda (Gaussian) or
/// trials * logistic(alpha + lambda) (Binomial) over stored samples.
double predictive_mean(const Chain& chain, const LikelihoodSpec& lik, int k,
                       const Eigen::Ref<const Eigen::VectorXd>& x, int trials = 1);

}  // namespace bsmmr
