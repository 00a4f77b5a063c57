#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bsmmr/domain.hpp"
#include "bsmmr/rjmcmc.hpp"

namespace bsmmr {

enum class OmegaTransform { SqrtOver50, Log, Identity };

double to_transformed(OmegaTransform t, double omega);
double from_transformed(OmegaTransform t, double z);

struct CvConfig {
  int folds = 10;
  int repetitions = 5;
  SamplerSchedule fold_schedule{50000, 25000, 100, {}, 1};
  double initial_upper = 50.0;
  double growth_factor = 10.0;
  double beta = 1.1;
  double ei_threshold_ratio = 1e-4;
  int max_evals = 30;
  double omega_cap = 5e5;
  OmegaTransform transform = OmegaTransform::SqrtOver50;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// fold[k](t) is the fold of row t in region k.
struct FoldAssignment {
  int folds = 0;
  std::vector<Eigen::VectorXi> fold;
};

FoldAssignment make_folds(const Dataset& data, int s, std::uint64_t repetition_seed);

/// Rows of `data` whose fold is (test) or is not (train) `f`.
Dataset select_rows(const Dataset& data, const FoldAssignment& folds, int f, bool test);

struct CvValue {
  double mean = 0.0;
  double variance = 0.0;
};

/// Predictions for every test row given a training problem.
using FoldPredictor =
    std::function<std::vector<Eigen::VectorXd>(const Problem& train, const Dataset& test, std::uint64_t seed)>;

/// Fits the sampler with the fold schedule and returns posterior-predictive means.
FoldPredictor sampler_predictor(const SamplerSchedule& schedule);

/// Mean and variance over repetitions of the pooled test MSE. With one
/// repetition the variance is that of the fold MSEs divided by the fold count.
CvValue cv_objective(double omega, const Problem& problem, const CvConfig& cfg);
CvValue cv_objective(double omega, const Problem& problem, const CvConfig& cfg, const FoldPredictor& predictor);

struct GpPrediction {
  double mean;
  double sd;
};

/// Matern-5/2 GP with a GLS constant mean and known per-design noise.
class GpSurrogate {
 public:
  GpSurrogate(Eigen::VectorXd designs, Eigen::VectorXd means, Eigen::VectorXd noise, double signal_variance,
              double length_scale);

  GpPrediction predict(double z) const;
  double log_marginal_likelihood() const { return log_ml_; }

  const Eigen::VectorXd& designs() const { return designs_; }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& noise() const { return noise_; }
  double signal_variance() const { return signal_variance_; }
  double length_scale() const { return length_scale_; }
  double nugget() const { return nugget_; }
  double mean_constant() const { return beta_; }

 private:
  double kernel(double a, double b) const;

  Eigen::VectorXd designs_, means_, noise_;
  double signal_variance_, length_scale_, nugget_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;   // K^-1 (y - beta)
  Eigen::VectorXd kinv_one_;  // K^-1 1
  double one_kinv_one_ = 1.0;
  double beta_ = 0.0;
  double log_ml_ = 0.0;
};

/// Hyperparameters by maximum likelihood over a log grid. Needs >= 3 designs.
GpSurrogate gp_fit(const Eigen::VectorXd& designs, const Eigen::VectorXd& means, const Eigen::VectorXd& variances);

double expected_improvement(double mean, double sd, double f_opt);
double expected_improvement(const GpSurrogate& gp, double z, double f_opt);

struct EiMaximum {
  double z;
  double ei;
};

/// Dense grid then golden-section refinement around the best grid point.
EiMaximum maximize_ei(const GpSurrogate& gp, double lo, double hi, double f_opt, int grid = 1024);

enum class EvalPhase { Zero, Bound, Ei };

struct EvalRecord {
  int index = 0;
  double omega = 0.0;
  double z = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double max_ei = 0.0;  // NaN when no GP was fitted after this evaluation
  EvalPhase phase = EvalPhase::Zero;
};

struct EgoResult {
  double omega_opt = 0.0;
  std::vector<EvalRecord> log;
  int bound_evals = 0;  // evaluations spent in the upper-bound search, CV(0) included
  std::vector<std::string> notes;
};

using CvFunction = std::function<CvValue(double omega)>;

EgoResult ego_optimize(const CvFunction& objective, const CvConfig& cfg);
EgoResult ego_cv(const Problem& problem, const CvConfig& cfg);

std::string eval_log_csv(const EgoResult& result);

}  // namespace bsmmr
