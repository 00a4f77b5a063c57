#include "bsmmr/egocv.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "bsmmr/likelihood.hpp"
#include "bsmmr/rng.hpp"

namespace bsmmr {

double to_transformed(OmegaTransform t, double omega) {
  switch (t) {
    case OmegaTransform::SqrtOver50: return std::sqrt(omega / 50.0);
    case OmegaTransform::Log: return std::log1p(omega);
    case OmegaTransform::Identity: return omega;
  }
  return omega;
}

double from_transformed(OmegaTransform t, double z) {
  switch (t) {
    case OmegaTransform::SqrtOver50: return 50.0 * z * z;
    case OmegaTransform::Log: return std::expm1(z);
    case OmegaTransform::Identity: return z;
  }
  return z;
}

void CvConfig::validate() const {
  std::vector<Issue> issues;
  auto bad = [&](const char* what) { issues.push_back({ErrorCode::Config, what}); };
  if (folds < 2) bad("folds must be >= 2");
  if (repetitions < 1) bad("repetitions must be >= 1");
  if (!(beta > 1.0)) bad("beta must be > 1");
  if (max_evals < 3) bad("max_evals must be >= 3");
  if (!(initial_upper > 0.0)) bad("initial_upper must be > 0");
  if (!(growth_factor > 1.0)) bad("growth_factor must be > 1");
  if (!(omega_cap >= initial_upper)) bad("omega_cap must be >= initial_upper");
  if (!(ei_threshold_ratio >= 0.0)) bad("ei_threshold_ratio must be >= 0");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

FoldAssignment make_folds(const Dataset& data, int s, std::uint64_t repetition_seed) {
  if (s < 2) throw Error(ErrorCode::Config, "need at least 2 folds");
  FoldAssignment out;
  out.folds = s;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto n = data[k].size();
    if (n < s) throw Error(ErrorCode::TooFewObservations, "region " + std::to_string(k) + " has fewer rows than folds");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng = Rng::stream(repetition_seed, {k});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    Eigen::VectorXi fold(n);
    for (std::size_t i = 0; i < order.size(); ++i) fold(order[i]) = static_cast<int>(i % static_cast<std::size_t>(s));
    out.fold.push_back(std::move(fold));
  }
  return out;
}

Dataset select_rows(const Dataset& data, const FoldAssignment& folds, int f, bool test) {
  Dataset out(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& src = data[k];
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < src.size(); ++t)
      if ((folds.fold[k](t) == f) == test) rows.push_back(t);
    auto& dst = out[k];
    const auto n = static_cast<Eigen::Index>(rows.size());
    dst.x.resize(n, src.x.cols());
    dst.y.resize(n);
    if (src.trials) dst.trials = Eigen::VectorXi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      dst.x.row(i) = src.x.row(rows[i]);
      dst.y(i) = src.y(rows[i]);
      if (src.trials) (*dst.trials)(i) = (*src.trials)(rows[i]);
    }
  }
  return out;
}

FoldPredictor sampler_predictor(const SamplerSchedule& schedule) {
  return [schedule](const Problem& train, const Dataset& test, std::uint64_t seed) {
    SamplerSchedule sch = schedule;
    sch.seed = seed;
    sch.trace_points.clear();
    const Chain chain = run(train, sch);
    std::vector<Eigen::VectorXd> out;
    for (std::size_t k = 0; k < test.size(); ++k) {
      const auto& rows = test[k];
      Eigen::VectorXd pred(rows.size());
      for (Eigen::Index t = 0; t < rows.size(); ++t) {
        const int trials = rows.trials ? (*rows.trials)(t) : 1;
        pred(t) = predictive_mean(chain, train.likelihood, static_cast<int>(k), rows.x.row(t).transpose(), trials);
      }
      out.push_back(std::move(pred));
    }
    return out;
  };
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::mutex mutex;
  int next = 0;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      int i;
      {
        std::lock_guard lock(mutex);
        if (next >= n || error) return;
        i = next++;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

CvValue cv_objective(double omega, const Problem& problem, const CvConfig& cfg) {
  return cv_objective(omega, problem, cfg, sampler_predictor(cfg.fold_schedule));
}

CvValue cv_objective(double omega, const Problem& problem, const CvConfig& cfg, const FoldPredictor& predictor) {
  if (!(omega >= 0.0)) throw Error(ErrorCode::BadHyperparameter, "omega must be >= 0");
  const int s = cfg.folds;
  const int reps = cfg.repetitions;
  std::vector<FoldAssignment> assignments;
  for (int r = 0; r < reps; ++r)
    assignments.push_back(make_folds(problem.data, s, Rng::derive(cfg.seed, {0xF0, static_cast<std::uint64_t>(r)})));
  std::vector<double> sq(static_cast<std::size_t>(s * reps), 0.0);
  std::vector<double> count(sq.size(), 0.0);
  parallel_for(s * reps, cfg.threads, [&](int task) {
    const int r = task / s;
    const int f = task % s;
    Problem train = problem;
    train.data = select_rows(problem.data, assignments[r], f, false);
    train.prior.omega = omega;
    const Dataset test = select_rows(problem.data, assignments[r], f, true);
    const auto seed = Rng::derive(cfg.seed, {0xC4, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(f)});
    const auto pred = predictor(train, test, seed);
    double total = 0.0;
    double n = 0.0;
    for (std::size_t k = 0; k < test.size(); ++k) {
      total += (test[k].y - pred.at(k)).squaredNorm();
      n += static_cast<double>(test[k].size());
    }
    sq[task] = total;
    count[task] = n;
  });
  std::vector<double> rep_mse;
  std::vector<double> fold_mse;
  for (int r = 0; r < reps; ++r) {
    double total = 0.0, n = 0.0;
    for (int f = 0; f < s; ++f) {
      const auto i = static_cast<std::size_t>(r * s + f);
      total += sq[i];
      n += count[i];
      if (count[i] > 0) fold_mse.push_back(sq[i] / count[i]);
    }
    rep_mse.push_back(n > 0 ? total / n : 0.0);
  }
  CvValue out;
  out.mean = std::accumulate(rep_mse.begin(), rep_mse.end(), 0.0) / reps;
  out.variance = reps >= 2 ? sample_variance(rep_mse) : sample_variance(fold_mse) / s;
  return out;
}

GpSurrogate::GpSurrogate(Eigen::VectorXd designs, Eigen::VectorXd means, Eigen::VectorXd noise,
                         double signal_variance, double length_scale)
    : designs_(std::move(designs)),
      means_(std::move(means)),
      noise_(std::move(noise)),
      signal_variance_(signal_variance),
      length_scale_(length_scale) {
  const auto n = designs_.size();
  if (n < 3) throw Error(ErrorCode::TooFewObservations, "GP needs at least 3 design points");
  if (means_.size() != n || noise_.size() != n) throw Error(ErrorCode::DimensionMismatch, "GP inputs");
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(designs_(i), designs_(j));
  k.diagonal() += noise_;
  bool ok = false;
  for (double rel = 1e-12; rel <= 1e-2 * (1 + 1e-9); rel *= 10.0) {
    nugget_ = rel * signal_variance_;
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += nugget_;
    llt_.compute(kn);
    if (llt_.info() == Eigen::Success && (llt_.matrixLLT().diagonal().array() > 0.0).all()) {
      ok = true;
      break;
    }
  }
  if (!ok) throw Error(ErrorCode::SingularCovariance, "GP covariance not positive definite after nugget escalation");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  kinv_one_ = llt_.solve(ones);
  one_kinv_one_ = ones.dot(kinv_one_);
  beta_ = kinv_one_.dot(means_) / one_kinv_one_;
  const Eigen::VectorXd resid = means_.array() - beta_;
  weights_ = llt_.solve(resid);
  const double log_det = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  log_ml_ = -0.5 * resid.dot(weights_) - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

double GpSurrogate::kernel(double a, double b) const {
  const double r = std::sqrt(5.0) * std::abs(a - b) / length_scale_;
  return signal_variance_ * (1.0 + r + r * r / 3.0) * std::exp(-r);
}

GpPrediction GpSurrogate::predict(double z) const {
  const auto n = designs_.size();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel(z, designs_(i));
  const double mean = beta_ + k.dot(weights_);
  const Eigen::VectorXd v = llt_.solve(k);
  const double u = 1.0 - kinv_one_.dot(k);
  const double var = signal_variance_ - k.dot(v) + u * u / one_kinv_one_;
  return {mean, std::sqrt(std::max(var, 0.0))};
}

GpSurrogate gp_fit(const Eigen::VectorXd& designs, const Eigen::VectorXd& means, const Eigen::VectorXd& variances) {
  if (designs.size() < 3) throw Error(ErrorCode::TooFewObservations, "GP needs at least 3 design points");
  const double span = std::max(designs.maxCoeff() - designs.minCoeff(), 1e-6);
  const double mean = means.mean();
  double spread = (means.array() - mean).square().sum() / static_cast<double>(means.size() - 1);
  spread = std::max(spread, 1e-12 * std::max(1.0, mean * mean));
  std::optional<GpSurrogate> best;
  std::exception_ptr last_error;
  constexpr int kLengths = 30;
  constexpr int kSignals = 21;
  for (int a = 0; a < kLengths; ++a) {
    const double ell = span * std::pow(10.0, -2.0 + 3.0 * a / (kLengths - 1));
    for (int b = 0; b < kSignals; ++b) {
      const double s2 = spread * std::pow(10.0, -3.0 + 6.0 * b / (kSignals - 1));
      try {
        GpSurrogate gp(designs, means, variances, s2, ell);
        if (!best || gp.log_marginal_likelihood() > best->log_marginal_likelihood()) best = std::move(gp);
      } catch (const Error&) {
        last_error = std::current_exception();
      }
    }
  }
  if (!best) {
    if (last_error) std::rethrow_exception(last_error);
    throw Error(ErrorCode::SingularCovariance, "no GP hyperparameters admissible");
  }
  return *best;
}

double expected_improvement(double mean, double sd, double f_opt) {
  const double gain = f_opt - mean;
  if (!(sd > 0.0)) return std::max(gain, 0.0);
  const double u = gain / sd;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, gain * cdf + sd * pdf);
}

double expected_improvement(const GpSurrogate& gp, double z, double f_opt) {
  const auto p = gp.predict(z);
  return expected_improvement(p.mean, p.sd, f_opt);
}

EiMaximum maximize_ei(const GpSurrogate& gp, double lo, double hi, double f_opt, int grid) {
  grid = std::max(grid, 2);
  const double h = (hi - lo) / (grid - 1);
  EiMaximum best{lo, -1.0};
  int best_i = 0;
  for (int i = 0; i < grid; ++i) {
    const double z = lo + h * i;
    const double ei = expected_improvement(gp, z, f_opt);
    if (ei > best.ei) {
      best = {z, ei};
      best_i = i;
    }
  }
  double a = std::max(lo, lo + h * (best_i - 1));
  double b = std::min(hi, lo + h * (best_i + 1));
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = expected_improvement(gp, c, f_opt);
  double fd = expected_improvement(gp, d, f_opt);
  for (int it = 0; it < 60 && b - a > 1e-12 * (1.0 + std::abs(hi - lo)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = expected_improvement(gp, c, f_opt);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = expected_improvement(gp, d, f_opt);
    }
  }
  const double z = 0.5 * (a + b);
  const double ei = expected_improvement(gp, z, f_opt);
  if (ei > best.ei) best = {z, ei};
  return best;
}

EgoResult ego_optimize(const CvFunction& objective, const CvConfig& cfg) {
  cfg.validate();
  EgoResult result;
  auto& log = result.log;
  const auto eval = [&](double omega, EvalPhase phase) {
    const CvValue v = objective(omega);
    EvalRecord rec;
    rec.index = static_cast<int>(log.size());
    rec.omega = omega;
    rec.z = to_transformed(cfg.transform, omega);
    rec.mean = v.mean;
    rec.variance = v.variance;
    rec.max_ei = std::numeric_limits<double>::quiet_NaN();
    rec.phase = phase;
    log.push_back(rec);
    return v.mean;
  };

  const double cv0 = eval(0.0, EvalPhase::Zero);
  double omega_u = cfg.initial_upper;
  double cv_u = eval(omega_u, EvalPhase::Bound);
  while (cv_u < cfg.beta * cv0) {
    if (omega_u >= cfg.omega_cap) {
      result.notes.push_back("upper bound reached omega_cap without CV exceeding beta * CV(0)");
      break;
    }
    omega_u = std::min(omega_u * cfg.growth_factor, cfg.omega_cap);
    cv_u = eval(omega_u, EvalPhase::Bound);
  }
  result.bound_evals = static_cast<int>(log.size());

  const double z_u = to_transformed(cfg.transform, omega_u);
  const std::size_t limit = std::max<std::size_t>(static_cast<std::size_t>(cfg.max_evals), log.size() + 1);
  double omega_star = omega_u / 2.0;
  while (log.size() < limit) {
    eval(omega_star, EvalPhase::Ei);
    const auto n = static_cast<Eigen::Index>(log.size());
    Eigen::VectorXd z(n), y(n), noise(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      z(i) = log[i].z;
      y(i) = log[i].mean;
      noise(i) = log[i].variance / cfg.repetitions;
    }
    const GpSurrogate gp = gp_fit(z, y, noise);
    const double f_opt = y.minCoeff();
    const EiMaximum best = maximize_ei(gp, 0.0, z_u, f_opt);
    log.back().max_ei = best.ei;
    if (best.ei < cfg.ei_threshold_ratio * std::abs(f_opt)) break;
    const double next = from_transformed(cfg.transform, best.z);
    const bool repeat = std::any_of(log.begin(), log.end(), [&](const EvalRecord& r) {
      return std::abs(r.z - best.z) <= 1e-9 * (1.0 + z_u);
    });
    if (repeat) {
      result.notes.push_back("expected improvement maximised at an evaluated design; stopping");
      break;
    }
    omega_star = next;
  }

  const auto it = std::min_element(log.begin(), log.end(),
                                   [](const EvalRecord& a, const EvalRecord& b) { return a.mean < b.mean; });
  result.omega_opt = it->omega;
  return result;
}

EgoResult ego_cv(const Problem& problem, const CvConfig& cfg) {
  cfg.validate();
  if (!problem.graph.has_coupling()) {
    EgoResult r;
    r.omega_opt = 0.0;
    r.notes.push_back("no neighbour pairs: the objective does not depend on omega, returning 0");
    return r;
  }
  const auto predictor = sampler_predictor(cfg.fold_schedule);
  return ego_optimize([&](double omega) { return cv_objective(omega, problem, cfg, predictor); }, cfg);
}

std::string eval_log_csv(const EgoResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "eval,omega,omega_t,cv_mean,cv_variance,max_ei,phase\n";
  for (const auto& r : result.log) {
    const char* phase = r.phase == EvalPhase::Zero ? "zero" : (r.phase == EvalPhase::Bound ? "bound" : "ei");
    os << r.index << ',' << r.omega << ',' << r.z << ',' << r.mean << ',' << r.variance << ',';
    if (!std::isnan(r.max_ei)) os << r.max_ei;
    os << ',' << phase << '\n';
  }
  return os.str();
}

}  // namespace bsmmr
