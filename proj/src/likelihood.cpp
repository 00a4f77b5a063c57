#include "bsmmr/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "bsmmr/chain.hpp"

namespace bsmmr {

namespace {

double softplus(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

int trials_at(const RegionData& data, Eigen::Index t) { return data.trials ? (*data.trials)(t) : 1; }

double sigma2_of(const NuisanceState& n, int k) { return n.sigma2.size() > k ? n.sigma2(k) : 1.0; }

// Connected components of the positive-weight graph.
int component_count(const Eigen::MatrixXd& w) {
  const auto k = static_cast<int>(w.rows());
  std::vector<int> label(k, -1);
  int c = 0;
  for (int s = 0; s < k; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> stack{s};
    label[s] = c;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < k; ++v) {
        if (w(u, v) > 0 && label[v] < 0) {
          label[v] = c;
          stack.push_back(v);
        }
      }
    }
    ++c;
  }
  return c;
}

}  // namespace

NuisanceState initial_nuisance(const Problem& problem) {
  const int k = problem.region_count();
  NuisanceState n;
  const auto& lik = problem.likelihood;
  if (const auto* fixed = std::get_if<FixedBaseline>(&lik.baseline)) {
    n.alpha = fixed->values.size() == k ? fixed->values : Eigen::VectorXd::Zero(k);
  } else {
    const auto& car = std::get<CarBaseline>(lik.baseline);
    n.alpha = car.initial.size() == k ? car.initial : Eigen::VectorXd::Zero(k);
    n.tau = car.initial_tau;
  }
  if (const auto* g = std::get_if<GaussianFamily>(&lik.family)) n.sigma2 = Eigen::VectorXd::Constant(k, g->initial_sigma2);
  return n;
}

double row_log_density(const LikelihoodSpec& lik, double y, int trials, double linear, double sigma2) {
  if (lik.gaussian()) {
    const double r = y - linear;
    return -0.5 * (std::log(2.0 * std::numbers::pi * sigma2) + r * r / sigma2);
  }
  const double n = trials;
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
  return log_choose + y * linear - n * softplus(linear);
}

Eigen::VectorXd row_levels(const MonotoneSurface& surface, const RegionData& data) {
  Eigen::VectorXd out(data.size());
  for (Eigen::Index t = 0; t < data.size(); ++t) out(t) = evaluate(surface, data.x.row(t).transpose());
  return out;
}

double log_likelihood_levels(const LikelihoodSpec& lik, const RegionData& data, double alpha, double sigma2,
                             const Eigen::VectorXd& levels) {
  double total = 0.0;
  for (Eigen::Index t = 0; t < data.size(); ++t)
    total += row_log_density(lik, data.y(t), trials_at(data, t), alpha + levels(t), sigma2);
  return total;
}

double log_likelihood(const Problem& problem, int k, const MonotoneSurface& surface, const NuisanceState& nuisance) {
  const auto& data = problem.data.at(k);
  return log_likelihood_levels(problem.likelihood, data, nuisance.alpha(k), sigma2_of(nuisance, k),
                               row_levels(surface, data));
}

std::vector<RowUpdate> changed_rows(const RegionData& data, const MonotoneSurface& after,
                                    const Eigen::Ref<const Eigen::VectorXd>& corner, const Eigen::VectorXd& cached) {
  std::vector<RowUpdate> out;
  for (Eigen::Index t = 0; t < data.size(); ++t) {
    const auto x = data.x.row(t).transpose();
    if (!precedes(corner, x)) continue;
    const double level = evaluate_unchecked(after, x);
    if (level != cached(t)) out.push_back({t, level});
  }
  return out;
}

double log_likelihood_delta_rows(const LikelihoodSpec& lik, const RegionData& data, double alpha, double sigma2,
                                 const Eigen::VectorXd& cached, const std::vector<RowUpdate>& updates) {
  double total = 0.0;
  for (const auto& u : updates) {
    const double y = data.y(u.row);
    const int n = trials_at(data, u.row);
    if (lik.gaussian()) {
      const double r_new = y - alpha - u.level;
      const double r_old = y - alpha - cached(u.row);
      total -= 0.5 * (r_new * r_new - r_old * r_old) / sigma2;
    } else {
      total += y * (u.level - cached(u.row)) - n * (softplus(alpha + u.level) - softplus(alpha + cached(u.row)));
    }
  }
  return total;
}

double log_likelihood_delta(const Problem& problem, int k, const MonotoneSurface& surface_old,
                            const MonotoneSurface& surface_new, const NuisanceState& nuisance) {
  const auto& data = problem.data.at(k);
  if (data.size() == 0) return 0.0;
  const auto corner = changed_corner(surface_old, surface_new);
  if (!corner) return 0.0;
  Eigen::VectorXd cached(data.size());
  for (Eigen::Index t = 0; t < data.size(); ++t) {
    const auto x = data.x.row(t).transpose();
    cached(t) = precedes(*corner, x) ? evaluate_unchecked(surface_old, x) : 0.0;
  }
  const auto updates = changed_rows(data, surface_new, *corner, cached);
  return log_likelihood_delta_rows(problem.likelihood, data, nuisance.alpha(k), sigma2_of(nuisance, k), cached,
                                   updates);
}

double gibbs_update_sigma2(const GaussianFamily& family, const RegionData& data, double alpha,
                           const Eigen::VectorXd& levels, RandomSource& rng) {
  const double ss = (data.y.array() - alpha - levels.array()).square().sum();
  const double shape = family.sigma2_shape + 0.5 * static_cast<double>(data.size());
  const double scale = family.sigma2_scale + 0.5 * ss;
  return scale / rng.gamma(shape);
}

double gibbs_update_sigma2(const Problem& problem, int k, const MonotoneSurface& surface,
                           const NuisanceState& nuisance, RandomSource& rng) {
  const auto& family = std::get<GaussianFamily>(problem.likelihood.family);
  const auto& data = problem.data.at(k);
  return gibbs_update_sigma2(family, data, nuisance.alpha(k), row_levels(surface, data), rng);
}

double car_log_density(const Eigen::VectorXd& alpha, const RegionGraph& graph, double tau) {
  double ss = 0.0;
  const int k = graph.region_count();
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const double d = alpha(a) - alpha(b);
      ss += graph.weights(a, b) * d * d;
    }
  return -0.5 * tau * ss;
}

int mh_update_alpha(const Problem& problem, const std::vector<Eigen::VectorXd>& levels, NuisanceState& nuisance,
                    RandomSource& rng) {
  const auto& car = std::get<CarBaseline>(problem.likelihood.baseline);
  const auto& w = problem.graph.weights;
  const int k_count = problem.region_count();
  int accepted = 0;
  for (int k = 0; k < k_count; ++k) {
    const auto& data = problem.data[k];
    const double s2 = sigma2_of(nuisance, k);
    const double current = nuisance.alpha(k);
    const double proposal = current + car.proposal_sd * rng.normal();
    double log_r = 0.0;
    if (data.size() > 0) {
      log_r += log_likelihood_levels(problem.likelihood, data, proposal, s2, levels[k]) -
               log_likelihood_levels(problem.likelihood, data, current, s2, levels[k]);
    }
    double prior = 0.0;
    for (int j = 0; j < k_count; ++j) {
      if (j == k || w(k, j) <= 0) continue;
      const double dn = proposal - nuisance.alpha(j);
      const double dc = current - nuisance.alpha(j);
      prior += w(k, j) * (dn * dn - dc * dc);
    }
    log_r -= 0.5 * nuisance.tau * prior;
    if (log_r >= 0.0 || std::log(rng.uniform()) < log_r) {
      nuisance.alpha(k) = proposal;
      ++accepted;
    }
  }
  if (car.update_tau) {
    double ss = 0.0;
    for (int a = 0; a < k_count; ++a)
      for (int b = a + 1; b < k_count; ++b) {
        const double d = nuisance.alpha(a) - nuisance.alpha(b);
        ss += w(a, b) * d * d;
      }
    const double shape = car.tau_shape + 0.5 * (k_count - component_count(w));
    const double rate = 1.0 / car.tau_scale + 0.5 * ss;
    nuisance.tau = rng.gamma(shape) / rate;
  }
  if (car.center) nuisance.alpha.array() -= nuisance.alpha.mean();
  return accepted;
}

int mh_update_alpha(const Problem& problem, const std::vector<MonotoneSurface>& surfaces, NuisanceState& nuisance,
                    RandomSource& rng) {
  std::vector<Eigen::VectorXd> levels;
  levels.reserve(surfaces.size());
  for (std::size_t k = 0; k < surfaces.size(); ++k) levels.push_back(row_levels(surfaces[k], problem.data[k]));
  return mh_update_alpha(problem, levels, nuisance, rng);
}

double predictive_mean(const Chain& chain, const LikelihoodSpec& lik, int k,
                       const Eigen::Ref<const Eigen::VectorXd>& x, int trials) {
  if (chain.samples.empty()) throw Error(ErrorCode::EmptyChain, "predictive mean of an empty chain");
  double total = 0.0;
  for (const auto& s : chain.samples) {
    const double linear = s.nuisance.alpha(k) + evaluate(s.surfaces.at(k), x);
    total += lik.gaussian() ? linear : trials * logistic(linear);
  }
  return total / static_cast<double>(chain.samples.size());
}

}  // namespace bsmmr
