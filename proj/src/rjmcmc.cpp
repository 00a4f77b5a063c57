#include "bsmmr/rjmcmc.hpp"

#include <cmath>
#include <limits>

#include "bsmmr/discrepancy.hpp"

namespace bsmmr {

const char* to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::Birth: return "birth";
    case MoveKind::Death: return "death";
    case MoveKind::Shift: return "shift";
  }
  return "?";
}

namespace {

double birth_death_log_factor(const MoveProbabilities& m, MoveKind kind) {
  if (m.birth <= 0.0 || m.death <= 0.0) return 0.0;
  return kind == MoveKind::Birth ? std::log(m.death / m.birth) : std::log(m.birth / m.death);
}

}  // namespace

SamplerState initial_state(const Problem& problem) {
  SamplerState state;
  const auto& prior = problem.prior;
  for (int k = 0; k < problem.region_count(); ++k)
    state.surfaces.emplace_back(problem.graph.sampling_box(k), prior.delta_min, prior.delta_max, prior.n_max);
  state.nuisance = initial_nuisance(problem);
  refresh_levels(problem, state);
  return state;
}

void refresh_levels(const Problem& problem, SamplerState& state) {
  state.levels.resize(state.surfaces.size());
  for (std::size_t k = 0; k < state.surfaces.size(); ++k)
    state.levels[k] = row_levels(state.surfaces[k], problem.data[k]);
}

std::optional<Proposal> make_birth(const Problem& problem, const SamplerState& state, int k, SupportPoint point) {
  const auto& surface = state.surfaces[k];
  if (surface.at_capacity()) return std::nullopt;
  const SubsetMask s = surface.subset_of(point.location);
  if (s == 0) return std::nullopt;
  const auto bounds = birth_level_bounds(surface, point.location);
  if (!(bounds.width() > 0.0)) return std::nullopt;
  Proposal p;
  p.kind = MoveKind::Birth;
  p.region = k;
  p.subset = s;
  p.corner = point.location;
  try {
    p.proposed = apply_birth(surface, point);
  } catch (const Error&) {
    return std::nullopt;
  }
  p.point = std::move(point);
  p.log_proposal_ratio = std::log(surface.subspace_volume(s) * bounds.width() / (surface.count(s) + 1)) +
                         birth_death_log_factor(problem.prior.moves, MoveKind::Birth);
  return p;
}

std::optional<Proposal> make_death(const Problem& problem, const SamplerState& state, int k, SubsetMask subset,
                                   int index) {
  const auto& surface = state.surfaces[k];
  if (surface.count(subset) == 0) return std::nullopt;
  Proposal p;
  p.kind = MoveKind::Death;
  p.region = k;
  p.subset = subset;
  p.index = index;
  p.point = surface.points(subset).at(index);
  p.corner = p.point.location;
  p.proposed = apply_death(surface, subset, index);
  // Interval of the reverse birth, seen from the reduced surface.
  const auto bounds = birth_level_bounds(p.proposed, p.point.location);
  if (!(bounds.width() > 0.0)) return std::nullopt;
  p.log_proposal_ratio = std::log(surface.count(subset) / (surface.subspace_volume(subset) * bounds.width())) +
                         birth_death_log_factor(problem.prior.moves, MoveKind::Death);
  return p;
}

std::optional<Proposal> make_shift(const Problem& /*problem*/, const SamplerState& state, int k, SubsetMask subset,
                                   int index, SupportPoint point) {
  const auto& surface = state.surfaces[k];
  const auto& list = surface.points(subset);
  if (list.empty()) return std::nullopt;
  const double floor = surface.delta_min();
  double total = 0.0;
  for (const auto& pt : list) total += pt.level - floor;
  const auto& old = list.at(index);
  const double w_old = old.level - floor;
  const double w_new = point.level - floor;
  if (!(total > 0.0) || !(w_old > 0.0) || !(w_new > 0.0)) return std::nullopt;
  const double len_old = level_bounds_excluding(surface, subset, index, old.location).width();
  const double len_new = level_bounds_excluding(surface, subset, index, point.location).width();
  if (!(len_old > 0.0) || !(len_new > 0.0)) return std::nullopt;
  Proposal p;
  p.kind = MoveKind::Shift;
  p.region = k;
  p.subset = subset;
  p.index = index;
  p.corner = old.location.cwiseMin(point.location);
  try {
    p.proposed = apply_shift(surface, subset, index, point);
  } catch (const Error&) {
    return std::nullopt;
  }
  const double total_new = total - w_old + w_new;
  p.log_proposal_ratio = std::log(w_new * total / (w_old * total_new)) + std::log(len_new / len_old);
  p.point = std::move(point);
  return p;
}

std::optional<Proposal> propose(const Problem& problem, const SamplerState& state, int k, MoveKind kind,
                                SubsetMask subset, RandomSource& rng) {
  const auto& surface = state.surfaces[k];
  const auto& box = surface.box();
  const int m = surface.dim();
  switch (kind) {
    case MoveKind::Birth: {
      if (surface.at_capacity()) return std::nullopt;
      SupportPoint pt;
      pt.location = box.lower;
      for (int d = 0; d < m; ++d)
        if (axis_active(subset, d)) pt.location(d) = box.upper(d) - rng.uniform() * (box.upper(d) - box.lower(d));
      const auto b = birth_level_bounds(surface, pt.location);
      if (!(b.width() > 0.0)) return std::nullopt;
      pt.level = rng.uniform(b.lower, b.upper);
      return make_birth(problem, state, k, std::move(pt));
    }
    case MoveKind::Death: {
      const int n = surface.count(subset);
      if (n == 0) return std::nullopt;
      return make_death(problem, state, k, subset, static_cast<int>(rng.index(static_cast<std::size_t>(n))));
    }
    case MoveKind::Shift: {
      const auto& list = surface.points(subset);
      if (list.empty()) return std::nullopt;
      double total = 0.0;
      for (const auto& pt : list) total += pt.level - surface.delta_min();
      if (!(total > 0.0)) return std::nullopt;
      const double target = rng.uniform() * total;
      int j = 0;
      double acc = 0.0;
      for (; j < static_cast<int>(list.size()) - 1; ++j) {
        acc += list[j].level - surface.delta_min();
        if (target < acc) break;
      }
      const auto window = shift_location_bounds(surface, subset, j);
      SupportPoint pt;
      pt.location = box.lower;
      for (int d = 0; d < m; ++d)
        if (axis_active(subset, d))
          pt.location(d) = window.upper(d) - rng.uniform() * (window.upper(d) - window.lower(d));
      const auto b = level_bounds_excluding(surface, subset, j, pt.location);
      if (!(b.width() > 0.0)) return std::nullopt;
      pt.level = rng.uniform(b.lower, b.upper);
      return make_shift(problem, state, k, subset, j, std::move(pt));
    }
  }
  return std::nullopt;
}

std::optional<Proposal> propose(const Problem& problem, const SamplerState& state, int k, RandomSource& rng) {
  const auto subset = static_cast<SubsetMask>(1 + rng.index(static_cast<std::size_t>(state.surfaces[k].subsets())));
  const auto& m = problem.prior.moves;
  const double u = rng.uniform();
  const MoveKind kind = u < m.birth ? MoveKind::Birth : (u < m.birth + m.death ? MoveKind::Death : MoveKind::Shift);
  return propose(problem, state, k, kind, subset, rng);
}

namespace {

struct Evaluation {
  double log_ratio;
  std::vector<RowUpdate> updates;
};

Evaluation evaluate_proposal(const Proposal& p, const SamplerState& state, const Problem& problem) {
  const int k = p.region;
  const auto& data = problem.data[k];
  Evaluation e;
  e.updates = changed_rows(data, p.proposed, p.corner, state.levels[k]);
  const double s2 = state.nuisance.sigma2.size() > k ? state.nuisance.sigma2(k) : 1.0;
  const double lik = log_likelihood_delta_rows(problem.likelihood, data, state.nuisance.alpha(k), s2,
                                               state.levels[k], e.updates);
  const int delta_n = p.proposed.size() - state.surfaces[k].size();
  const double prior = prior_log_ratio_at(p.corner, k, state.surfaces[k], p.proposed, state.surfaces,
                                          problem.graph, problem.prior, delta_n);
  e.log_ratio = lik + prior + p.log_proposal_ratio;
  return e;
}

}  // namespace

double acceptance_log_ratio(const Proposal& proposal, const SamplerState& state, const Problem& problem) {
  return evaluate_proposal(proposal, state, problem).log_ratio;
}

void step(const Problem& problem, SamplerState& state, RandomSource& rng, MoveCounters* counters,
          std::int64_t* alpha_accepted) {
  const int k_count = problem.region_count();
  const auto& moves = problem.prior.moves;
  for (int k = 0; k < k_count; ++k) {
    const auto subset =
        static_cast<SubsetMask>(1 + rng.index(static_cast<std::size_t>(state.surfaces[k].subsets())));
    const double u = rng.uniform();
    const MoveKind kind =
        u < moves.birth ? MoveKind::Birth : (u < moves.birth + moves.death ? MoveKind::Death : MoveKind::Shift);
    const auto i = static_cast<int>(kind);
    if (counters) ++counters->proposed[i];
    auto proposal = propose(problem, state, k, kind, subset, rng);
    if (!proposal) {
      if (counters) ++counters->instant_rejected[i];
      continue;
    }
    auto eval = evaluate_proposal(*proposal, state, problem);
    const double threshold = std::exp(std::min(0.0, eval.log_ratio));
    if (rng.uniform() < threshold) {
      state.surfaces[k] = std::move(proposal->proposed);
      for (const auto& r : eval.updates) state.levels[k](r.row) = r.level;
      if (counters) ++counters->accepted[i];
    }
  }
  if (const auto* g = std::get_if<GaussianFamily>(&problem.likelihood.family)) {
    for (int k = 0; k < k_count; ++k)
      state.nuisance.sigma2(k) = gibbs_update_sigma2(*g, problem.data[k], state.nuisance.alpha(k), state.levels[k], rng);
  }
  if (problem.likelihood.car()) {
    const int acc = mh_update_alpha(problem, state.levels, state.nuisance, rng);
    if (alpha_accepted) *alpha_accepted += acc;
  }
}

Sampler::Sampler(Problem problem, SamplerSchedule schedule)
    : problem_(std::move(problem)), schedule_(std::move(schedule)), rng_(Rng::stream(schedule_.seed, {0})) {
  if (schedule_.iterations < 0 || schedule_.burn_in < 0 || schedule_.burn_in > schedule_.iterations)
    throw Error(ErrorCode::Config, "schedule needs 0 <= burn_in <= iterations");
  if (schedule_.thin < 1) throw Error(ErrorCode::Config, "thin must be >= 1");
  state_ = initial_state(problem_);
  init_traces();
}

Sampler::Sampler(Problem problem, SamplerSchedule schedule, const SamplerCheckpoint& checkpoint)
    : Sampler(std::move(problem), std::move(schedule)) {
  if (checkpoint.surfaces.size() != state_.surfaces.size())
    throw Error(ErrorCode::DimensionMismatch, "checkpoint region count");
  state_.surfaces = checkpoint.surfaces;
  state_.nuisance = checkpoint.nuisance;
  refresh_levels(problem_, state_);
  rng_.restore(checkpoint.rng_state);
  sweep_ = checkpoint.sweep;
  chain_ = checkpoint.chain;
  if (chain_.traces.empty()) init_traces();
}

void Sampler::init_traces() {
  chain_.traces.clear();
  for (std::size_t k = 0; k < schedule_.trace_points.size() && k < state_.surfaces.size(); ++k) {
    const auto& box = state_.surfaces[k].box();
    for (std::size_t j = 0; j < schedule_.trace_points[k].size(); ++j) {
      const auto& x = schedule_.trace_points[k][j];
      if (!box.contains(x)) throw Error(ErrorCode::OutOfDomain, "trace point outside sampling box");
      TraceSeries t;
      t.region = static_cast<int>(k);
      t.point = static_cast<int>(j);
      t.location = x;
      chain_.traces.push_back(std::move(t));
    }
  }
}

void Sampler::advance(std::int64_t sweeps) {
  const std::int64_t end = std::min(schedule_.iterations, sweep_ + std::max<std::int64_t>(sweeps, 0));
  while (sweep_ < end) {
    const std::int64_t s = ++sweep_;
    const bool post = s > schedule_.burn_in;
    step(problem_, state_, rng_, post ? &chain_.counters : nullptr, post ? &chain_.alpha_accepted : nullptr);
    for (auto& t : chain_.traces) t.values.push_back(evaluate_unchecked(state_.surfaces[t.region], t.location));
    if (post && (s - schedule_.burn_in) % schedule_.thin == 0)
      chain_.samples.push_back(Sample{state_.surfaces, state_.nuisance});
    chain_.sweeps = s;
  }
}

SamplerCheckpoint Sampler::checkpoint() const {
  return SamplerCheckpoint{state_.surfaces, state_.nuisance, rng_.state(), sweep_, chain_};
}

Chain run(const Problem& problem, const SamplerSchedule& schedule) {
  Sampler sampler(problem, schedule);
  sampler.run();
  return sampler.take_chain();
}

}  // namespace bsmmr
