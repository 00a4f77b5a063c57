#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsmmr/chain.hpp"
#include "bsmmr/domain.hpp"
#include "bsmmr/likelihood.hpp"
#include "bsmmr/rng.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr {

struct SamplerSchedule {
  std::int64_t iterations = 0;  // sweeps
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;
  std::vector<std::vector<Eigen::VectorXd>> trace_points;  // per region
  std::uint64_t seed = 1;

  std::int64_t expected_samples() const { return iterations > burn_in ? (iterations - burn_in) / thin : 0; }
};

/// Surfaces, nuisance parameters and lambda cached at every data row.
struct SamplerState {
  std::vector<MonotoneSurface> surfaces;
  NuisanceState nuisance;
  std::vector<Eigen::VectorXd> levels;
};

/// Empty surfaces on each region's sampling box.
SamplerState initial_state(const Problem& problem);
void refresh_levels(const Problem& problem, SamplerState& state);

struct Proposal {
  MoveKind kind = MoveKind::Birth;
  int region = 0;
  SubsetMask subset = 0;
  int index = -1;         // removed or shifted point (order within the subprocess)
  SupportPoint point;     // born or shifted-to point
  double log_proposal_ratio = 0.0;
  MonotoneSurface proposed;
  Eigen::VectorXd corner;  // lower corner of the orthant where levels can change
};

/// Draws a move for region k. nullopt is an instant rejection.
std::optional<Proposal> propose(const Problem& problem, const SamplerState& state, int k, RandomSource& rng);
std::optional<Proposal> propose(const Problem& problem, const SamplerState& state, int k, MoveKind kind,
                                SubsetMask subset, RandomSource& rng);

/// Proposal for a given point. Used by tests and for reversibility checks.
std::optional<Proposal> make_birth(const Problem& problem, const SamplerState& state, int k, SupportPoint point);
std::optional<Proposal> make_death(const Problem& problem, const SamplerState& state, int k, SubsetMask subset,
                                   int index);
std::optional<Proposal> make_shift(const Problem& problem, const SamplerState& state, int k, SubsetMask subset,
                                   int index, SupportPoint point);

/// log R = likelihood delta + prior log ratio + log proposal ratio.
double acceptance_log_ratio(const Proposal& proposal, const SamplerState& state, const Problem& problem);

/// One sweep: a move per region in ascending order, then nuisance updates.
/// Counts moves into `counters` when given.
void step(const Problem& problem, SamplerState& state, RandomSource& rng, MoveCounters* counters = nullptr,
          std::int64_t* alpha_accepted = nullptr);

struct SamplerCheckpoint {
  std::vector<MonotoneSurface> surfaces;
  NuisanceState nuisance;
  std::string rng_state;
  std::int64_t sweep = 0;
  Chain chain;
};

class Sampler {
 public:
  Sampler(Problem problem, SamplerSchedule schedule);
  Sampler(Problem problem, SamplerSchedule schedule, const SamplerCheckpoint& checkpoint);

  /// Runs up to `sweeps` further sweeps without passing the schedule's end.
  void advance(std::int64_t sweeps);
  void run() { advance(schedule_.iterations - sweep_); }
  bool done() const { return sweep_ >= schedule_.iterations; }

  std::int64_t sweep() const { return sweep_; }
  const SamplerState& state() const { return state_; }
  const Chain& chain() const { return chain_; }
  Chain take_chain() { return std::move(chain_); }
  const Problem& problem() const { return problem_; }
  const SamplerSchedule& schedule() const { return schedule_; }

  SamplerCheckpoint checkpoint() const;

 private:
  void init_traces();

  Problem problem_;
  SamplerSchedule schedule_;
  SamplerState state_;
  Rng rng_;
  std::int64_t sweep_ = 0;
  Chain chain_;
};

Chain run(const Problem& problem, const SamplerSchedule& schedule);

}  // namespace bsmmr
