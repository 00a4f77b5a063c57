#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "bsmmr/likelihood.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr {

enum class MoveKind { Birth = 0, Death = 1, Shift = 2 };

const char* to_string(MoveKind kind);

struct Sample {
  std::vector<MonotoneSurface> surfaces;
  NuisanceState nuisance;

  bool operator==(const Sample& o) const { return surfaces == o.surfaces && nuisance == o.nuisance; }
};

/// Post-burn-in move statistics. proposed counts every drawn move including
/// instant rejections.
struct MoveCounters {
  std::array<std::int64_t, 3> proposed{};
  std::array<std::int64_t, 3> accepted{};
  std::array<std::int64_t, 3> instant_rejected{};

  std::int64_t total_proposed() const { return proposed[0] + proposed[1] + proposed[2]; }
  double acceptance_rate(MoveKind kind) const {
    const auto i = static_cast<int>(kind);
    return proposed[i] ? static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]) : 0.0;
  }
  bool operator==(const MoveCounters& o) const = default;
};

/// Level of one region's surface at a fixed location, one value per sweep.
struct TraceSeries {
  int region = 0;
  int point = 0;
  Eigen::VectorXd location;
  std::vector<double> values;

  bool operator==(const TraceSeries& o) const {
    return region == o.region && point == o.point && location == o.location && values == o.values;
  }
};

struct Chain {
  std::vector<Sample> samples;
  MoveCounters counters;
  std::vector<TraceSeries> traces;
  std::int64_t sweeps = 0;
  std::int64_t alpha_accepted = 0;

  bool empty() const { return samples.empty(); }
  bool operator==(const Chain& o) const {
    return samples == o.samples && counters == o.counters && traces == o.traces && sweeps == o.sweeps &&
           alpha_accepted == o.alpha_accepted;
  }
};

}  // namespace bsmmr
