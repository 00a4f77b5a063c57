#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsmmr/rng.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr {

/// FNV-1a over the bit patterns of the values fed to it.
class Digest {
 public:
  void add(double v);
  void add(std::uint64_t v);
  std::uint64_t value() const { return h_; }
  std::string hex() const;

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

/// Up to `points` random births on an empty surface over `box`.
MonotoneSurface random_surface(const CovariateBox& box, double delta_min, double delta_max, int points, int n_max,
                               RandomSource& rng);

struct CheckResult {
  int criterion = 0;
  bool passed = false;
  std::string detail;
  std::uint64_t digest = 0;
};

/// evaluate(u) <= evaluate(v) for ordered pairs on random surfaces.
CheckResult check_monotonicity(std::uint64_t seed, int surfaces = 1000, int pairs = 100);
/// Exact dpq against a midpoint Riemann sum, and dpq_delta against recomputation.
CheckResult check_discrepancy(std::uint64_t seed, int pairs = 100, int riemann = 400);
/// integrand(4, 4.1) / integrand(0, 0.1) at p = 2, q = 1.
CheckResult check_anchor();
/// Birth/death antisymmetry and acceptance ratio against full posterior recomputation.
CheckResult check_move_algebra(std::uint64_t seed, int configs = 1000);

struct SelftestReport {
  std::vector<CheckResult> checks;
  std::uint64_t digest = 0;
  bool passed() const;
};

/// Criteria 1-4 at reduced sizes unless `full` is set.
SelftestReport run_selftest(std::uint64_t seed, bool full = false);

}  // namespace bsmmr
