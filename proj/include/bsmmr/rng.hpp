#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace bsmmr {

/// Source of randomness consumed by the samplers. Virtual so tests can script draws.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  /// Uniform on [0, 1).
  virtual double uniform() = 0;
  virtual double normal() = 0;
  /// Gamma(shape, scale = 1).
  virtual double gamma(double shape) = 0;
  virtual int binomial(int trials, double prob) = 0;

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }
};

/// mt19937_64-backed generator with serializable state. Distribution objects are
/// created per draw so the engine state alone determines the future stream.
class Rng final : public RandomSource {
 public:
  explicit Rng(std::uint64_t seed = 0x5eed) : engine_(seed) {}
  using RandomSource::uniform;

  /// Independent stream derived from a master seed and a path of ids
  /// (command, chain, fold, repetition, ...).
  static Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> ids);
  /// A 64-bit seed drawn from such a stream.
  static std::uint64_t derive(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    return stream(master, ids).bits();
  }

  std::uint64_t bits() { return engine_(); }

  double uniform() override { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() override { return std::normal_distribution<double>{}(engine_); }
  double gamma(double shape) override { return std::gamma_distribution<double>{shape, 1.0}(engine_); }
  int binomial(int trials, double prob) override {
    return std::binomial_distribution<int>{trials, prob}(engine_);
  }

  std::string state() const;
  void restore(const std::string& state);

  bool operator==(const Rng& o) const { return engine_ == o.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bsmmr
