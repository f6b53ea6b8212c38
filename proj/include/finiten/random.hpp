#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace finiten {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A stream is addressed by (seed, stream, substream); output block b of a
// stream is the encryption of counter {b, substream, stream_lo, stream_hi}
// under key {seed_lo, seed_hi}. Distinct addresses never share a counter, so
// replications can be generated in any order on any thread.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0, std::uint32_t substream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform double on the open interval (0, 1) with 53 random bits.
  double uniform_open();

  // The raw bijection, exposed for known-answer testing.
  static Counter encrypt(Counter counter, Key key);

 private:
  Key key_;
  Counter counter_;
  Counter buffer_{};
  int index_ = 4;
};

// 64-bit mixing finalizer (splitmix64); used to derive stream ids.
std::uint64_t mix64(std::uint64_t x);

// Standard normal variates by the Marsaglia polar method. Caches the second
// variate of each accepted pair, so one instance belongs to one stream.
class NormalVariate {
 public:
  double operator()(Philox4x32& rng);

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Gamma(shape, 1) variates via Marsaglia-Tsang squeeze; shape < 1 is boosted
// through Gamma(shape + 1) * U^(1/shape).
class GammaVariate {
 public:
  explicit GammaVariate(double shape);
  double operator()(Philox4x32& rng);
  double shape() const { return shape_; }

 private:
  double shape_;
  double d_;
  double c_;
  bool boosted_;
  NormalVariate normal_;
};

}  // namespace finiten
