#ifndef MCFORGE_RNG_HPP
#define MCFORGE_RNG_HPP

#include <cstdint>
#include <stdexcept>

#include "mcforge/math.hpp"

namespace mcforge {

/// Source of randomness consumed by every sampler. Single-owner: no concurrent
/// draws from one stream. Virtual so tests can inject scripted draw sequences.
class RandomStream {
 public:
  virtual ~RandomStream() = default;

  virtual std::uint64_t next_u64() = 0;

  /// Uniform on [0,1); never returns 1.0 exactly (53-bit mantissa).
  virtual double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0,1); safe to feed through log or Phi^-1.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Normal variate via the inverse-CDF transform (PPND16). One uniform per
  /// draw; the transform choice is fixed because golden files depend on it.
  virtual double normal(double mean = 0.0, double sd = 1.0) {
    if (!(sd > 0.0)) throw std::invalid_argument("normal: sd must be positive");
    return mean + sd * inverse_normal_cdf(uniform_open01());
  }

  /// Exponential with RATE lambda, density lambda*exp(-lambda*x), mean 1/lambda.
  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
    return -std::log1p(-uniform01()) / rate;
  }
};

namespace detail {
inline std::uint64_t splitmix_fmix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based SplitMix64 stream keyed by (seed, stream_id). Same key gives
/// the identical sequence on every platform; distinct stream_ids under one
/// seed give statistically independent streams.
class SeededStream final : public RandomStream {
 public:
  SeededStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    state_ = detail::splitmix_fmix(seed ^ 0x5851F42D4C957F2DULL) ^
             detail::splitmix_fmix(stream_id ^ 0x14057B7EF767814FULL);
  }

  std::uint64_t next_u64() override {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::splitmix_fmix(state_);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Child stream for replicate/chain `index`, independent of this one.
  SeededStream substream(std::uint64_t index) const {
    return SeededStream(seed_, detail::splitmix_fmix(stream_id_ + 0x632BE59BD9B4E019ULL) + index);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
};

inline SeededStream new_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return SeededStream(seed, stream_id);
}

/// One-variate request, the wire form of the rng draw operation.
struct DistributionSpec {
  enum class Kind { uniform01, normal, exponential };
  Kind kind = Kind::uniform01;
  double a = 0.0;  // mean (normal)
  double b = 1.0;  // sd (normal) or rate (exponential)

  static DistributionSpec uniform01_spec() { return {Kind::uniform01, 0.0, 0.0}; }
  static DistributionSpec normal_spec(double mean, double sd) { return {Kind::normal, mean, sd}; }
  static DistributionSpec exponential_spec(double rate) { return {Kind::exponential, 0.0, rate}; }
};

inline double draw(RandomStream& stream, const DistributionSpec& dist) {
  switch (dist.kind) {
    case DistributionSpec::Kind::uniform01: return stream.uniform01();
    case DistributionSpec::Kind::normal: return stream.normal(dist.a, dist.b);
    case DistributionSpec::Kind::exponential: return stream.exponential(dist.b);
  }
  throw std::logic_error("draw: unreachable");
}

}  // namespace mcforge

#endif
