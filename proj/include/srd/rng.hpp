#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace srd {

// Counter-style random stream: the draw sequence depends only on
// (seed, stream), so sample i can be regenerated on any worker.
// Engine is xoshiro256++ keyed through splitmix64.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream indices are partitioned so the different consumers of one seed
// never overlap.
namespace streams {
inline constexpr std::uint64_t kSpherical = 0;
inline constexpr std::uint64_t kNaive = std::uint64_t{1} << 62;
inline constexpr std::uint64_t kChain = std::uint64_t{1} << 63;
inline constexpr std::uint64_t kDiagnostics = (std::uint64_t{1} << 63) | (std::uint64_t{1} << 62);
}  // namespace streams

}  // namespace srd
