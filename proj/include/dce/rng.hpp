#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace dce {

enum class StreamPurpose : std::uint32_t { graph = 1, noise = 2, delay = 3, generic = 4 };

// Named pseudo-random stream. Streams intended for concurrent use are split
// from a master seed by (replicate, purpose) so that enabling or disabling
// one consumer never shifts the draws of another.
//
// All samplers are implemented on top of the raw 64-bit output so that the
// produced sequences are pinned by this file, not by the standard library's
// distribution implementations.
class RngStream {
 public:
  RngStream() : RngStream(0) {}

  explicit RngStream(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32)};
    eng_.seed(seq);
  }

  static RngStream split(std::uint64_t master, std::uint64_t replicate, StreamPurpose p) {
    RngStream s;
    std::seed_seq seq{static_cast<std::uint32_t>(master),
                      static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(replicate),
                      static_cast<std::uint32_t>(replicate >> 32),
                      static_cast<std::uint32_t>(p)};
    s.eng_.seed(seq);
    return s;
  }

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform01_open_left() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Box-Muller; consumes exactly two raw draws
  double gaussian() {
    const double u1 = uniform01_open_left();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // index sampled proportionally to the nonnegative weights
  int discrete(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("discrete: negative weight");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("discrete: zero total weight");
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // uniform integer in [0, n)
  int below(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dce
