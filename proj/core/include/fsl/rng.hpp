#pragma once

#include <cstdint>

namespace fsl {

// SplitMix64 finalizer: a full-avalanche 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Derives an independent stream key from (seed, stream index).
std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t stream);

// Counter-based generator. Every draw is a pure function of (key, counter),
// which buys two properties the samplers rely on:
//   * a chain can be resumed bit-exactly from (iteration, state) alone, and
//   * noise is addressable per (iteration, mode), so refining the truncation
//     dimension never changes the noise seen by the coarse modes.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_stream_key(seed, stream)) {}

  // Uniform on (0, 1]; never returns 0 so log() is always safe.
  double uniform() { return uniform_at(key_, counter_++); }

  // Standard normal via Box-Muller. Consumes two counter slots.
  double normal() {
    const double z = normal_at(key_, counter_);
    counter_ += 2;
    return z;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

  // Stateless access used by the chain loops.
  static double uniform_at(std::uint64_t key, std::uint64_t slot);
  static double normal_at(std::uint64_t key, std::uint64_t slot);
  // The Box-Muller pair rooted at `slot` (slot and slot+1 uniforms).
  static void normal_pair_at(std::uint64_t key, std::uint64_t slot, double& z0,
                             double& z1);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace fsl
