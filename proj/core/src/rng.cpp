#include "fsl/rng.hpp"

#include <cmath>

namespace fsl {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double to_unit(std::uint64_t bits) {
  // Top 53 bits, shifted into (0, 1].
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}
}  // namespace

std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed + kGolden) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

double RngStream::uniform_at(std::uint64_t key, std::uint64_t slot) {
  return to_unit(mix64(key + slot * kGolden));
}

void RngStream::normal_pair_at(std::uint64_t key, std::uint64_t slot,
                               double& z0, double& z1) {
  const double u1 = uniform_at(key, slot);
  const double u2 = uniform_at(key, slot + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(kTwoPi * u2);
  z1 = r * std::sin(kTwoPi * u2);
}

double RngStream::normal_at(std::uint64_t key, std::uint64_t slot) {
  double z0;
  double z1;
  normal_pair_at(key, slot, z0, z1);
  return z0;
}

}  // namespace fsl
