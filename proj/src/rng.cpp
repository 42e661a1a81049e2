#include "fbmlt/rng.hpp"

#include <cmath>
#include <numbers>

namespace fbmlt::rng {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_key(std::uint64_t seed, std::uint64_t index,
                            std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

double NormalStream::uniform_open() {
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double phi = 2.0 * std::numbers::pi * uniform_open();
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

void NormalStream::fill(std::span<double> out) {
  for (double& x : out) x = next();
}

}  // namespace fbmlt::rng
