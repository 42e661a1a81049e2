#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fbmlt::rng {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Key of the substream for (seed, index, stream). Independent of call order,
/// so paths can be generated in any order or in parallel.
std::uint64_t substream_key(std::uint64_t seed, std::uint64_t index,
                            std::uint64_t stream = 0) noexcept;

/// Standard normals from mt19937_64 via the Box-Muller transform.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t key) : engine_(key) {}
  double next();
  void fill(std::span<double> out);
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  double uniform_open();
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fbmlt::rng
