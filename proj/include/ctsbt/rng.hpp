#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace ctsbt {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-based generator: draw i of stream (seed, stream) is a pure
// function of (seed, stream, i), so independently indexed streams are
// reproducible under any execution order. Normals use Box-Muller with the
// trigonometric pair, so the sequence is identical across standard
// libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed + 0x9E3779B97F4A7C15ull) ^
             mix64((stream + 1) * 0xD1B54A32D192ED03ull)) {}

  double uniform() {
    const std::uint64_t v = mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ull);
    return double(v >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ctsbt
