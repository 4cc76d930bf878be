#include "vshift/random.h"

#include <cmath>
#include <numbers>

namespace vshift {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;
}  // namespace

std::uint64_t CounterRng::Mix(std::uint64_t x) {
  x += kGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(Mix(seed ^ Mix(stream))) {}

std::uint64_t CounterRng::Bits(std::uint64_t counter) const {
  return Mix(key_ + counter * kGamma);
}

double CounterRng::Uniform(std::uint64_t counter) const {
  return static_cast<double>(Bits(counter) >> 11) * kTwoPow53Inv;
}

double CounterRng::Normal(std::uint64_t index) const {
  const double u1 =
      static_cast<double>((Bits(2 * index) >> 11) + 1) * kTwoPow53Inv;
  const double u2 = Uniform(2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace vshift
