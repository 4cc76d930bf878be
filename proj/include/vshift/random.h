#ifndef VSHIFT_RANDOM_H_
#define VSHIFT_RANDOM_H_

#include <cstdint>

namespace vshift {

// Counter-based generator built on the SplitMix64 finalizer.
//
//   Mix(x):   x += 0x9E3779B97F4A7C15
//             x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
//             x = (x ^ (x >> 27)) * 0x94D049BB133111EB
//             return x ^ (x >> 31)
//   key     = Mix(seed ^ Mix(stream))
//   bits(i) = Mix(key + i * 0x9E3779B97F4A7C15)       (mod 2^64)
//   uniform(i) = (bits(i) >> 11) * 2^-53              in [0, 1)
//   normal(i)  = sqrt(-2 ln u1) * cos(2 pi u2), with
//                u1 = ((bits(2i) >> 11) + 1) * 2^-53  in (0, 1]
//                u2 = uniform(2i + 1)
//
// Every draw is a pure function of (seed, stream, counter), so results do not
// depend on evaluation order or thread count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static std::uint64_t Mix(std::uint64_t x);

  std::uint64_t Bits(std::uint64_t counter) const;
  double Uniform(std::uint64_t counter) const;
  double Normal(std::uint64_t index) const;

 private:
  std::uint64_t key_;
};

}  // namespace vshift

#endif  // VSHIFT_RANDOM_H_
