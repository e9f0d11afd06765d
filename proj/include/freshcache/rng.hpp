#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace freshcache {

// splitmix64; also usable as a 64-bit mixing bijection via mix().
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256++ with splitmix64 state expansion. Every simulation stream is
// keyed by (master seed, file index, replication index), so results do not
// depend on how work is spread over threads:
//   key = mix(mix(mix(master + GAMMA) ^ file + GAMMA) ^ replication + GAMMA)
// where mix/GAMMA are the splitmix64 finalizer and increment, and the key
// seeds the four state words through splitmix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : state_) word = sm.next();
  }

  static Xoshiro256pp stream(std::uint64_t master_seed, std::uint64_t file_index,
                             std::uint64_t replication) {
    SplitMix64 a(master_seed);
    SplitMix64 b(a.next() ^ file_index);
    SplitMix64 c(b.next() ^ replication);
    return Xoshiro256pp(c.next());
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0, 1]; never returns 0, so logs are safe.
  double uniform01() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Exponential inter-event time; rate <= 0 means the event never fires.
  double exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(uniform01()) / rate;
  }

  bool bernoulli(double p) { return uniform01() <= p; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace freshcache
