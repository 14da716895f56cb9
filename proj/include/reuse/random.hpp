#pragma once

#include <cstdint>

namespace reuse {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Maps 64 random bits to a double in [0, 1) with 53 bits of resolution.
inline constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Stream tags separating the independent families of draws.
enum class DrawKind : std::uint64_t {
  kReturn = 1,    // shared return indicators of the Bernoulli coupling
  kDuration = 2,  // usage-duration draws of the stack coupling
  kGenerator = 3,
  kSearch = 4,
};

// Counter-based uniform source. A draw is a pure function of the seed and its
// address (stream, kind, resource, step, index); there is no sequential state,
// so the same realization is seen regardless of query order.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t bits(DrawKind kind, std::uint64_t resource, std::uint64_t step,
                     std::uint64_t index = 0) const {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ stream_);
    h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
    h = splitmix64(h ^ resource);
    h = splitmix64(h ^ step);
    return splitmix64(h ^ index);
  }

  double uniform(DrawKind kind, std::uint64_t resource, std::uint64_t step,
                 std::uint64_t index = 0) const {
    return to_unit(bits(kind, resource, step, index));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

// Sequential engine for generators and search, built on the same mixer.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return to_unit(next()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace reuse
