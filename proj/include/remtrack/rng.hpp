#ifndef REMTRACK_RNG_HPP
#define REMTRACK_RNG_HPP

#include <cstdint>
#include <random>

namespace remtrack {

// splitmix64 finalizer; used to spread seeds across substreams, never as the run generator
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// consumer ids for the per-slot substreams
enum class rng_consumer : std::uint64_t { source = 0, policy = 1, channel = 2 };

// derived generator seed for one consumer; distinct consumers never share a stream
inline std::uint64_t substream_seed(std::uint64_t seed, rng_consumer consumer) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ (0xd6e8feb86659fd93ULL * (static_cast<std::uint64_t>(consumer) + 1)));
    return s;
}

// base seed of replica r; replica 0 keeps the caller's seed so a single
// replica is bit-identical to a plain run, and every replica seed can be fed
// back through --seed to reproduce that row alone
inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t r) {
    if (r == 0) return seed;
    return splitmix64(splitmix64(seed) + 0x632be59bd9b4e019ULL * r);
}

// uniform doubles in [0,1); the explicit 53-bit mantissa path is bit-stable across
// platforms, which std::uniform_real_distribution does not guarantee
class uniform_stream {
  public:
    explicit uniform_stream(std::uint64_t seed) : gen_(seed) {}

    double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 gen_;
};

} // namespace remtrack

#endif
