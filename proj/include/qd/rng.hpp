#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace qd {

/// Seeded random stream. Copyable; a copy continues the same sequence independently.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Stream for a given (run seed, stream id) pair, e.g. one per individual or emitter.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    double uniform() { return unit_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
    double normal() { return normal_(engine_); }
    bool bernoulli(double p) { return unit_(engine_) < p; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n)
    {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer, used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

} // namespace qd
