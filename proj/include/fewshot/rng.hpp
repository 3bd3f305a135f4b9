#pragma once

#include <cstdint>

namespace fewshot {

/// SplitMix64 step; also used to expand seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic child seed for (base, stream, index). Every task, world and
/// session in the harness gets its seed from this function.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

/// xoshiro256** seeded through SplitMix64. The integer stream is identical on
/// every platform; normals additionally depend on libm log/sin/cos.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [lo, hi], rejection sampled (no modulo bias).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fewshot
