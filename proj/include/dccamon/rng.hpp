#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dccamon {

/// Deterministic random stream. All transforms (uniform, normal, bounded
/// integers) are implemented here rather than through std distributions so a
/// given seed produces the same values on every platform and toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double normal();

    /// Uniform integer in [lo, hi], both inclusive.
    int uniform_int(int lo, int hi);

    /// Bernoulli(theta) as 0/1.
    int bernoulli(double theta) { return uniform() < theta ? 1 : 0; }

    std::vector<int> permutation(int n);

    /// First k entries of a partial Fisher-Yates shuffle of 0..n-1.
    std::vector<int> sample_without_replacement(int n, int k);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent child seed from (seed, stream). Used for
/// counter-based per-sample streams so generation order never matters.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace dccamon
