#include "dccamon/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dccamon {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1 - uniform() keeps the argument of log strictly positive.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

int Rng::uniform_int(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - lo + 1;
    // Multiply-shift; bias is O(2^-64) and irrelevant at desk scale.
    const auto wide = static_cast<unsigned __int128>(next_u64()) * range;
    return lo + static_cast<int>(wide >> 64);
}

std::vector<int> Rng::permutation(int n) {
    return sample_without_replacement(n, n);
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
    if (k > n || k < 0) throw std::invalid_argument("sample_without_replacement: k out of range");
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
        const int j = uniform_int(i, n - 1);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer applied twice over a golden-ratio offset.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    for (int i = 0; i < 2; ++i) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
    }
    return z;
}

}  // namespace dccamon
