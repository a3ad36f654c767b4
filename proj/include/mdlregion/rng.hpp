#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mdlregion {

/// Seedable random generator with platform-stable output.
///
/// The engine is std::mt19937_64, whose bit stream is fully specified by the
/// standard. The distribution helpers below are hand-rolled because the
/// std::*_distribution classes are allowed to differ between standard library
/// implementations. Substreams are derived from the root seed with splitmix64
/// so that every random quantity in a run traces back to one 64-bit seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Unbiased via rejection sampling.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (polar form avoided for determinism of
    /// draw count: exactly two uniforms per call).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        // Guard against log(0).
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Sample k distinct indices from [0, n) in increasing order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    /// A child generator whose seed mixes this stream's seed with a tag.
    /// Used to split independent randomness substreams from one dataset seed.
    static Rng substream(std::uint64_t seed, std::uint64_t tag) {
        return Rng(splitmix64(splitmix64(seed) ^ splitmix64(tag * 0x9e3779b97f4a7c15ULL + 1)));
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 engine_;
};

inline std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace mdlregion
