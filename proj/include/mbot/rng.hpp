#ifndef MBOT_RNG_HPP
#define MBOT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mbot/types.hpp"

namespace mbot {

// All randomness in the library flows through this wrapper so results are
// bit-identical across platforms. std::mt19937_64 has a standardized output
// sequence; std::uniform_*_distribution does not, so the bounded and
// floating-point draws are implemented here instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw InvalidInputError("uniform_int: n must be positive");
        std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal via polar Box-Muller (deterministic, no std distribution).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        have_spare_ = true;
        return u * factor;
    }

    /// First m entries of a Fisher-Yates shuffle of 0..n-1 (distinct indices,
    /// in sampled order). m == n yields a full random permutation.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m) {
        if (m > n) throw InvalidInputError("sample_without_replacement: m > n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t j = i + static_cast<std::size_t>(uniform_int(n - i));
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
        return out;
    }

    std::vector<std::size_t> sample_with_replacement(std::size_t n, std::size_t m) {
        std::vector<std::size_t> out(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<std::size_t>(uniform_int(n));
        return out;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for an independent substream identified by up to three indices.
/// Batches, replicates and sides each get their own stream so work can be
/// scheduled in any order without changing the draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master ^ 0x5851f42d4c957f2dULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

}  // namespace mbot

#endif
