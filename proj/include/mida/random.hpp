#pragma once

// Deterministic randomness. A run seed is split into labeled sub-streams, so
// the coins of the halving never depend on how many lottery draws happen, and
// vice versa. Integer sampling and shuffling are implemented here rather than
// through <random> distributions, whose output is implementation defined.

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace mida {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for (seed, label).
    static Rng stream(std::uint64_t seed, std::string_view label) {
        return Rng(splitmix64(splitmix64(seed) ^ fnv1a(label)));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform on [lo, hi], by rejection.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
        std::uint64_t span = std::uint64_t(hi) - std::uint64_t(lo);
        if (span == ~0ULL) return std::int64_t(next());
        std::uint64_t n = span + 1;
        std::uint64_t limit = ~0ULL - (~0ULL % n);
        std::uint64_t r;
        do r = next();
        while (r >= limit);
        return lo + std::int64_t(r % n);
    }

    bool coin() { return (next() >> 63) != 0; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            auto j = std::size_t(uniform(0, std::int64_t(i) - 1));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mida
