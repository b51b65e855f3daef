#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <thread>
#include <vector>

#include "droughtcast/core.hpp"

namespace droughtcast {

// Deterministic randomness. Every stochastic step in the pipeline draws from
// an Rng stream keyed by (master seed, purpose, counter), so results are
// bit-identical across runs, platforms and thread counts. std::mt19937 plus
// standard distributions would not give that guarantee (distribution output
// is implementation-defined), hence the small self-contained generator here.

/// splitmix64 finalizer; also used to mix derivation keys.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream purposes; part of the documented seed-derivation scheme.
enum : std::uint64_t {
    kPurposeSplitShuffle = 1,  // train/test shuffle
    kPurposeTree = 2,          // per-tree bootstrap + feature sampling
    kPurposeOvrClass = 3,      // per-class seed inside a OneVsRest model
    kPurposeVariant = 4,       // per-model-variant seed in the pipeline
};

/// Splittable counter scheme: seed of stream (purpose, index) under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                                 std::uint64_t index) {
    std::uint64_t h = mix64(master + 0x632be59bd9b4e019ULL * (purpose + 1));
    return mix64(h ^ mix64(index));
}

/// xoshiro256++ seeded via splitmix64 expansion.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = s;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
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

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw ParameterError("Rng::below bound must be positive");
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// First `count` elements of a random permutation of [0, n), ascending.
    /// Sorted output keeps downstream tie-breaking independent of draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count) {
        if (count > n) throw ParameterError("sample larger than population");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(count);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

/// Runs fn(i) for i in [0, n) across `threads` workers (0 = hardware count).
/// Work is split by static index chunks; callers must make fn(i) independent
/// of execution order, which keeps results identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    std::size_t worker_count = threads > 0 ? static_cast<std::size_t>(threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
    worker_count = std::min(worker_count, n);
    if (worker_count <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    const std::size_t chunk = (n + worker_count - 1) / worker_count;
    for (std::size_t w = 0; w < worker_count; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& worker : workers) worker.join();
}

}  // namespace droughtcast
