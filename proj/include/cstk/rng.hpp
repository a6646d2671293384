#pragma once

// Counter-based 64-bit generator. Output n of a stream with key k is
// splitmix_mix(k + (n + 1) * 0x9E3779B97F4A7C15), i.e. SplitMix64 read in counter
// mode, so any draw can be located without replaying the stream.
//
// Stream splitting: derive_seed(master, {tags...}) folds each tag into the key
// with the same mixer. The harness derives one key per (algorithm, s, m, trial)
// cell and then sub-keys for the matrix, signal and noise of that trial; the
// result does not depend on which thread runs the trial or in what order.

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace cstk {

constexpr std::uint64_t splitmix_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = splitmix_mix(master ^ 0x6A09E667F3BCC909ULL);
    for (std::uint64_t t : tags) h = splitmix_mix(h ^ splitmix_mix(t + 0x9E3779B97F4A7C15ULL));
    return h;
}

// Sub-stream tags used throughout.
inline constexpr std::uint64_t kTagMatrix = fnv1a("matrix");
inline constexpr std::uint64_t kTagSignal = fnv1a("signal");
inline constexpr std::uint64_t kTagNoise = fnv1a("noise");

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return splitmix_mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n); n > 0. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double gaussian() noexcept;

    /// +1 or -1 with equal probability.
    double sign() noexcept { return (next_u64() >> 63) ? -1.0 : 1.0; }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace cstk
