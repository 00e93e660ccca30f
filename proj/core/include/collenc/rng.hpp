#pragma once

#include <cstdint>

namespace collenc {

/// Counter-based generator: the n-th draw of a stream is a pure function of
/// (key, n), so streams can be split per obstacle, per image or per epoch
/// without caring about iteration order or thread count.
///
/// The mixing function is the SplitMix64 finalizer applied to
/// key + n * golden_gamma.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    /// Independent child stream identified by `stream`.
    [[nodiscard]] CounterRng split(std::uint64_t stream) const noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] (inclusive).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;

    /// Standard normal via Box-Muller; consumes two draws per call.
    double normal() noexcept;

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Key for child stream `stream` of `parent`.
std::uint64_t derive_key(std::uint64_t parent, std::uint64_t stream) noexcept;

}  // namespace collenc
