#include "collenc/rng.hpp"

#include <cmath>
#include <numbers>

namespace collenc {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t derive_key(std::uint64_t parent, std::uint64_t stream) noexcept {
    return mix64(parent ^ mix64(stream + kGoldenGamma));
}

CounterRng CounterRng::split(std::uint64_t stream) const noexcept {
    return CounterRng(derive_key(key_, stream));
}

std::uint64_t CounterRng::next_u64() noexcept {
    const std::uint64_t n = counter_++;
    return mix64(key_ + (n + 1) * kGoldenGamma);
}

double CounterRng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t CounterRng::uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Lemire-style multiply-shift; bias is below 2^-64 * span, irrelevant here.
    const auto hi_bits =
        static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * span) >> 64);
    return lo + static_cast<std::int64_t>(hi_bits);
}

double CounterRng::normal() noexcept {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace collenc
