#pragma once

#include <cstdint>
#include <random>

namespace ttsprt {

using rng_type = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent substreams of one trial.
enum class stream_id : std::uint64_t { rewards = 1, coin = 2, posterior = 3 };

constexpr std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) noexcept {
    return mix64(mix64(base_seed) ^ mix64(trial_index + 0x632be59bd9b4e019ULL));
}

inline rng_type make_stream(std::uint64_t base_seed, std::uint64_t trial_index, stream_id id) {
    const std::uint64_t s = mix64(trial_seed(base_seed, trial_index) ^ mix64(static_cast<std::uint64_t>(id) << 32));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return rng_type(seq);
}

}  // namespace ttsprt
