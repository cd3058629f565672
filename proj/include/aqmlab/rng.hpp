#pragma once

#include <cstdint>

namespace aqmlab {

/// Deterministic random stream: PCG32 (O'Neill's pcg32, 64-bit LCG state,
/// xorshift-rotate output). The stream id selects the LCG increment, so
/// distinct stream ids walk provably disjoint state sequences from the same
/// seed. A stream is a pure function of (seed, stream_id).
///
/// Every stochastic entity in a run (each VoIP source, each queue's drop
/// decision point) owns its own stream id, so adding a flow never perturbs
/// another flow's draw sequence.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {
        inc_ = (stream_id << 1u) | 1u;
        state_ = 0;
        advance();
        state_ += mix64(seed);
        advance();
    }

    std::uint32_t next_u32() {
        const std::uint64_t old = state_;
        advance();
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe for inverse-CDF draws with a pole at 0.
    double uniform_pos() { return 1.0 - uniform(); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    friend bool operator==(const RngStream& a, const RngStream& b) {
        return a.state_ == b.state_ && a.inc_ == b.inc_;
    }

private:
    static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;

    // splitmix64 finalizer; disperses low-entropy seeds over the full state.
    static std::uint64_t mix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    void advance() { state_ = state_ * kMultiplier + inc_; }

    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 1;
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
};

/// Fixed stream-id layout for one simulation run.
namespace stream_ids {
inline constexpr std::uint64_t kBottleneckQueue = 1;
inline constexpr std::uint64_t kVoipSourceBase = 1'000'000;
}  // namespace stream_ids

}  // namespace aqmlab
