#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace aqmlab {

/// Simulation clock value or duration, in integer nanoseconds.
///
/// Integer representation keeps event ordering bit-identical across
/// platforms: two equal times compare equal exactly, with no float drift.
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime from_ns(std::int64_t ns) { return SimTime{ns}; }
    static constexpr SimTime from_us(std::int64_t us) { return SimTime{us * 1'000}; }
    static constexpr SimTime from_ms(std::int64_t ms) { return SimTime{ms * 1'000'000}; }
    static SimTime from_seconds(double s) { return SimTime{std::llround(s * 1e9)}; }

    constexpr std::int64_t ns() const { return ns_; }
    constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

    constexpr bool is_zero() const { return ns_ == 0; }

    friend constexpr auto operator<=>(SimTime, SimTime) = default;

    friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ns_ + b.ns_}; }
    friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.ns_ - b.ns_}; }
    friend constexpr SimTime operator*(SimTime a, std::int64_t k) { return SimTime{a.ns_ * k}; }

    constexpr SimTime& operator+=(SimTime o) { ns_ += o.ns_; return *this; }
    constexpr SimTime& operator-=(SimTime o) { ns_ -= o.ns_; return *this; }

    /// Whole number of `slot`-long intervals contained in this duration.
    constexpr std::int64_t floor_div(SimTime slot) const { return ns_ / slot.ns_; }

private:
    constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}

    std::int64_t ns_ = 0;
};

/// Serialization time of `bytes` on a link of `bandwidth_bps`.
inline SimTime transmission_time(std::int64_t bytes, double bandwidth_bps) {
    return SimTime::from_ns(std::llround(static_cast<double>(bytes) * 8.0 * 1e9 / bandwidth_bps));
}

}  // namespace aqmlab
