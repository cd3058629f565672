#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "aqmlab/errors.hpp"
#include "aqmlab/packet.hpp"
#include "aqmlab/rng.hpp"
#include "aqmlab/sim_time.hpp"

namespace aqmlab {

/// Pareto quantile parameterized by mean: x_m * u^(-1/shape) with scale
/// x_m = mean * (shape - 1) / shape. Finite mean requires shape > 1.
inline double pareto_quantile(double shape, double mean, double u) {
    const double x_m = mean * (shape - 1.0) / shape;
    return x_m * std::pow(u, -1.0 / shape);
}

/// Draws a Pareto-distributed duration in seconds. u is taken from (0,1] so
/// the pole at u = 0 is never hit; every sample is >= the scale x_m.
inline double pareto_sample(RngStream& rng, double shape, double mean) {
    if (!(shape > 1.0)) throw ConfigError("pareto shape must be > 1 for a finite mean");
    if (!(mean > 0.0)) throw ConfigError("pareto mean must be > 0");
    return pareto_quantile(shape, mean, rng.uniform_pos());
}

struct VoipConfig {
    double rate_bps = 78'000.0;
    std::int64_t pkt_size_bytes = 160;
    double on_mean_s = 1.0;
    double off_mean_s = 1.35;
    double shape = 1.5;

    /// Constant source-side inter-packet gap during talkspurts,
    /// pkt_size * 8 / rate rounded to whole nanoseconds (16410256 ns at the
    /// default 160 B / 78 kbps).
    SimTime emission_gap() const {
        return SimTime::from_ns(
            std::llround(static_cast<double>(pkt_size_bytes) * 8.0 * 1e9 / rate_bps));
    }

    void validate() const {
        if (!(rate_bps > 0.0)) throw ConfigError("voip.rate_bps must be > 0");
        if (pkt_size_bytes < kMinPacketBytes)
            throw ConfigError("voip.pkt_size_bytes must be >= 40");
        if (!(on_mean_s > 0.0)) throw ConfigError("voip.on_mean_s must be > 0");
        if (!(off_mean_s > 0.0)) throw ConfigError("voip.off_mean_s must be > 0");
        if (!(shape > 1.0)) throw ConfigError("voip.shape must be > 1");
    }
};

/// ON/OFF talkspurt source: emits fixed-size packets at a constant gap while
/// ON, silent while OFF, with Pareto-distributed phase durations. The first
/// packet of each talkspurt is emitted at the phase start; a packet due
/// exactly at the phase end is still emitted.
class VoipSource {
public:
    enum class Phase : std::uint8_t { kOn, kOff };

    VoipSource(std::uint32_t flow_id, const VoipConfig& cfg, RngStream rng,
               SimTime start = SimTime{})
        : flow_id_(flow_id), cfg_(cfg), gap_(cfg.emission_gap()), rng_(std::move(rng)) {
        phase_ = Phase::kOn;
        next_emit_at_ = start;
        phase_ends_at_ = start + draw_duration(cfg_.on_mean_s);
    }

    /// Emits every packet due at or before `now`, advancing phases as they
    /// expire. created_at carries the exact emission instant.
    std::vector<Packet> step(SimTime now) {
        std::vector<Packet> out;
        for (;;) {
            if (phase_ == Phase::kOn) {
                if (next_emit_at_ <= phase_ends_at_) {
                    if (next_emit_at_ > now) break;
                    out.push_back(make_packet(next_emit_at_));
                    next_emit_at_ += gap_;
                } else {
                    if (phase_ends_at_ > now) break;
                    phase_ = Phase::kOff;
                    phase_ends_at_ += draw_duration(cfg_.off_mean_s);
                }
            } else {
                if (phase_ends_at_ > now) break;
                const SimTime on_start = phase_ends_at_;
                phase_ = Phase::kOn;
                next_emit_at_ = on_start;
                phase_ends_at_ = on_start + draw_duration(cfg_.on_mean_s);
            }
        }
        return out;
    }

    /// Next instant at which step() has work to do.
    SimTime next_due() const {
        if (phase_ == Phase::kOn) return std::min(next_emit_at_, phase_ends_at_);
        return phase_ends_at_;
    }

    Phase phase() const { return phase_; }
    SimTime phase_ends_at() const { return phase_ends_at_; }
    SimTime emission_gap() const { return gap_; }
    std::uint64_t emitted() const { return emit_count_; }

private:
    SimTime draw_duration(double mean_s) {
        return SimTime::from_seconds(pareto_sample(rng_, cfg_.shape, mean_s));
    }

    Packet make_packet(SimTime at) {
        Packet pkt;
        pkt.cls = TrafficClass::kVoip;
        pkt.size_bytes = cfg_.pkt_size_bytes;
        pkt.flow_id = flow_id_;
        pkt.seq = emit_count_++;
        pkt.created_at = at;
        return pkt;
    }

    std::uint32_t flow_id_;
    VoipConfig cfg_;
    SimTime gap_;
    RngStream rng_;
    Phase phase_ = Phase::kOn;
    SimTime next_emit_at_{};
    SimTime phase_ends_at_{};
    std::uint64_t emit_count_ = 0;
};

}  // namespace aqmlab
