#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <utility>

#include "aqmlab/errors.hpp"
#include "aqmlab/queue_disc.hpp"
#include "aqmlab/rng.hpp"

namespace aqmlab {

/// User-facing RED parameters. Thresholds left at 0 are derived from
/// min_th_bytes by the 3x (max threshold) and 8x (buffer cap) rules.
struct RedConfig {
    double q_weight = 0.002;
    double max_p = 0.1;
    std::int64_t min_th_bytes = 15'000;
    std::int64_t max_th_bytes = 0;      // 0 -> 3 * min_th_bytes
    std::int64_t buffer_cap_bytes = 0;  // 0 -> 8 * min_th_bytes
    std::int64_t mean_pkt_bytes = 1040;
    bool gentle = true;
    bool byte_mode = true;

    std::int64_t resolved_max_th() const {
        return max_th_bytes > 0 ? max_th_bytes : 3 * min_th_bytes;
    }
    std::int64_t resolved_cap() const {
        return buffer_cap_bytes > 0 ? buffer_cap_bytes : 8 * min_th_bytes;
    }

    void validate(const std::string& key_prefix) const {
        if (!(q_weight > 0.0 && q_weight < 1.0))
            throw ConfigError(key_prefix + ".q_weight must be in (0,1)");
        if (!(max_p > 0.0 && max_p <= 1.0))
            throw ConfigError(key_prefix + ".max_p must be in (0,1]");
        if (min_th_bytes <= 0)
            throw ConfigError(key_prefix + ".min_th_bytes must be > 0");
        if (mean_pkt_bytes <= 0)
            throw ConfigError(key_prefix + ".mean_pkt_bytes must be > 0");
        if (resolved_max_th() <= min_th_bytes)
            throw ConfigError(key_prefix + ".max_th_bytes must exceed min_th_bytes");
        if (resolved_cap() < resolved_max_th())
            throw ConfigError(key_prefix + ".buffer_cap_bytes must be >= max_th_bytes");
    }
};

/// RED control state: parameters plus the EWMA average, the packets-since-
/// last-drop count, and idle bookkeeping for the queue it is attached to.
struct RedState {
    double q_weight = 0.002;
    double max_p = 0.1;
    std::int64_t min_th_bytes = 15'000;
    std::int64_t max_th_bytes = 45'000;
    std::int64_t buffer_cap_bytes = 120'000;
    std::int64_t mean_pkt_bytes = 1040;
    bool gentle = true;
    bool byte_mode = true;

    /// Transmission time of one mean-sized packet on the attached link;
    /// the unit of idle decay.
    SimTime idle_slot = SimTime::from_us(1);

    double avg = 0.0;                              // EWMA of queue length, bytes
    long count = 0;                                // packets since last drop
    std::optional<SimTime> idle_since = SimTime{};  // queues start empty

    static RedState from_config(const RedConfig& cfg, double link_bandwidth_bps) {
        RedState s;
        s.q_weight = cfg.q_weight;
        s.max_p = cfg.max_p;
        s.min_th_bytes = cfg.min_th_bytes;
        s.max_th_bytes = cfg.resolved_max_th();
        s.buffer_cap_bytes = cfg.resolved_cap();
        s.mean_pkt_bytes = cfg.mean_pkt_bytes;
        s.gentle = cfg.gentle;
        s.byte_mode = cfg.byte_mode;
        s.idle_slot = transmission_time(cfg.mean_pkt_bytes, link_bandwidth_bps);
        if (s.idle_slot.ns() <= 0) s.idle_slot = SimTime::from_ns(1);
        return s;
    }
};

/// Advances the queue-length EWMA for one arrival. A non-empty queue gets the
/// standard update; an idle queue decays by (1 - q_weight) per elapsed
/// mean-packet transmission slot instead.
inline void red_update_avg(RedState& s, std::int64_t queue_bytes, SimTime now) {
    if (queue_bytes == 0 && s.idle_since) {
        const std::int64_t slots = (now - *s.idle_since).floor_div(s.idle_slot);
        if (slots > 0) {
            s.avg *= std::pow(1.0 - s.q_weight, static_cast<double>(slots));
            // Consume the decayed span so repeated idle arrivals do not
            // double-count it.
            *s.idle_since += s.idle_slot * slots;
        }
    } else {
        s.avg = (1.0 - s.q_weight) * s.avg + s.q_weight * static_cast<double>(queue_bytes);
    }
}

/// The gentle-mode piecewise-linear base probability p_b as a function of the
/// average queue size. Continuous at avg == max_th (both branches give max_p).
inline double red_base_prob(const RedState& s, double avg) {
    const auto min_th = static_cast<double>(s.min_th_bytes);
    const auto max_th = static_cast<double>(s.max_th_bytes);
    if (avg < min_th) return 0.0;
    if (avg < max_th) return s.max_p * (avg - min_th) / (max_th - min_th);
    if (s.gentle) {
        if (avg < 2.0 * max_th) return s.max_p + (1.0 - s.max_p) * (avg - max_th) / max_th;
        return 1.0;
    }
    return 1.0;
}

/// Emitted RED drop probability p_a for one arriving packet: the gentle base
/// probability, scaled by pkt_size / mean_pkt in byte mode, then
/// count-corrected by p_b / (1 - count * p_b). Advances the count; callers
/// reset it via red_note_drop on any drop.
inline double red_drop_prob(RedState& s, std::int64_t pkt_size_bytes) {
    double p_b = red_base_prob(s, s.avg);
    if (s.byte_mode) {
        p_b *= static_cast<double>(pkt_size_bytes) / static_cast<double>(s.mean_pkt_bytes);
        p_b = std::min(p_b, 1.0);
    }
    if (p_b <= 0.0) {
        s.count = 0;  // below min_th: restart the inter-drop count
        return 0.0;
    }
    const double denom = 1.0 - static_cast<double>(s.count) * p_b;
    const double p_a = denom > 0.0 ? std::min(p_b / denom, 1.0) : 1.0;
    s.count += 1;
    return p_a;
}

inline void red_note_drop(RedState& s) { s.count = 0; }

/// Gentle byte-mode RED queue: probabilistic early drop, drop-tail overflow.
class RedQueue final : public QueueDisc {
public:
    RedQueue(const RedConfig& cfg, double link_bandwidth_bps, RngStream rng)
        : state_(RedState::from_config(cfg, link_bandwidth_bps)), rng_(std::move(rng)) {}

    EnqueueDecision enqueue(Packet pkt, SimTime now) override {
        red_update_avg(state_, occupancy_bytes_, now);
        const double p = red_drop_prob(state_, pkt.size_bytes);
        if (rng_.uniform() < p) {
            red_note_drop(state_);
            return EnqueueDecision::dropped_probabilistic();
        }
        if (occupancy_bytes_ + pkt.size_bytes > state_.buffer_cap_bytes) {
            red_note_drop(state_);
            return EnqueueDecision::dropped_overflow();
        }
        pkt.enqueued_at = now;
        state_.idle_since.reset();
        occupancy_bytes_ += pkt.size_bytes;
        fifo_.push_back(std::move(pkt));
        return EnqueueDecision::enqueued();
    }

    std::optional<Packet> dequeue(SimTime now) override {
        if (fifo_.empty()) return std::nullopt;
        Packet pkt = std::move(fifo_.front());
        fifo_.pop_front();
        occupancy_bytes_ -= pkt.size_bytes;
        pkt.stored_drop_prob.reset();
        if (fifo_.empty()) state_.idle_since = now;
        return pkt;
    }

    std::int64_t byte_length() const override { return occupancy_bytes_; }
    std::size_t packet_length() const override { return fifo_.size(); }
    const std::deque<Packet>& contents() const override { return fifo_; }

    const RedState& state() const { return state_; }

private:
    RedState state_;
    RngStream rng_;
    std::int64_t occupancy_bytes_ = 0;
    std::deque<Packet> fifo_;
};

}  // namespace aqmlab
