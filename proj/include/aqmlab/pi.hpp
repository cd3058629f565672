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

/// Proportional-integral controller AQM. Defaults are the published ns-2
/// values (a = 1.822e-5, b = 1.816e-5, reference queue 50 packets, sampled
/// at 170 Hz). The packet cap defaults to the RED buffer expressed in
/// mean-sized packets so all schemes contend for comparable buffering.
struct PiConfig {
    double a = 1.822e-5;
    double b = 1.816e-5;
    std::int64_t q_ref_pkts = 50;
    double sample_hz = 170.0;
    std::int64_t cap_pkts = 115;

    SimTime sample_interval() const { return SimTime::from_seconds(1.0 / sample_hz); }

    void validate() const {
        if (!(a > 0.0)) throw ConfigError("pi.a must be > 0");
        if (!(b > 0.0)) throw ConfigError("pi.b must be > 0");
        if (q_ref_pkts <= 0) throw ConfigError("pi.q_ref_pkts must be > 0");
        if (!(sample_hz > 0.0)) throw ConfigError("pi.sample_hz must be > 0");
        if (cap_pkts <= 0) throw ConfigError("pi.cap_pkts must be > 0");
    }
};

class PiQueue final : public QueueDisc {
public:
    PiQueue(const PiConfig& cfg, RngStream rng) : cfg_(cfg), rng_(std::move(rng)) {}

    EnqueueDecision enqueue(Packet pkt, SimTime now) override {
        if (rng_.uniform() < prob_) {
            return EnqueueDecision::dropped_probabilistic();
        }
        if (static_cast<std::int64_t>(fifo_.size()) >= cfg_.cap_pkts) {
            return EnqueueDecision::dropped_overflow();
        }
        pkt.enqueued_at = now;
        occupancy_bytes_ += pkt.size_bytes;
        fifo_.push_back(std::move(pkt));
        return EnqueueDecision::enqueued();
    }

    /// Periodic controller update, invoked every sample_interval.
    void sample(SimTime) {
        const auto q = static_cast<double>(fifo_.size());
        const auto q_ref = static_cast<double>(cfg_.q_ref_pkts);
        const auto q_last = static_cast<double>(last_q_pkts_);
        prob_ = std::clamp(prob_ + cfg_.a * (q - q_ref) - cfg_.b * (q_last - q_ref), 0.0, 1.0);
        last_q_pkts_ = static_cast<std::int64_t>(fifo_.size());
    }

    std::optional<Packet> dequeue(SimTime) override {
        if (fifo_.empty()) return std::nullopt;
        Packet pkt = std::move(fifo_.front());
        fifo_.pop_front();
        occupancy_bytes_ -= pkt.size_bytes;
        pkt.stored_drop_prob.reset();
        return pkt;
    }

    std::int64_t byte_length() const override { return occupancy_bytes_; }
    std::size_t packet_length() const override { return fifo_.size(); }
    const std::deque<Packet>& contents() const override { return fifo_; }

    double prob() const { return prob_; }
    SimTime sample_interval() const { return cfg_.sample_interval(); }

    /// Test hook: force controller state.
    void set_state(double prob, std::int64_t last_q_pkts) {
        prob_ = prob;
        last_q_pkts_ = last_q_pkts;
    }

private:
    PiConfig cfg_;
    RngStream rng_;
    double prob_ = 0.0;
    std::int64_t last_q_pkts_ = 0;
    std::int64_t occupancy_bytes_ = 0;
    std::deque<Packet> fifo_;
};

}  // namespace aqmlab
