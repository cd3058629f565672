#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>

#include "aqmlab/errors.hpp"
#include "aqmlab/queue_disc.hpp"
#include "aqmlab/red.hpp"
#include "aqmlab/rng.hpp"

namespace aqmlab {

enum class RioProfile : std::uint8_t { kIn, kOut };

inline RioProfile rio_profile_from_string(const std::string& s, const std::string& key) {
    if (s == "in") return RioProfile::kIn;
    if (s == "out") return RioProfile::kOut;
    throw ConfigError(key + " must be 'in' or 'out', got '" + s + "'");
}

inline std::string to_string(RioProfile p) { return p == RioProfile::kIn ? "in" : "out"; }

/// RED-with-In/Out: dual RED profiles over one shared FIFO. In-profile
/// packets are judged against the EWMA of in-profile occupancy; out-profile
/// packets against the EWMA of total occupancy, with tighter thresholds so
/// they are shed first.
struct RioConfig {
    RedConfig in;   // defaults match the plain RED block
    RedConfig out;  // defaults: thresholds at half the in-profile's
    RioProfile voip_profile = RioProfile::kIn;
    RioProfile ftp_profile = RioProfile::kOut;
    RioProfile ack_profile = RioProfile::kIn;

    RioConfig() { out.min_th_bytes = in.min_th_bytes / 2; }

    void validate() const {
        in.validate("rio.in");
        out.validate("rio.out");
        if (out.min_th_bytes > in.min_th_bytes || out.resolved_max_th() > in.resolved_max_th())
            throw ConfigError("rio.out thresholds must not exceed rio.in thresholds");
    }

    RioProfile classify(TrafficClass cls) const {
        switch (cls) {
            case TrafficClass::kVoip: return voip_profile;
            case TrafficClass::kFtpData: return ftp_profile;
            case TrafficClass::kTcpAck: return ack_profile;
        }
        return RioProfile::kOut;
    }
};

class RioQueue final : public QueueDisc {
public:
    RioQueue(const RioConfig& cfg, double link_bandwidth_bps, RngStream rng)
        : cfg_(cfg),
          in_(RedState::from_config(cfg.in, link_bandwidth_bps)),
          out_(RedState::from_config(cfg.out, link_bandwidth_bps)),
          cap_bytes_(in_.buffer_cap_bytes),  // one physical buffer, sized by the in profile
          rng_(std::move(rng)) {}

    EnqueueDecision enqueue(Packet pkt, SimTime now) override {
        // Both averages advance on every arrival: the in profile over
        // in-tagged bytes, the out profile over total bytes.
        red_update_avg(in_, in_bytes_, now);
        red_update_avg(out_, total_bytes_, now);

        const RioProfile profile = cfg_.classify(pkt.cls);
        RedState& judge = profile == RioProfile::kIn ? in_ : out_;
        const double p = red_drop_prob(judge, pkt.size_bytes);
        if (rng_.uniform() < p) {
            red_note_drop(judge);
            return EnqueueDecision::dropped_probabilistic();
        }
        if (total_bytes_ + pkt.size_bytes > cap_bytes_) {
            red_note_drop(judge);
            return EnqueueDecision::dropped_overflow();
        }
        pkt.enqueued_at = now;
        total_bytes_ += pkt.size_bytes;
        out_.idle_since.reset();
        if (profile == RioProfile::kIn) {
            in_bytes_ += pkt.size_bytes;
            in_.idle_since.reset();
        }
        fifo_.push_back(std::move(pkt));
        return EnqueueDecision::enqueued();
    }

    std::optional<Packet> dequeue(SimTime now) override {
        if (fifo_.empty()) return std::nullopt;
        Packet pkt = std::move(fifo_.front());
        fifo_.pop_front();
        total_bytes_ -= pkt.size_bytes;
        pkt.stored_drop_prob.reset();
        if (cfg_.classify(pkt.cls) == RioProfile::kIn) {
            in_bytes_ -= pkt.size_bytes;
            if (in_bytes_ == 0 && !in_.idle_since) in_.idle_since = now;
        }
        if (fifo_.empty()) out_.idle_since = now;
        return pkt;
    }

    std::int64_t byte_length() const override { return total_bytes_; }
    std::size_t packet_length() const override { return fifo_.size(); }
    const std::deque<Packet>& contents() const override { return fifo_; }

    double avg_in() const { return in_.avg; }
    double avg_total() const { return out_.avg; }
    const RedState& in_state() const { return in_; }
    const RedState& out_state() const { return out_; }

private:
    RioConfig cfg_;
    RedState in_;
    RedState out_;
    std::int64_t cap_bytes_;
    RngStream rng_;
    std::int64_t in_bytes_ = 0;
    std::int64_t total_bytes_ = 0;
    std::deque<Packet> fifo_;
};

}  // namespace aqmlab
