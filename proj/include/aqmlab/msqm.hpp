#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "aqmlab/errors.hpp"
#include "aqmlab/queue_disc.hpp"
#include "aqmlab/red.hpp"
#include "aqmlab/rng.hpp"

namespace aqmlab {

/// When victim replacement may fire. Replacement only ever serves
/// authenticated arrivals (packets smaller than the size threshold); the
/// mode selects the congestion condition on top of that.
///   kAlways        — every admitted small packet attempts replacement, the
///                    literal reading of the scheme's pseudo-code (default).
///   kOverflowOrHot — only when the buffer would overflow or the average
///                    queue sits at or above the max threshold.
///   kOverflowOnly  — only on byte overflow.
enum class EcnMode : std::uint8_t { kAlways, kOverflowOrHot, kOverflowOnly };

inline std::string to_string(EcnMode m) {
    switch (m) {
        case EcnMode::kOverflowOrHot: return "overflow_or_hot";
        case EcnMode::kOverflowOnly: return "overflow_only";
        case EcnMode::kAlways: return "always";
    }
    return "unknown";
}

inline EcnMode ecn_mode_from_string(const std::string& s) {
    if (s == "overflow_or_hot") return EcnMode::kOverflowOrHot;
    if (s == "overflow_only") return EcnMode::kOverflowOnly;
    if (s == "always") return EcnMode::kAlways;
    throw ConfigError("msqm.ecn_mode must be one of overflow_or_hot|overflow_only|always, got '" +
                      s + "'");
}

struct MsqmConfig {
    double alpha = 0.1;  // EWMA weight of the size threshold
    EcnMode ecn_mode = EcnMode::kAlways;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("msqm.alpha must be in (0,1)");
    }
};

/// Moving average of arriving packet sizes; the big/small classification
/// boundary. Seeded with the first observed packet size, then
/// value <- (1 - alpha) * value + alpha * pkt_size on every arrival.
struct SizeThreshold {
    double alpha = 0.1;
    double value = 0.0;
    bool initialized = false;

    void observe(std::int64_t pkt_size_bytes) {
        if (!initialized) {
            value = static_cast<double>(pkt_size_bytes);
            initialized = true;
        } else {
            value = (1.0 - alpha) * value + alpha * static_cast<double>(pkt_size_bytes);
        }
    }
};

/// Size-differentiated drop probability: packets smaller than the threshold
/// are dropped with the RED probability scaled down by pkt_size / threshold;
/// packets at or above it keep the full RED probability.
inline double msqm_drop_prob(double red_drop, std::int64_t pkt_size_bytes, double size_thresh) {
    if (size_thresh > static_cast<double>(pkt_size_bytes)) {
        return red_drop * (static_cast<double>(pkt_size_bytes) / size_thresh);
    }
    return red_drop;
}

/// Index of the queued packet with the highest stored drop probability,
/// provided it strictly exceeds `incoming_drop_prob`. Ties prefer the larger
/// packet, then the earlier-enqueued one, then head-most queue position.
template <typename PacketSequence>
std::optional<std::size_t> msqm_select_victim(const PacketSequence& fifo,
                                              double incoming_drop_prob) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < fifo.size(); ++i) {
        const Packet& cand = fifo[i];
        const double prob = cand.stored_drop_prob.value_or(0.0);
        if (!(prob > incoming_drop_prob)) continue;
        if (!best) {
            best = i;
            continue;
        }
        const Packet& cur = fifo[*best];
        const double cur_prob = cur.stored_drop_prob.value_or(0.0);
        if (prob > cur_prob ||
            (prob == cur_prob && cand.size_bytes > cur.size_bytes) ||
            (prob == cur_prob && cand.size_bytes == cur.size_bytes &&
             cand.enqueued_at < cur.enqueued_at)) {
            best = i;
        }
    }
    return best;
}

/// Size-threshold queue management: RED-derived dropping scaled down for
/// packets smaller than the moving-average size threshold, plus replacement
/// of the most congestive queued packet by newly arrived small packets.
class MsqmQueue final : public QueueDisc {
public:
    MsqmQueue(const MsqmConfig& cfg, const RedConfig& red_cfg, double link_bandwidth_bps,
              RngStream rng)
        : cfg_(cfg),
          red_(RedState::from_config(red_cfg, link_bandwidth_bps)),
          rng_(std::move(rng)) {
        threshold_.alpha = cfg.alpha;
    }

    EnqueueDecision enqueue(Packet pkt, SimTime now) override {
        // The threshold tracks every arrival, including packets that are
        // subsequently dropped.
        threshold_.observe(pkt.size_bytes);
        red_update_avg(red_, occupancy_bytes_, now);
        const double red_drop = red_drop_prob(red_, pkt.size_bytes);
        const double drop_prob = msqm_drop_prob(red_drop, pkt.size_bytes, threshold_.value);

        if (pkt.size_bytes > red_.buffer_cap_bytes) {
            red_note_drop(red_);
            return EnqueueDecision::dropped_overflow();
        }
        if (rng_.uniform() < drop_prob) {
            red_note_drop(red_);
            return EnqueueDecision::dropped_probabilistic();
        }

        const bool fits = occupancy_bytes_ + pkt.size_bytes <= red_.buffer_cap_bytes;
        const bool authenticated = static_cast<double>(pkt.size_bytes) < threshold_.value;
        const bool hot = red_.avg >= static_cast<double>(red_.max_th_bytes);

        bool attempt_replace = false;
        switch (cfg_.ecn_mode) {
            case EcnMode::kAlways:
                attempt_replace = authenticated;
                break;
            case EcnMode::kOverflowOnly:
                attempt_replace = authenticated && !fits;
                break;
            case EcnMode::kOverflowOrHot:
                attempt_replace = authenticated && (!fits || hot);
                break;
        }

        if (!attempt_replace) {
            if (fits) {
                commit(std::move(pkt), drop_prob, now);
                return EnqueueDecision::enqueued();
            }
            red_note_drop(red_);
            return EnqueueDecision::dropped_overflow();
        }

        // Replacement swaps a strictly larger queued packet for the arrival;
        // same-size or smaller candidates are left alone.
        const auto victim_idx = msqm_select_victim(fifo_, drop_prob);
        if (victim_idx && fifo_[*victim_idx].size_bytes > pkt.size_bytes &&
            occupancy_bytes_ - fifo_[*victim_idx].size_bytes + pkt.size_bytes <=
                red_.buffer_cap_bytes) {
            Packet victim = remove_at(*victim_idx);
            red_note_drop(red_);  // the eviction counts as a drop
            commit(std::move(pkt), drop_prob, now);
            return EnqueueDecision::enqueued_with_victim(std::move(victim));
        }
        if (cfg_.ecn_mode == EcnMode::kAlways && fits) {
            // Unconditional mode reaches here with no congestion present and
            // nothing marked: plain enqueue.
            commit(std::move(pkt), drop_prob, now);
            return EnqueueDecision::enqueued();
        }
        red_note_drop(red_);
        return EnqueueDecision::dropped_overflow();
    }

    std::optional<Packet> dequeue(SimTime now) override {
        if (fifo_.empty()) return std::nullopt;
        Packet pkt = std::move(fifo_.front());
        fifo_.pop_front();
        occupancy_bytes_ -= pkt.size_bytes;
        pkt.stored_drop_prob.reset();
        if (fifo_.empty()) red_.idle_since = now;
        return pkt;
    }

    std::int64_t byte_length() const override { return occupancy_bytes_; }
    std::size_t packet_length() const override { return fifo_.size(); }
    const std::deque<Packet>& contents() const override { return fifo_; }

    const RedState& red_state() const { return red_; }
    const SizeThreshold& threshold() const { return threshold_; }

private:
    void commit(Packet pkt, double drop_prob, SimTime now) {
        pkt.stored_drop_prob = drop_prob;
        pkt.enqueued_at = now;
        red_.idle_since.reset();
        occupancy_bytes_ += pkt.size_bytes;
        fifo_.push_back(std::move(pkt));
    }

    Packet remove_at(std::size_t idx) {
        Packet victim = std::move(fifo_[idx]);
        fifo_.erase(fifo_.begin() + static_cast<std::ptrdiff_t>(idx));
        occupancy_bytes_ -= victim.size_bytes;
        return victim;
    }

    MsqmConfig cfg_;
    RedState red_;
    SizeThreshold threshold_;
    RngStream rng_;
    std::int64_t occupancy_bytes_ = 0;
    std::deque<Packet> fifo_;
};

}  // namespace aqmlab
