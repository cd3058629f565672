#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aqmlab/errors.hpp"
#include "aqmlab/packet.hpp"
#include "aqmlab/sim_time.hpp"

namespace aqmlab {

struct TcpConfig {
    std::int64_t data_pkt_bytes = 1040;  // 1000 B payload + 40 B header
    std::int64_t ack_pkt_bytes = 40;
    double min_rto_s = 0.2;
    double max_rto_s = 60.0;
    std::int64_t rwnd_pkts = 10'000;
    double initial_cwnd_pkts = 1.0;

    void validate() const {
        if (data_pkt_bytes < kMinPacketBytes) throw ConfigError("tcp.data_pkt_bytes must be >= 40");
        if (ack_pkt_bytes < kMinPacketBytes) throw ConfigError("tcp.ack_pkt_bytes must be >= 40");
        if (!(min_rto_s > 0.0)) throw ConfigError("tcp.min_rto_s must be > 0");
        if (!(max_rto_s >= min_rto_s)) throw ConfigError("tcp.max_rto_s must be >= min_rto_s");
        if (rwnd_pkts <= 0) throw ConfigError("tcp.rwnd_pkts must be > 0");
        if (!(initial_cwnd_pkts >= 1.0)) throw ConfigError("tcp.initial_cwnd_pkts must be >= 1");
    }
};

enum class TcpPhase : std::uint8_t { kSlowStart, kCongAvoid, kFastRecovery };

/// Greedy NewReno sender over unit-sized segments (seq counts segments, not
/// bytes). No delayed ACKs, no SACK; the receive window is a fixed cap.
class TcpSender {
public:
    TcpSender(std::uint32_t flow_id, const TcpConfig& cfg)
        : flow_id_(flow_id),
          cfg_(cfg),
          cwnd_(cfg.initial_cwnd_pkts),
          ssthresh_(static_cast<double>(cfg.rwnd_pkts)),
          min_rto_(SimTime::from_seconds(cfg.min_rto_s)),
          max_rto_(SimTime::from_seconds(cfg.max_rto_s)),
          rto_(std::max(SimTime::from_seconds(1.0), min_rto_)) {}

    /// Releases the initial window. Call once at flow start.
    std::vector<Packet> start(SimTime now) {
        std::vector<Packet> out;
        release_window(now, out);
        if (!out.empty()) arm_timer(now);
        return out;
    }

    /// Processes one cumulative ACK; returns segments to (re)transmit.
    std::vector<Packet> on_ack(std::uint64_t ack_seq, SimTime now) {
        // A cumulative ACK names the next expected segment, so it can be at
        // most one past the highest sequence ever transmitted.
        if (ack_seq > segments_transmitted_through_) {
            throw SimulatorBugError("flow " + std::to_string(flow_id_) + ": ack " +
                                    std::to_string(ack_seq) + " for never-sent data");
        }
        std::vector<Packet> out;
        if (ack_seq <= highest_acked_) {
            handle_dup_ack(now, out);
        } else {
            handle_new_ack(ack_seq, now, out);
        }
        if (next_seq_ > highest_acked_) {
            if (!out.empty() || rearm_pending_) arm_timer(now);
        } else {
            disarm_timer();
        }
        return out;
    }

    /// Retransmission timeout: collapse to one-segment slow start and rewind
    /// the send pointer to the cumulative ACK (go-back-N; segments the
    /// receiver already buffered are skipped via cumulative ACK jumps).
    std::vector<Packet> on_timeout(SimTime now) {
        ssthresh_ = std::max(std::floor(cwnd_ / 2.0), 2.0);
        cwnd_ = 1.0;
        phase_ = TcpPhase::kSlowStart;
        dup_ack_count_ = 0;
        rto_ = std::min(rto_ + rto_, max_rto_);  // exponential backoff
        next_seq_ = highest_acked_;
        std::vector<Packet> out;
        release_window(now, out);  // re-sends the oldest unacked under cwnd = 1
        arm_timer(now);
        return out;
    }

    // Timer surface for the event engine: the epoch increments on every
    // (re)arm, so a scheduled timer event is valid only while its epoch
    // matches.
    std::uint64_t timer_epoch() const { return timer_epoch_; }
    std::optional<SimTime> timer_deadline() const { return timer_deadline_; }

    double cwnd() const { return cwnd_; }
    double ssthresh() const { return ssthresh_; }
    TcpPhase phase() const { return phase_; }
    std::uint64_t next_seq() const { return next_seq_; }
    std::uint64_t highest_acked() const { return highest_acked_; }
    int dup_ack_count() const { return dup_ack_count_; }
    SimTime rto() const { return rto_; }
    SimTime srtt() const { return srtt_; }
    std::uint64_t segments_in_flight() const { return next_seq_ - highest_acked_; }

private:
    struct SegmentMeta {
        SimTime sent_at{};
        bool retransmitted = false;
    };

    void handle_new_ack(std::uint64_t ack_seq, SimTime now, std::vector<Packet>& out) {
        // RTT sample from the highest newly acked segment, skipping
        // retransmitted ones (Karn's rule).
        if (auto it = unacked_.find(ack_seq - 1); it != unacked_.end() && !it->second.retransmitted) {
            update_rtt(now - it->second.sent_at);
        }
        unacked_.erase(unacked_.begin(), unacked_.lower_bound(ack_seq));
        dup_ack_count_ = 0;
        rearm_pending_ = true;

        if (phase_ == TcpPhase::kFastRecovery) {
            if (ack_seq >= recover_seq_) {
                cwnd_ = ssthresh_;  // full ACK deflates and exits recovery
                phase_ = TcpPhase::kCongAvoid;
                highest_acked_ = ack_seq;
            } else {
                highest_acked_ = ack_seq;  // partial ACK: retransmit next hole, stay
                out.push_back(retransmit(ack_seq, now));
            }
        } else if (phase_ == TcpPhase::kSlowStart) {
            cwnd_ += 1.0;
            highest_acked_ = ack_seq;
            if (cwnd_ >= ssthresh_) phase_ = TcpPhase::kCongAvoid;
        } else {
            cwnd_ += 1.0 / cwnd_;
            highest_acked_ = ack_seq;
        }
        // A straggler ACK for data sent before an RTO rewind can move the
        // cumulative point past the send pointer.
        next_seq_ = std::max(next_seq_, highest_acked_);
        release_window(now, out);
    }

    void handle_dup_ack(SimTime now, std::vector<Packet>& out) {
        if (next_seq_ == highest_acked_) return;  // nothing outstanding; stray ACK
        ++dup_ack_count_;
        if (phase_ == TcpPhase::kFastRecovery) {
            cwnd_ += 1.0;  // window inflation
        } else if (dup_ack_count_ == 3) {
            ssthresh_ = std::max(std::floor(cwnd_ / 2.0), 2.0);
            cwnd_ = ssthresh_ + 3.0;
            recover_seq_ = next_seq_;
            phase_ = TcpPhase::kFastRecovery;
            out.push_back(retransmit(highest_acked_, now));
        }
        release_window(now, out);
    }

    void release_window(SimTime now, std::vector<Packet>& out) {
        const auto window =
            std::min(static_cast<std::int64_t>(std::floor(cwnd_)), cfg_.rwnd_pkts);
        while (static_cast<std::int64_t>(next_seq_ - highest_acked_) < window) {
            out.push_back(make_segment(next_seq_, now, /*retransmit=*/false));
            ++next_seq_;
        }
    }

    Packet make_segment(std::uint64_t seq, SimTime now, bool retransmit) {
        Packet pkt;
        pkt.cls = TrafficClass::kFtpData;
        pkt.size_bytes = cfg_.data_pkt_bytes;
        pkt.flow_id = flow_id_;
        pkt.seq = seq;
        pkt.created_at = now;
        const bool seen_before = unacked_.contains(seq);
        auto& meta = unacked_[seq];
        meta.sent_at = now;
        if (retransmit || seen_before) meta.retransmitted = true;  // Karn: no RTT sample
        segments_transmitted_through_ = std::max(segments_transmitted_through_, seq + 1);
        return pkt;
    }

    Packet retransmit(std::uint64_t seq, SimTime now) {
        return make_segment(seq, now, /*retransmit=*/true);
    }

    void update_rtt(SimTime sample) {
        if (!srtt_valid_) {
            srtt_ = sample;
            rttvar_ = SimTime::from_ns(sample.ns() / 2);
            srtt_valid_ = true;
        } else {
            const std::int64_t err = std::llabs(srtt_.ns() - sample.ns());
            rttvar_ = SimTime::from_ns((3 * rttvar_.ns() + err) / 4);
            srtt_ = SimTime::from_ns((7 * srtt_.ns() + sample.ns()) / 8);
        }
        rto_ = std::clamp(srtt_ + rttvar_ * 4, min_rto_, max_rto_);
    }

    void arm_timer(SimTime now) {
        ++timer_epoch_;
        timer_deadline_ = now + rto_;
        rearm_pending_ = false;
    }

    void disarm_timer() {
        ++timer_epoch_;
        timer_deadline_.reset();
        rearm_pending_ = false;
    }

    std::uint32_t flow_id_;
    TcpConfig cfg_;

    double cwnd_;
    double ssthresh_;
    TcpPhase phase_ = TcpPhase::kSlowStart;
    std::uint64_t next_seq_ = 0;
    std::uint64_t highest_acked_ = 0;
    std::uint64_t recover_seq_ = 0;
    std::uint64_t segments_transmitted_through_ = 0;  // 1 + highest seq ever sent
    int dup_ack_count_ = 0;

    std::map<std::uint64_t, SegmentMeta> unacked_;

    bool srtt_valid_ = false;
    SimTime srtt_{};
    SimTime rttvar_{};
    SimTime min_rto_;
    SimTime max_rto_;
    SimTime rto_;

    std::uint64_t timer_epoch_ = 0;
    std::optional<SimTime> timer_deadline_;
    bool rearm_pending_ = false;
};

/// Receiver side: cumulative ACK per data packet, duplicate ACKs on gaps,
/// out-of-order segments buffered until the hole fills.
class TcpSink {
public:
    TcpSink(std::uint32_t flow_id, const TcpConfig& cfg) : flow_id_(flow_id), cfg_(cfg) {}

    Packet on_data(const Packet& pkt, SimTime now) {
        if (pkt.seq == expected_) {
            ++expected_;
            while (out_of_order_.erase(expected_) > 0) ++expected_;
        } else if (pkt.seq > expected_) {
            out_of_order_.insert(pkt.seq);
        }
        Packet ack;
        ack.cls = TrafficClass::kTcpAck;
        ack.size_bytes = cfg_.ack_pkt_bytes;
        ack.flow_id = flow_id_;
        ack.seq = expected_;  // cumulative: next expected segment
        ack.created_at = now;
        return ack;
    }

    std::uint64_t cumulative_ack() const { return expected_; }

private:
    std::uint32_t flow_id_;
    TcpConfig cfg_;
    std::uint64_t expected_ = 0;
    std::set<std::uint64_t> out_of_order_;
};

}  // namespace aqmlab
