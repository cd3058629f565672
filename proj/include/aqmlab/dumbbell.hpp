#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aqmlab/config.hpp"
#include "aqmlab/errors.hpp"
#include "aqmlab/event_queue.hpp"
#include "aqmlab/metrics.hpp"
#include "aqmlab/msqm.hpp"
#include "aqmlab/pi.hpp"
#include "aqmlab/red.hpp"
#include "aqmlab/rio.hpp"
#include "aqmlab/rng.hpp"
#include "aqmlab/tcp.hpp"
#include "aqmlab/voip.hpp"

namespace aqmlab {

/// One simplex store-and-forward pipe: a queue discipline feeding a
/// serializer, then fixed propagation to the destination node. At most one
/// packet serializes at a time; the link is work-conserving.
struct Link {
    double bandwidth_bps = 0.0;
    SimTime prop_delay{};
    std::unique_ptr<QueueDisc> qdisc;
    std::uint32_t dst_node = 0;
    bool busy = false;
};

/// Deterministic discrete-event run over the dumbbell topology: n_ftp TCP
/// source/sink pairs and n_voip talkspurt source/sink pairs on per-flow
/// access links, with the scheme under test fronting the forward gateway-to-
/// gateway bottleneck. All sources start at t = 0. A run is a pure function
/// of (config, seed).
class Simulation {
public:
    explicit Simulation(const RunConfig& cfg) : Simulation(cfg, default_meta(cfg)) {}

    Simulation(const RunConfig& cfg, RunMeta meta)
        : cfg_(cfg), metrics_(std::move(meta), SimTime::from_seconds(cfg.warmup_s)) {
        cfg_.validate();  // configuration errors surface before any event runs
        build_topology();
        start_flows();
        schedule(Event{.at = end_time(), .kind = EventKind::kSimEnd});
    }

    static RunMeta default_meta(const RunConfig& cfg) {
        RunMeta meta;
        meta.scheme = to_string(cfg.scheme);
        meta.scenario = 0;
        meta.varied_flows = cfg.n_ftp + cfg.n_voip;
        meta.seed = cfg.seed;
        meta.duration_s = cfg.duration_s;
        return meta;
    }

    SimTime end_time() const { return SimTime::from_seconds(cfg_.duration_s); }
    SimTime now() const { return clock_; }
    const RunConfig& config() const { return cfg_; }
    const MetricsRecord& metrics() const { return metrics_; }

    void run() { run_until(end_time()); }

    /// Processes events in (time, insertion) order until the queue drains or
    /// the next event lies beyond t_end. The clock never moves backward.
    void run_until(SimTime t_end) {
        while (auto next = events_.next_time()) {
            if (*next > t_end) break;
            Event e = *events_.pop();
            clock_ = e.at;
            dispatch(e);
        }
        if (t_end > clock_) clock_ = t_end;
    }

    /// Conservation check plus derived fields; consumes the record.
    MetricsRecord take_metrics() {
        metrics_.finalize(in_flight_census());
        return std::move(metrics_);
    }

    /// Per-class census of packets still resident in queues, serializers, or
    /// in-flight arrival events.
    std::array<std::int64_t, kTrafficClassCount> in_flight_census() const {
        std::array<std::int64_t, kTrafficClassCount> census{};
        const SimTime cutoff = SimTime::from_seconds(cfg_.warmup_s);
        auto tally = [&](const Packet& p) {
            if (p.created_at >= cutoff) ++census[class_index(p.cls)];
        };
        for (const Link& link : links_) {
            for (const Packet& p : link.qdisc->contents()) tally(p);
        }
        for (const Event& e : events_.pending()) {
            if (e.pkt) tally(*e.pkt);
        }
        return census;
    }

    const Link& bottleneck() const { return links_[bottleneck_link_]; }

private:
    struct FtpFlow {
        TcpSender sender;
        TcpSink sink;
        std::uint32_t src_access_link = 0;   // source -> G1
        std::uint32_t g1_to_src_link = 0;    // G1 -> source (ACK delivery)
        std::uint32_t g2_to_sink_link = 0;   // G2 -> sink
        std::uint32_t sink_to_g2_link = 0;   // sink -> G2 (ACK return)
        std::uint64_t scheduled_timer_epoch = 0;
    };

    struct VoipFlow {
        VoipSource source;
        std::uint32_t src_access_link = 0;  // source -> G1
        std::uint32_t g2_to_sink_link = 0;  // G2 -> sink
    };

    static constexpr std::uint32_t kG1 = 0;
    static constexpr std::uint32_t kG2 = 1;
    static constexpr std::int64_t kPlainFifoCapBytes = 1'000'000'000'000;  // effectively unbounded

    std::uint32_t node_ftp_src(std::int64_t i) const { return static_cast<std::uint32_t>(2 + i); }
    std::uint32_t node_ftp_sink(std::int64_t i) const {
        return static_cast<std::uint32_t>(2 + cfg_.n_ftp + i);
    }
    std::uint32_t node_voip_src(std::int64_t i) const {
        return static_cast<std::uint32_t>(2 + 2 * cfg_.n_ftp + i);
    }
    std::uint32_t node_voip_sink(std::int64_t i) const {
        return static_cast<std::uint32_t>(2 + 2 * cfg_.n_ftp + cfg_.n_voip + i);
    }

    std::uint32_t add_link(double bw_bps, SimTime delay, std::unique_ptr<QueueDisc> qdisc,
                           std::uint32_t dst) {
        links_.push_back(Link{bw_bps, delay, std::move(qdisc), dst, false});
        return static_cast<std::uint32_t>(links_.size() - 1);
    }

    std::unique_ptr<QueueDisc> make_bottleneck_qdisc() {
        RngStream rng(cfg_.seed, stream_ids::kBottleneckQueue);
        switch (cfg_.scheme) {
            case Scheme::kMsqm:
                return std::make_unique<MsqmQueue>(cfg_.msqm, cfg_.red, cfg_.bottleneck_bw_bps,
                                                   std::move(rng));
            case Scheme::kRed:
                return std::make_unique<RedQueue>(cfg_.red, cfg_.bottleneck_bw_bps,
                                                  std::move(rng));
            case Scheme::kRio:
                return std::make_unique<RioQueue>(cfg_.rio, cfg_.bottleneck_bw_bps,
                                                  std::move(rng));
            case Scheme::kPi:
                return std::make_unique<PiQueue>(cfg_.pi, std::move(rng));
        }
        throw ConfigError("unknown scheme");
    }

    void build_topology() {
        bottleneck_link_ = add_link(cfg_.bottleneck_bw_bps, cfg_.bottleneck_delay,
                                    make_bottleneck_qdisc(), kG2);
        if (cfg_.scheme == Scheme::kPi) {
            pi_queue_ = static_cast<PiQueue*>(links_[bottleneck_link_].qdisc.get());
        }
        reverse_link_ = add_link(cfg_.bottleneck_bw_bps, cfg_.bottleneck_delay,
                                 std::make_unique<FifoQueue>(kPlainFifoCapBytes), kG1);

        ftp_flows_.reserve(static_cast<std::size_t>(cfg_.n_ftp));
        for (std::int64_t i = 0; i < cfg_.n_ftp; ++i) {
            FtpFlow flow{TcpSender(static_cast<std::uint32_t>(i), cfg_.tcp),
                         TcpSink(static_cast<std::uint32_t>(i), cfg_.tcp)};
            flow.src_access_link =
                add_link(cfg_.access_bw_bps, cfg_.access_delay,
                         std::make_unique<FifoQueue>(kPlainFifoCapBytes), kG1);
            flow.g1_to_src_link =
                add_link(cfg_.access_bw_bps, cfg_.access_delay,
                         std::make_unique<FifoQueue>(kPlainFifoCapBytes), node_ftp_src(i));
            flow.g2_to_sink_link =
                add_link(cfg_.access_bw_bps, cfg_.access_delay,
                         std::make_unique<FifoQueue>(kPlainFifoCapBytes), node_ftp_sink(i));
            flow.sink_to_g2_link =
                add_link(cfg_.access_bw_bps, cfg_.access_delay,
                         std::make_unique<FifoQueue>(kPlainFifoCapBytes), kG2);
            ftp_flows_.push_back(std::move(flow));
        }

        voip_flows_.reserve(static_cast<std::size_t>(cfg_.n_voip));
        for (std::int64_t i = 0; i < cfg_.n_voip; ++i) {
            const auto flow_id = static_cast<std::uint32_t>(cfg_.n_ftp + i);
            VoipFlow flow{VoipSource(flow_id, cfg_.voip,
                                     RngStream(cfg_.seed, stream_ids::kVoipSourceBase +
                                                              static_cast<std::uint64_t>(i)))};
            flow.src_access_link =
                add_link(cfg_.access_bw_bps, cfg_.access_delay,
                         std::make_unique<FifoQueue>(kPlainFifoCapBytes), kG1);
            flow.g2_to_sink_link =
                add_link(cfg_.access_bw_bps, cfg_.access_delay,
                         std::make_unique<FifoQueue>(kPlainFifoCapBytes), node_voip_sink(i));
            voip_flows_.push_back(std::move(flow));
        }
    }

    void start_flows() {
        for (std::size_t i = 0; i < ftp_flows_.size(); ++i) {
            FtpFlow& flow = ftp_flows_[i];
            for (Packet& seg : flow.sender.start(clock_)) {
                transmit_from_source(flow.src_access_link, std::move(seg));
            }
            sync_rto_timer(static_cast<std::uint32_t>(i));
        }
        for (std::size_t i = 0; i < voip_flows_.size(); ++i) {
            schedule(Event{.at = voip_flows_[i].source.next_due(),
                           .kind = EventKind::kSourceTimer,
                           .entity = static_cast<std::uint32_t>(i)});
        }
        if (pi_queue_ != nullptr) {
            schedule(Event{.at = clock_ + pi_queue_->sample_interval(),
                           .kind = EventKind::kPiSample,
                           .entity = bottleneck_link_});
        }
    }

    void schedule(Event e) { events_.push(std::move(e)); }

    void dispatch(Event& e) {
        switch (e.kind) {
            case EventKind::kSourceTimer: handle_voip_timer(e.entity); break;
            case EventKind::kLinkTxComplete: handle_tx_complete(e.entity, std::move(*e.pkt)); break;
            case EventKind::kPacketArrival: handle_arrival(e.entity, std::move(*e.pkt)); break;
            case EventKind::kRtoTimer: handle_rto_timer(e.entity, e.aux); break;
            case EventKind::kPiSample: handle_pi_sample(); break;
            case EventKind::kSimEnd: break;
        }
    }

    void handle_voip_timer(std::uint32_t idx) {
        VoipFlow& flow = voip_flows_[idx];
        for (Packet& pkt : flow.source.step(clock_)) {
            transmit_from_source(flow.src_access_link, std::move(pkt));
        }
        schedule(Event{.at = flow.source.next_due(),
                       .kind = EventKind::kSourceTimer,
                       .entity = idx});
    }

    void handle_tx_complete(std::uint32_t link_id, Packet pkt) {
        Link& link = links_[link_id];
        schedule(Event{.at = clock_ + link.prop_delay,
                       .kind = EventKind::kPacketArrival,
                       .entity = link.dst_node,
                       .pkt = std::move(pkt)});
        start_transmission(link_id);
    }

    void handle_rto_timer(std::uint32_t flow_idx, std::uint64_t epoch) {
        FtpFlow& flow = ftp_flows_[flow_idx];
        if (epoch != flow.sender.timer_epoch() || !flow.sender.timer_deadline()) {
            return;  // stale timer
        }
        for (Packet& seg : flow.sender.on_timeout(clock_)) {
            transmit_from_source(flow.src_access_link, std::move(seg));
        }
        sync_rto_timer(flow_idx);
    }

    void handle_pi_sample() {
        pi_queue_->sample(clock_);
        schedule(Event{.at = clock_ + pi_queue_->sample_interval(),
                       .kind = EventKind::kPiSample,
                       .entity = bottleneck_link_});
    }

    void handle_arrival(std::uint32_t node, Packet pkt) {
        if (node == kG1) {
            if (pkt.cls == TrafficClass::kTcpAck) {
                offer_to_link(ftp_flows_[pkt.flow_id].g1_to_src_link, std::move(pkt));
            } else {
                offer_to_link(bottleneck_link_, std::move(pkt));
            }
            return;
        }
        if (node == kG2) {
            if (pkt.cls == TrafficClass::kTcpAck) {
                offer_to_link(reverse_link_, std::move(pkt));
            } else {
                // Data reaching G2 has just crossed the bottleneck.
                metrics_.record_bottleneck_delivery(pkt, clock_);
                if (pkt.cls == TrafficClass::kFtpData) {
                    offer_to_link(ftp_flows_[pkt.flow_id].g2_to_sink_link, std::move(pkt));
                } else {
                    const auto voip_idx = static_cast<std::size_t>(pkt.flow_id) -
                                          static_cast<std::size_t>(cfg_.n_ftp);
                    offer_to_link(voip_flows_[voip_idx].g2_to_sink_link, std::move(pkt));
                }
            }
            return;
        }

        const std::int64_t idx = static_cast<std::int64_t>(node) - 2;
        if (idx < cfg_.n_ftp) {
            // FTP source: consumes ACKs only.
            if (pkt.cls != TrafficClass::kTcpAck) {
                throw SimulatorBugError("non-ACK packet " + std::to_string(pkt.id) +
                                        " routed to FTP source node");
            }
            const auto flow_idx = static_cast<std::uint32_t>(idx);
            FtpFlow& flow = ftp_flows_[flow_idx];
            metrics_.note_received(pkt);
            for (Packet& seg : flow.sender.on_ack(pkt.seq, clock_)) {
                transmit_from_source(flow.src_access_link, std::move(seg));
            }
            sync_rto_timer(flow_idx);
            return;
        }
        if (idx < 2 * cfg_.n_ftp) {
            // FTP sink: consume data, return a cumulative ACK.
            if (pkt.cls != TrafficClass::kFtpData) {
                throw SimulatorBugError("unexpected class at FTP sink node");
            }
            FtpFlow& flow = ftp_flows_[static_cast<std::size_t>(idx - cfg_.n_ftp)];
            metrics_.note_received(pkt);
            Packet ack = flow.sink.on_data(pkt, clock_);
            transmit_from_source(flow.sink_to_g2_link, std::move(ack));
            return;
        }
        if (idx < 2 * cfg_.n_ftp + cfg_.n_voip) {
            throw SimulatorBugError("packet routed to a VoIP source node");
        }
        if (idx < 2 * cfg_.n_ftp + 2 * cfg_.n_voip) {
            if (pkt.cls != TrafficClass::kVoip) {
                throw SimulatorBugError("unexpected class at VoIP sink node");
            }
            metrics_.note_received(pkt);
            return;
        }
        throw SimulatorBugError("unroutable packet: unknown node " + std::to_string(node));
    }

    /// Entry point for every freshly generated packet: stamps a unique id,
    /// counts it as sent, and offers it to its first link.
    void transmit_from_source(std::uint32_t link_id, Packet pkt) {
        pkt.id = next_packet_id_++;
        metrics_.note_sent(pkt);
        offer_to_link(link_id, std::move(pkt));
    }

    void offer_to_link(std::uint32_t link_id, Packet pkt) {
        Link& link = links_[link_id];
        const Packet before = pkt;  // admission may consume the packet
        const EnqueueDecision decision = link.qdisc->enqueue(std::move(pkt), clock_);
        switch (decision.outcome) {
            case EnqueueOutcome::kEnqueued:
            case EnqueueOutcome::kEnqueuedWithVictim:
                if (link_id == bottleneck_link_) {
                    metrics_.record_bottleneck_enqueue(before, clock_);
                }
                if (decision.victim) {
                    metrics_.note_drop(*decision.victim, DropKind::kVictim);
                }
                break;
            case EnqueueOutcome::kDroppedProbabilistic:
                metrics_.note_drop(before, DropKind::kProbabilistic);
                break;
            case EnqueueOutcome::kDroppedOverflow:
                metrics_.note_drop(before, DropKind::kOverflow);
                break;
        }
        if (!link.busy) start_transmission(link_id);
    }

    void start_transmission(std::uint32_t link_id) {
        Link& link = links_[link_id];
        auto pkt = link.qdisc->dequeue(clock_);
        if (!pkt) {
            link.busy = false;
            return;
        }
        link.busy = true;
        const SimTime serialization = transmission_time(pkt->size_bytes, link.bandwidth_bps);
        schedule(Event{.at = clock_ + serialization,
                       .kind = EventKind::kLinkTxComplete,
                       .entity = link_id,
                       .pkt = std::move(*pkt)});
    }

    void sync_rto_timer(std::uint32_t flow_idx) {
        FtpFlow& flow = ftp_flows_[flow_idx];
        const auto deadline = flow.sender.timer_deadline();
        const auto epoch = flow.sender.timer_epoch();
        if (deadline && epoch != flow.scheduled_timer_epoch) {
            flow.scheduled_timer_epoch = epoch;
            schedule(Event{.at = *deadline,
                           .kind = EventKind::kRtoTimer,
                           .entity = flow_idx,
                           .aux = epoch});
        }
    }

    RunConfig cfg_;
    MetricsRecord metrics_;
    EventQueue events_;
    SimTime clock_{};
    std::vector<Link> links_;
    std::vector<FtpFlow> ftp_flows_;
    std::vector<VoipFlow> voip_flows_;
    std::uint32_t bottleneck_link_ = 0;
    std::uint32_t reverse_link_ = 0;
    PiQueue* pi_queue_ = nullptr;
    std::uint64_t next_packet_id_ = 1;
};

}  // namespace aqmlab
