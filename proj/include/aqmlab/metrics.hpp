#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aqmlab/errors.hpp"
#include "aqmlab/packet.hpp"
#include "aqmlab/queue_disc.hpp"
#include "aqmlab/sim_time.hpp"

namespace aqmlab {

enum class DropKind : std::uint8_t { kProbabilistic, kOverflow, kVictim };

struct ClassCounters {
    std::int64_t sent = 0;
    std::int64_t received = 0;
    std::int64_t dropped_probabilistic = 0;
    std::int64_t dropped_overflow = 0;
    std::int64_t dropped_victim = 0;
    std::int64_t in_flight_at_end = 0;  // filled by finalize()

    std::int64_t dropped_total() const {
        return dropped_probabilistic + dropped_overflow + dropped_victim;
    }
};

struct RunMeta {
    std::string scheme;
    int scenario = 0;       // 0 = standalone run, 1/2 = sweep scenario
    std::int64_t varied_flows = 0;
    std::uint64_t seed = 0;
    double duration_s = 0.0;
};

/// Per-run counters plus the total-link-delay accumulator: the sum over
/// packets delivered across the bottleneck of (far-gateway arrival time -
/// bottleneck enqueue time), kept in integer nanoseconds and converted to
/// seconds once, at output.
class MetricsRecord {
public:
    MetricsRecord() = default;
    explicit MetricsRecord(RunMeta meta, SimTime count_from = SimTime{})
        : meta_(std::move(meta)), count_from_(count_from) {}

    void note_sent(const Packet& pkt) {
        if (counted(pkt)) ++cls(pkt).sent;
    }

    void note_received(const Packet& pkt) {
        if (counted(pkt)) ++cls(pkt).received;
    }

    void note_drop(const Packet& pkt, DropKind kind) {
        if (!counted(pkt)) return;
        switch (kind) {
            case DropKind::kProbabilistic: ++cls(pkt).dropped_probabilistic; break;
            case DropKind::kOverflow: ++cls(pkt).dropped_overflow; break;
            case DropKind::kVictim: ++cls(pkt).dropped_victim; break;
        }
    }

    void record_bottleneck_enqueue(const Packet& pkt, SimTime) {
        if (counted(pkt)) ++bottleneck_enqueued_;
    }

    void record_bottleneck_delivery(const Packet& pkt, SimTime now) {
        if (!pkt.enqueued_at) {
            throw AccountingError("bottleneck delivery for packet " + std::to_string(pkt.id) +
                                  " with no recorded enqueue");
        }
        if (!counted(pkt)) return;
        total_link_delay_ns_ += (now - *pkt.enqueued_at).ns();
        ++delivered_across_bottleneck_;
    }

    /// Conservation check and derived fields. `in_flight` holds the per-class
    /// census of packets still resident in queues, links, or pending events.
    void finalize(const std::array<std::int64_t, kTrafficClassCount>& in_flight) {
        std::ostringstream ledger;
        bool ok = true;
        for (std::size_t i = 0; i < kTrafficClassCount; ++i) {
            ClassCounters& c = per_class_[i];
            c.in_flight_at_end = in_flight[i];
            const std::int64_t accounted = c.received + c.dropped_total() + c.in_flight_at_end;
            if (accounted != c.sent) ok = false;
            ledger << "  " << to_string(static_cast<TrafficClass>(i)) << ": sent " << c.sent
                   << " = received " << c.received << " + dropped " << c.dropped_total()
                   << " + in-flight " << c.in_flight_at_end << " (off by "
                   << (c.sent - accounted) << ")\n";
        }
        if (!ok) {
            throw AccountingError("packet conservation violated:\n" + ledger.str());
        }
        finalized_ = true;
    }

    bool finalized() const { return finalized_; }
    const RunMeta& meta() const { return meta_; }
    RunMeta& meta() { return meta_; }

    const ClassCounters& counters(TrafficClass c) const { return per_class_[class_index(c)]; }
    std::int64_t total_link_delay_ns() const { return total_link_delay_ns_; }
    double total_link_delay_s() const { return static_cast<double>(total_link_delay_ns_) * 1e-9; }
    std::int64_t delivered_across_bottleneck() const { return delivered_across_bottleneck_; }
    std::int64_t bottleneck_enqueued() const { return bottleneck_enqueued_; }

    double mean_link_delay_s() const {
        if (delivered_across_bottleneck_ == 0) return 0.0;
        return total_link_delay_s() / static_cast<double>(delivered_across_bottleneck_);
    }

private:
    bool counted(const Packet& pkt) const { return pkt.created_at >= count_from_; }
    ClassCounters& cls(const Packet& pkt) { return per_class_[class_index(pkt.cls)]; }

    RunMeta meta_;
    SimTime count_from_{};
    std::array<ClassCounters, kTrafficClassCount> per_class_{};
    std::int64_t total_link_delay_ns_ = 0;
    std::int64_t delivered_across_bottleneck_ = 0;
    std::int64_t bottleneck_enqueued_ = 0;
    bool finalized_ = false;
};

inline constexpr const char* kCsvHeader =
    "scheme,scenario,varied_flows,seed,duration_s,ftp_sent,ftp_received,voip_sent,"
    "voip_received,ftp_dropped,voip_dropped,total_link_delay_s,mean_link_delay_s";

/// Shortest round-trip decimal form; bit-identical output for equal doubles.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline void write_csv(std::span<const MetricsRecord> records, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const MetricsRecord& r : records) {
        const ClassCounters& ftp = r.counters(TrafficClass::kFtpData);
        const ClassCounters& voip = r.counters(TrafficClass::kVoip);
        out << r.meta().scheme << ',' << r.meta().scenario << ',' << r.meta().varied_flows << ','
            << r.meta().seed << ',' << format_double(r.meta().duration_s) << ',' << ftp.sent << ','
            << ftp.received << ',' << voip.sent << ',' << voip.received << ','
            << ftp.dropped_total() << ',' << voip.dropped_total() << ','
            << format_double(r.total_link_delay_s()) << ','
            << format_double(r.mean_link_delay_s()) << '\n';
    }
}

inline std::string to_csv_string(std::span<const MetricsRecord> records) {
    std::ostringstream os;
    write_csv(records, os);
    return os.str();
}

inline void write_csv_file(std::span<const MetricsRecord> records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(records, out);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace aqmlab
