#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <sstream>
#include <vector>

#include "aqmlab/metrics.hpp"
#include "aqmlab/rng.hpp"

using namespace aqmlab;

namespace {

Packet delivered_packet(double enq_s, std::uint64_t id = 0) {
    Packet p;
    p.id = id;
    p.cls = TrafficClass::kFtpData;
    p.size_bytes = 1040;
    p.enqueued_at = SimTime::from_seconds(enq_s);
    return p;
}

Packet counted_packet(TrafficClass cls) {
    Packet p;
    p.cls = cls;
    p.size_bytes = cls == TrafficClass::kFtpData ? 1040 : 160;
    return p;
}

}  // namespace

TEST_CASE("total link delay sums departure minus enqueue over deliveries") {
    MetricsRecord rec;
    rec.record_bottleneck_delivery(delivered_packet(0.0), SimTime::from_seconds(0.2));
    rec.record_bottleneck_delivery(delivered_packet(0.1), SimTime::from_seconds(0.25));
    rec.record_bottleneck_delivery(delivered_packet(0.3), SimTime::from_seconds(0.5));
    REQUIRE(rec.total_link_delay_s() == Catch::Approx(0.55).epsilon(1e-12));
    REQUIRE(rec.delivered_across_bottleneck() == 3);
}

TEST_CASE("no deliveries means zero delay and zero mean") {
    MetricsRecord rec;
    REQUIRE(rec.total_link_delay_s() == 0.0);
    REQUIRE(rec.mean_link_delay_s() == 0.0);
}

TEST_CASE("delivery without a recorded enqueue is a fatal accounting error") {
    MetricsRecord rec;
    Packet p;
    p.cls = TrafficClass::kFtpData;
    REQUIRE_THROWS_AS(rec.record_bottleneck_delivery(p, SimTime::from_seconds(1.0)),
                      AccountingError);
}

TEST_CASE("incremental delay equals the post-hoc sum over the pair log") {
    RngStream rng(13, 0);
    MetricsRecord rec;
    std::int64_t post_hoc_ns = 0;
    for (int i = 0; i < 10'000; ++i) {
        const auto enq_ns = static_cast<std::int64_t>(rng.uniform() * 1e9);
        const auto delay_ns = static_cast<std::int64_t>(rng.uniform() * 1e8);
        Packet p;
        p.cls = TrafficClass::kFtpData;
        p.enqueued_at = SimTime::from_ns(enq_ns);
        rec.record_bottleneck_delivery(p, SimTime::from_ns(enq_ns + delay_ns));
        post_hoc_ns += delay_ns;
    }
    REQUIRE(rec.total_link_delay_ns() == post_hoc_ns);  // exact in integer ns
    REQUIRE(rec.total_link_delay_s() ==
            Catch::Approx(static_cast<double>(post_hoc_ns) * 1e-9).epsilon(1e-12));
}

TEST_CASE("finalize accepts a closed ledger") {
    MetricsRecord rec;
    for (int i = 0; i < 100; ++i) rec.note_sent(counted_packet(TrafficClass::kFtpData));
    for (int i = 0; i < 90; ++i) rec.note_received(counted_packet(TrafficClass::kFtpData));
    for (int i = 0; i < 10; ++i) {
        rec.note_drop(counted_packet(TrafficClass::kFtpData), DropKind::kProbabilistic);
    }
    std::array<std::int64_t, kTrafficClassCount> in_flight{};
    rec.finalize(in_flight);
    REQUIRE(rec.finalized());
    REQUIRE(rec.counters(TrafficClass::kFtpData).in_flight_at_end == 0);
}

TEST_CASE("finalize rejects a ledger that is off by five") {
    MetricsRecord rec;
    for (int i = 0; i < 100; ++i) rec.note_sent(counted_packet(TrafficClass::kFtpData));
    for (int i = 0; i < 95; ++i) rec.note_received(counted_packet(TrafficClass::kFtpData));
    for (int i = 0; i < 10; ++i) {
        rec.note_drop(counted_packet(TrafficClass::kFtpData), DropKind::kOverflow);
    }
    std::array<std::int64_t, kTrafficClassCount> in_flight{};
    REQUIRE_THROWS_AS(rec.finalize(in_flight), AccountingError);
}

TEST_CASE("an all-zero run finalizes with zero mean delay") {
    MetricsRecord rec;
    std::array<std::int64_t, kTrafficClassCount> in_flight{};
    rec.finalize(in_flight);
    REQUIRE(rec.mean_link_delay_s() == 0.0);
}

TEST_CASE("drop kinds land in their own counters") {
    MetricsRecord rec;
    rec.note_drop(counted_packet(TrafficClass::kVoip), DropKind::kProbabilistic);
    rec.note_drop(counted_packet(TrafficClass::kVoip), DropKind::kOverflow);
    rec.note_drop(counted_packet(TrafficClass::kVoip), DropKind::kVictim);
    rec.note_drop(counted_packet(TrafficClass::kVoip), DropKind::kVictim);
    const auto& c = rec.counters(TrafficClass::kVoip);
    REQUIRE(c.dropped_probabilistic == 1);
    REQUIRE(c.dropped_overflow == 1);
    REQUIRE(c.dropped_victim == 2);
    REQUIRE(c.dropped_total() == 4);
}

TEST_CASE("a warmup cutoff excludes packets created before it") {
    MetricsRecord rec(RunMeta{}, SimTime::from_seconds(1.0));
    Packet early = counted_packet(TrafficClass::kVoip);
    early.created_at = SimTime::from_seconds(0.5);
    Packet late = counted_packet(TrafficClass::kVoip);
    late.created_at = SimTime::from_seconds(1.5);

    rec.note_sent(early);
    rec.note_sent(late);
    REQUIRE(rec.counters(TrafficClass::kVoip).sent == 1);
}

TEST_CASE("CSV output is schema-stable and deterministic") {
    SECTION("no records produce only the header") {
        std::vector<MetricsRecord> none;
        REQUIRE(to_csv_string(none) == std::string(kCsvHeader) + "\n");
    }
    SECTION("one record produces exactly two newline-terminated lines") {
        RunMeta meta;
        meta.scheme = "red";
        meta.scenario = 1;
        meta.varied_flows = 25;
        meta.seed = 7;
        meta.duration_s = 60.0;
        MetricsRecord rec(meta);
        std::vector<MetricsRecord> rs{rec};
        const std::string text = to_csv_string(rs);
        REQUIRE(std::count(text.begin(), text.end(), '\n') == 2);
        REQUIRE(text.back() == '\n');
        REQUIRE(text.find("red,1,25,7,60,0,0,0,0,0,0,0,0") != std::string::npos);
    }
    SECTION("writing the same records twice is byte-identical") {
        MetricsRecord rec;
        rec.record_bottleneck_delivery(delivered_packet(0.0), SimTime::from_seconds(0.123456789));
        std::vector<MetricsRecord> rs{rec};
        REQUIRE(to_csv_string(rs) == to_csv_string(rs));
    }
}
