#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "aqmlab/config.hpp"
#include "aqmlab/sweep.hpp"

using namespace aqmlab;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("an empty document fails for the missing scheme") {
    const std::string err = error_of("{}");
    REQUIRE(err.find("scheme") != std::string::npos);
}

TEST_CASE("a bare scheme yields the documented defaults") {
    ParsedConfig parsed = parse_config(R"({"scheme": "msqm"})");
    const RunConfig& cfg = parsed.cfg;

    REQUIRE(cfg.scheme == Scheme::kMsqm);
    REQUIRE(cfg.msqm.alpha == 0.1);
    REQUIRE(cfg.msqm.ecn_mode == EcnMode::kAlways);
    REQUIRE(cfg.red.min_th_bytes == 15'000);
    REQUIRE(cfg.red.resolved_max_th() == 45'000);   // 3x rule
    REQUIRE(cfg.red.resolved_cap() == 120'000);     // 8x rule
    REQUIRE(cfg.red.gentle);
    REQUIRE(cfg.red.byte_mode);
    REQUIRE(cfg.red.q_weight == 0.002);
    REQUIRE(cfg.red.max_p == 0.1);
    REQUIRE(cfg.access_bw_bps == 10e6);
    REQUIRE(cfg.bottleneck_bw_bps == 50e6);
    REQUIRE(cfg.access_delay == SimTime::from_ms(1));
    REQUIRE(cfg.bottleneck_delay == SimTime::from_ms(10));
    REQUIRE(cfg.duration_s == 60.0);
    REQUIRE(cfg.voip.rate_bps == 78'000.0);
    REQUIRE(cfg.voip.pkt_size_bytes == 160);
    REQUIRE(cfg.voip.shape == 1.5);
    REQUIRE(cfg.voip.on_mean_s == 1.0);
    REQUIRE(cfg.voip.off_mean_s == 1.35);
    REQUIRE(cfg.tcp.data_pkt_bytes == 1040);
    REQUIRE(cfg.pi.a == Catch::Approx(1.822e-5));
    REQUIRE(cfg.pi.b == Catch::Approx(1.816e-5));
    REQUIRE(cfg.pi.q_ref_pkts == 50);
    REQUIRE(cfg.pi.sample_hz == 170.0);

    REQUIRE_FALSE(parsed.defaults_applied.empty());  // every omitted key is reported
}

TEST_CASE("validation errors name the offending key") {
    REQUIRE(error_of(R"({"scheme": "red", "topology": {"bottleneck_bw_bps": -1}})")
                .find("bottleneck_bw_bps") != std::string::npos);
    REQUIRE(error_of(R"({"scheme": "red", "duration_s": 0})").find("duration_s") !=
            std::string::npos);
    REQUIRE(error_of(R"({"scheme": "red", "red": {"q_weight": 2.0}})").find("red.q_weight") !=
            std::string::npos);
}

TEST_CASE("unknown keys are fatal at every level") {
    REQUIRE(error_of(R"({"scheme": "red", "bogus": 1})").find("bogus") != std::string::npos);
    REQUIRE(error_of(R"({"scheme": "red", "red": {"spice": 1}})").find("red.spice") !=
            std::string::npos);
    REQUIRE(error_of(R"({"scheme": "red", "topology": {"n_foo": 3}})").find("n_foo") !=
            std::string::npos);
}

TEST_CASE("malformed JSON is reported as a syntax error") {
    REQUIRE(error_of("{not json").find("syntax") != std::string::npos);
}

TEST_CASE("enumerated fields reject unknown values") {
    REQUIRE(error_of(R"({"scheme": "codel"})").find("msqm|red|rio|pi") != std::string::npos);
    REQUIRE(error_of(R"({"scheme": "msqm", "msqm": {"ecn_mode": "sometimes"}})")
                .find("ecn_mode") != std::string::npos);
    REQUIRE(error_of(R"({"scheme": "rio", "rio": {"voip_profile": "middle"}})")
                .find("voip_profile") != std::string::npos);
}

TEST_CASE("a fully specified document parses into the expected values") {
    ParsedConfig parsed = parse_config(R"({
        "scheme": "rio",
        "seed": 99,
        "duration_s": 12.5,
        "warmup_s": 2.0,
        "topology": {
            "n_ftp": 4, "n_voip": 6,
            "access_bw_bps": 2e6, "bottleneck_bw_bps": 9e6,
            "access_delay_s": 0.002, "bottleneck_delay_s": 0.02
        },
        "red": {
            "q_weight": 0.01, "max_p": 0.2, "min_th_bytes": 5000,
            "max_th_bytes": 20000, "buffer_cap_bytes": 50000,
            "mean_pkt_bytes": 500, "gentle": false, "byte_mode": false
        },
        "msqm": {"alpha": 0.2, "ecn_mode": "overflow_only"},
        "rio": {
            "in": {"min_th_bytes": 9000},
            "out": {"min_th_bytes": 4000},
            "voip_profile": "in", "ftp_profile": "out", "ack_profile": "out"
        },
        "pi": {"a": 2e-5, "b": 1.9e-5, "q_ref_pkts": 40, "sample_hz": 160, "cap_pkts": 80},
        "voip": {"rate_bps": 64000, "pkt_size_bytes": 200, "on_mean_s": 0.8,
                 "off_mean_s": 1.2, "shape": 1.6},
        "tcp": {"data_pkt_bytes": 1500, "ack_pkt_bytes": 40, "min_rto_s": 0.1,
                "max_rto_s": 30, "rwnd_pkts": 500, "initial_cwnd_pkts": 2}
    })");
    const RunConfig& cfg = parsed.cfg;
    REQUIRE(cfg.scheme == Scheme::kRio);
    REQUIRE(cfg.seed == 99);
    REQUIRE(cfg.warmup_s == 2.0);
    REQUIRE(cfg.n_ftp == 4);
    REQUIRE(cfg.n_voip == 6);
    REQUIRE(cfg.access_delay == SimTime::from_ms(2));
    REQUIRE(cfg.red.max_th_bytes == 20'000);
    REQUIRE_FALSE(cfg.red.gentle);
    REQUIRE(cfg.msqm.ecn_mode == EcnMode::kOverflowOnly);
    REQUIRE(cfg.rio.in.min_th_bytes == 9000);
    REQUIRE(cfg.rio.out.min_th_bytes == 4000);
    REQUIRE(cfg.rio.ack_profile == RioProfile::kOut);
    REQUIRE(cfg.pi.cap_pkts == 80);
    REQUIRE(cfg.voip.pkt_size_bytes == 200);
    REQUIRE(cfg.tcp.rwnd_pkts == 500);
}

TEST_CASE("scheme-specific validation still applies to parsed documents") {
    REQUIRE(error_of(R"({"scheme": "rio", "rio": {"out": {"min_th_bytes": 99000}}})")
                .find("rio.out") != std::string::npos);
    REQUIRE(error_of(R"({"scheme": "msqm", "msqm": {"alpha": 1.5}})").find("alpha") !=
            std::string::npos);
    REQUIRE(error_of(R"({"scheme": "pi", "pi": {"cap_pkts": 0}})").find("cap_pkts") !=
            std::string::npos);
}

TEST_CASE("sweep specs validate their grid and scale") {
    SweepSpec spec;
    spec.scenario = 3;
    REQUIRE_THROWS_AS(spec.validate(), ConfigError);
    spec.scenario = 1;
    spec.flows_step = 0;
    REQUIRE_THROWS_AS(spec.validate(), ConfigError);
    spec.flows_step = 25;
    spec.scale = 0.0;
    REQUIRE_THROWS_AS(spec.validate(), ConfigError);
    spec.scale = 1.0;
    spec.validate();
}
