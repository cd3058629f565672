#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqmlab/errors.hpp"
#include "aqmlab/msqm.hpp"
#include "aqmlab/pi.hpp"
#include "aqmlab/red.hpp"
#include "aqmlab/rio.hpp"
#include "aqmlab/sim_time.hpp"
#include "aqmlab/tcp.hpp"
#include "aqmlab/voip.hpp"

namespace aqmlab {

enum class Scheme : std::uint8_t { kMsqm, kRed, kRio, kPi };

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::kMsqm: return "msqm";
        case Scheme::kRed: return "red";
        case Scheme::kRio: return "rio";
        case Scheme::kPi: return "pi";
    }
    return "unknown";
}

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "msqm") return Scheme::kMsqm;
    if (s == "red") return Scheme::kRed;
    if (s == "rio") return Scheme::kRio;
    if (s == "pi") return Scheme::kPi;
    throw ConfigError("scheme must be one of msqm|red|rio|pi, got '" + s + "'");
}

/// Full description of one simulation run. Defaults reproduce the reference
/// experiment: per-flow 10 Mb/s / 1 ms access links into a 50 Mb/s / 10 ms
/// bottleneck, 60 simulated seconds.
struct RunConfig {
    Scheme scheme = Scheme::kMsqm;

    std::int64_t n_ftp = 0;
    std::int64_t n_voip = 0;
    double access_bw_bps = 10e6;
    double bottleneck_bw_bps = 50e6;
    SimTime access_delay = SimTime::from_ms(1);
    SimTime bottleneck_delay = SimTime::from_ms(10);

    double duration_s = 60.0;
    double warmup_s = 0.0;  // metrics ignore packets created before this
    std::uint64_t seed = 1;

    RedConfig red;
    MsqmConfig msqm;
    RioConfig rio;
    PiConfig pi;
    VoipConfig voip;
    TcpConfig tcp;

    void validate() const {
        if (n_ftp < 0) throw ConfigError("topology.n_ftp must be >= 0");
        if (n_voip < 0) throw ConfigError("topology.n_voip must be >= 0");
        if (!(access_bw_bps > 0.0)) throw ConfigError("topology.access_bw_bps must be > 0");
        if (!(bottleneck_bw_bps > 0.0)) throw ConfigError("topology.bottleneck_bw_bps must be > 0");
        if (access_delay.ns() < 0) throw ConfigError("topology.access_delay_s must be >= 0");
        if (bottleneck_delay.ns() < 0) throw ConfigError("topology.bottleneck_delay_s must be >= 0");
        if (!(duration_s > 0.0)) throw ConfigError("duration_s must be > 0");
        if (warmup_s < 0.0 || warmup_s > duration_s)
            throw ConfigError("warmup_s must be in [0, duration_s]");
        red.validate("red");
        msqm.validate();
        rio.validate();
        pi.validate();
        voip.validate();
        tcp.validate();
    }
};

struct ParsedConfig {
    RunConfig cfg;
    std::vector<std::string> defaults_applied;  // one note per defaulted key
};

namespace detail {

using json = nlohmann::json;

/// Strict field reader: tracks consumed keys, rejects unknown ones, and
/// records a note for every default that stands.
class FieldReader {
public:
    FieldReader(const json& obj, std::string path, std::vector<std::string>& notes)
        : obj_(obj), path_(std::move(path)), notes_(notes) {
        if (!obj_.is_object()) throw ConfigError(path_ + " must be a JSON object");
    }

    template <typename T>
    void number(const char* key, T& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ConfigError(at(key) + " must be a number");
            out = v->get<T>();
        } else {
            note(key, std::to_string(out));
        }
    }

    void boolean(const char* key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) throw ConfigError(at(key) + " must be a boolean");
            out = v->get<bool>();
        } else {
            note(key, out ? "true" : "false");
        }
    }

    bool string(const char* key, std::string& out, const std::string& default_repr) {
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ConfigError(at(key) + " must be a string");
            out = v->get<std::string>();
            return true;
        }
        note(key, default_repr);
        return false;
    }

    void seconds(const char* key, SimTime& out) {
        double s = out.seconds();
        number(key, s);
        out = SimTime::from_seconds(s);
    }

    const json* object(const char* key) { return take(key); }

    void note_default_block(const char* key) { note(key, "(all defaults)"); }

    std::string at(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    /// Call after reading all known keys.
    void finish() {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.contains(it.key())) {
                throw ConfigError("unknown key '" + at(it.key().c_str()) + "'");
            }
        }
    }

private:
    const json* take(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void note(const char* key, const std::string& repr) {
        notes_.push_back("default " + at(key) + " = " + repr);
    }

    const json& obj_;
    std::string path_;
    std::vector<std::string>& notes_;
    std::set<std::string> seen_;
};

inline void read_red(const json& obj, const std::string& path, RedConfig& out,
                     std::vector<std::string>& notes) {
    FieldReader r(obj, path, notes);
    r.number("q_weight", out.q_weight);
    r.number("max_p", out.max_p);
    r.number("min_th_bytes", out.min_th_bytes);
    std::int64_t max_th = out.resolved_max_th();
    std::int64_t cap = out.resolved_cap();
    r.number("max_th_bytes", max_th);
    r.number("buffer_cap_bytes", cap);
    out.max_th_bytes = max_th;
    out.buffer_cap_bytes = cap;
    r.number("mean_pkt_bytes", out.mean_pkt_bytes);
    r.boolean("gentle", out.gentle);
    r.boolean("byte_mode", out.byte_mode);
    r.finish();
}

}  // namespace detail

/// Parses and validates a JSON run configuration. The schema is strict:
/// unknown keys are fatal, `scheme` is required, and every omitted key keeps
/// its documented default (each one is reported in defaults_applied).
inline ParsedConfig parse_config(const std::string& text) {
    using detail::FieldReader;
    using detail::json;

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }

    ParsedConfig result;
    RunConfig& cfg = result.cfg;
    auto& notes = result.defaults_applied;

    FieldReader root(doc, "", notes);

    std::string scheme_name;
    if (!root.string("scheme", scheme_name, "(none)")) {
        throw ConfigError("required key 'scheme' is missing (msqm|red|rio|pi)");
    }
    cfg.scheme = scheme_from_string(scheme_name);

    root.number("seed", cfg.seed);
    root.number("duration_s", cfg.duration_s);
    root.number("warmup_s", cfg.warmup_s);

    if (const json* topo = root.object("topology")) {
        FieldReader t(*topo, "topology", notes);
        t.number("n_ftp", cfg.n_ftp);
        t.number("n_voip", cfg.n_voip);
        t.number("access_bw_bps", cfg.access_bw_bps);
        t.number("bottleneck_bw_bps", cfg.bottleneck_bw_bps);
        t.seconds("access_delay_s", cfg.access_delay);
        t.seconds("bottleneck_delay_s", cfg.bottleneck_delay);
        t.finish();
    } else {
        root.note_default_block("topology");
    }

    if (const json* red = root.object("red")) {
        detail::read_red(*red, "red", cfg.red, notes);
    } else {
        root.note_default_block("red");
    }

    if (const json* msqm = root.object("msqm")) {
        FieldReader m(*msqm, "msqm", notes);
        m.number("alpha", cfg.msqm.alpha);
        std::string mode = to_string(cfg.msqm.ecn_mode);
        if (m.string("ecn_mode", mode, to_string(cfg.msqm.ecn_mode))) {
            cfg.msqm.ecn_mode = ecn_mode_from_string(mode);
        }
        m.finish();
    } else {
        root.note_default_block("msqm");
    }

    if (const json* rio = root.object("rio")) {
        FieldReader r(*rio, "rio", notes);
        if (const json* in = r.object("in")) {
            detail::read_red(*in, "rio.in", cfg.rio.in, notes);
        } else {
            r.note_default_block("in");
        }
        if (const json* out = r.object("out")) {
            detail::read_red(*out, "rio.out", cfg.rio.out, notes);
        } else {
            r.note_default_block("out");
        }
        std::string prof;
        if (r.string("voip_profile", prof, to_string(cfg.rio.voip_profile)))
            cfg.rio.voip_profile = rio_profile_from_string(prof, "rio.voip_profile");
        if (r.string("ftp_profile", prof, to_string(cfg.rio.ftp_profile)))
            cfg.rio.ftp_profile = rio_profile_from_string(prof, "rio.ftp_profile");
        if (r.string("ack_profile", prof, to_string(cfg.rio.ack_profile)))
            cfg.rio.ack_profile = rio_profile_from_string(prof, "rio.ack_profile");
        r.finish();
    } else {
        root.note_default_block("rio");
    }

    if (const json* pi = root.object("pi")) {
        FieldReader p(*pi, "pi", notes);
        p.number("a", cfg.pi.a);
        p.number("b", cfg.pi.b);
        p.number("q_ref_pkts", cfg.pi.q_ref_pkts);
        p.number("sample_hz", cfg.pi.sample_hz);
        p.number("cap_pkts", cfg.pi.cap_pkts);
        p.finish();
    } else {
        root.note_default_block("pi");
    }

    if (const json* voip = root.object("voip")) {
        FieldReader v(*voip, "voip", notes);
        v.number("rate_bps", cfg.voip.rate_bps);
        v.number("pkt_size_bytes", cfg.voip.pkt_size_bytes);
        v.number("on_mean_s", cfg.voip.on_mean_s);
        v.number("off_mean_s", cfg.voip.off_mean_s);
        v.number("shape", cfg.voip.shape);
        v.finish();
    } else {
        root.note_default_block("voip");
    }

    if (const json* tcp = root.object("tcp")) {
        FieldReader t(*tcp, "tcp", notes);
        t.number("data_pkt_bytes", cfg.tcp.data_pkt_bytes);
        t.number("ack_pkt_bytes", cfg.tcp.ack_pkt_bytes);
        t.number("min_rto_s", cfg.tcp.min_rto_s);
        t.number("max_rto_s", cfg.tcp.max_rto_s);
        t.number("rwnd_pkts", cfg.tcp.rwnd_pkts);
        t.number("initial_cwnd_pkts", cfg.tcp.initial_cwnd_pkts);
        t.finish();
    } else {
        root.note_default_block("tcp");
    }

    root.finish();
    cfg.validate();
    return result;
}

}  // namespace aqmlab
