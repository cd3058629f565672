#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "aqmlab/sim_time.hpp"

namespace aqmlab {

enum class TrafficClass : std::uint8_t { kVoip = 0, kFtpData = 1, kTcpAck = 2 };

inline constexpr std::size_t kTrafficClassCount = 3;

constexpr std::size_t class_index(TrafficClass c) { return static_cast<std::size_t>(c); }

inline std::string to_string(TrafficClass c) {
    switch (c) {
        case TrafficClass::kVoip: return "voip";
        case TrafficClass::kFtpData: return "ftp_data";
        case TrafficClass::kTcpAck: return "tcp_ack";
    }
    return "unknown";
}

/// Default on-wire sizes: 40-byte header floor, VoIP 160 B (payload + header),
/// FTP 1000 B payload + 40 B header, bare ACK 40 B.
inline constexpr std::int64_t kMinPacketBytes = 40;
inline constexpr std::int64_t kVoipPacketBytes = 160;
inline constexpr std::int64_t kFtpPacketBytes = 1040;
inline constexpr std::int64_t kAckPacketBytes = 40;

/// A simulated datagram. No payload is modeled; only size accounting.
struct Packet {
    std::uint64_t id = 0;              // unique within one run
    TrafficClass cls = TrafficClass::kVoip;
    std::int64_t size_bytes = kMinPacketBytes;
    std::uint32_t flow_id = 0;
    std::uint64_t seq = 0;             // per-flow segment number / emission index / ack value
    SimTime created_at{};
    std::optional<SimTime> enqueued_at;        // stamped each time the packet enters a queue
    std::optional<double> stored_drop_prob;    // set while resident in a size-threshold queue
};

}  // namespace aqmlab
