#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "aqmlab/errors.hpp"
#include "aqmlab/packet.hpp"
#include "aqmlab/sim_time.hpp"

namespace aqmlab {

enum class EventKind : std::uint8_t {
    kSourceTimer,     // entity = voip source index
    kLinkTxComplete,  // entity = link id, pkt = departing packet
    kPacketArrival,   // entity = node id, pkt = arriving packet
    kRtoTimer,        // entity = ftp flow index, aux = timer epoch
    kPiSample,        // entity = link id
    kSimEnd,
};

struct Event {
    SimTime at{};
    std::uint64_t seq = 0;  // insertion order; total tie-break at equal times
    EventKind kind = EventKind::kSimEnd;
    std::uint32_t entity = 0;
    std::uint64_t aux = 0;
    std::optional<Packet> pkt;
};

/// Min-heap of events ordered by (time, insertion sequence). Pop order is a
/// pure function of the pushed multiset, independent of heap internals.
/// Pushing an event earlier than the last popped time is a simulator bug.
class EventQueue {
public:
    void push(Event e) {
        if (e.at < floor_) {
            throw SimulatorBugError("scheduling event at " + std::to_string(e.at.ns()) +
                                    " ns, in the past of " + std::to_string(floor_.ns()) + " ns");
        }
        e.seq = next_seq_++;
        heap_.push_back(std::move(e));
        std::push_heap(heap_.begin(), heap_.end(), Later{});
    }

    std::optional<Event> pop() {
        if (heap_.empty()) return std::nullopt;
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Event e = std::move(heap_.back());
        heap_.pop_back();
        floor_ = e.at;
        return e;
    }

    std::optional<SimTime> next_time() const {
        if (heap_.empty()) return std::nullopt;
        return heap_.front().at;
    }

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    /// Unordered view over pending events (end-of-run accounting).
    const std::vector<Event>& pending() const { return heap_; }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    std::vector<Event> heap_;
    std::uint64_t next_seq_ = 0;
    SimTime floor_{};
};

}  // namespace aqmlab
