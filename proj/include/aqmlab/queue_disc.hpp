#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <utility>

#include "aqmlab/packet.hpp"
#include "aqmlab/sim_time.hpp"

namespace aqmlab {

enum class EnqueueOutcome : std::uint8_t {
    kEnqueued,
    kDroppedProbabilistic,
    kDroppedOverflow,
    kEnqueuedWithVictim,  // produced only by the size-threshold scheme
};

struct EnqueueDecision {
    EnqueueOutcome outcome = EnqueueOutcome::kEnqueued;
    std::optional<Packet> victim;  // set iff outcome == kEnqueuedWithVictim

    bool accepted() const {
        return outcome == EnqueueOutcome::kEnqueued ||
               outcome == EnqueueOutcome::kEnqueuedWithVictim;
    }

    static EnqueueDecision enqueued() { return {EnqueueOutcome::kEnqueued, std::nullopt}; }
    static EnqueueDecision dropped_probabilistic() {
        return {EnqueueOutcome::kDroppedProbabilistic, std::nullopt};
    }
    static EnqueueDecision dropped_overflow() {
        return {EnqueueOutcome::kDroppedOverflow, std::nullopt};
    }
    static EnqueueDecision enqueued_with_victim(Packet victim) {
        return {EnqueueOutcome::kEnqueuedWithVictim, std::move(victim)};
    }
};

/// Common queue-discipline surface. All schemes serve in FIFO order; they
/// differ only in the admission decision.
class QueueDisc {
public:
    virtual ~QueueDisc() = default;

    virtual EnqueueDecision enqueue(Packet pkt, SimTime now) = 0;

    /// Removes and returns the head-of-line packet, or nullopt if empty.
    virtual std::optional<Packet> dequeue(SimTime now) = 0;

    virtual std::int64_t byte_length() const = 0;
    virtual std::size_t packet_length() const = 0;

    /// Resident packets in service order; used for end-of-run accounting.
    virtual const std::deque<Packet>& contents() const = 0;
};

/// Plain drop-tail FIFO with a byte cap. Backs every link that is not the
/// queue discipline under test.
class FifoQueue final : public QueueDisc {
public:
    explicit FifoQueue(std::int64_t cap_bytes) : cap_bytes_(cap_bytes) {}

    EnqueueDecision enqueue(Packet pkt, SimTime now) override {
        if (occupancy_bytes_ + pkt.size_bytes > cap_bytes_) {
            return EnqueueDecision::dropped_overflow();
        }
        pkt.enqueued_at = now;
        occupancy_bytes_ += pkt.size_bytes;
        fifo_.push_back(std::move(pkt));
        return EnqueueDecision::enqueued();
    }

    std::optional<Packet> dequeue(SimTime) override {
        if (fifo_.empty()) return std::nullopt;
        Packet pkt = std::move(fifo_.front());
        fifo_.pop_front();
        occupancy_bytes_ -= pkt.size_bytes;
        return pkt;
    }

    std::int64_t byte_length() const override { return occupancy_bytes_; }
    std::size_t packet_length() const override { return fifo_.size(); }
    const std::deque<Packet>& contents() const override { return fifo_; }

private:
    std::int64_t cap_bytes_;
    std::int64_t occupancy_bytes_ = 0;
    std::deque<Packet> fifo_;
};

}  // namespace aqmlab
