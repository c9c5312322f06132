#pragma once

#include "detloop/clocks.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <utility>

namespace detloop {

// What a queue slot delivers: the id of the frame (or message) it belongs to.
// The runtime resolves the id to callbacks and payloads.
struct QueuedEvent {
    std::uint64_t frame = 0;
};

// Classification of the queue front against the two clocks.
struct FetchDecision {
    enum class Case {
        DeliverFastForward,       // Case 1: entry is ahead of the main clock
        DeliverInPlace,           // Case 2: entry is at or behind the main clock
        WaitPlaceholder,          // Case 3: front slot still waiting for its result
        StallUntilPhysicalAhead,  // Case 4: holder first and main has caught physical
        Empty,
    };
    Case kind = Case::Empty;
    QueuedEvent event{};              // Cases 1-2
    VirtualTime priority = 0;         // Cases 1-3: the front entry's slot
    std::uint64_t placeholder = 0;    // Case 3
};

// Priority queue of the main reference frame, ordered by (priority, insertion
// seq). Entries are real events or placeholders (pending / filled / canceled).
// The physical-clock holder is not stored: its priority IS the physical clock,
// so next() treats it as an implicit entry at `physical_now`, losing ties to
// real entries at the same priority.
class EventQueue {
public:
    // Inserts a deliverable event at `time`. FIFO among equal priorities.
    std::uint64_t push_event(VirtualTime time, QueuedEvent event);

    // Reserves a pending slot at `expected`; returns the placeholder id.
    std::uint64_t push_placeholder(VirtualTime expected);

    // Fills a pending placeholder with its event; the slot keeps its priority.
    // Errors: UnknownPlaceholder, AlreadyResolved (filled or canceled).
    void resolve_placeholder(std::uint64_t id, QueuedEvent event);

    // Cancels a pending placeholder; a canceled slot is skipped by next().
    // Errors: UnknownPlaceholder, AlreadyResolved (filled or canceled).
    void cancel_placeholder(std::uint64_t id);

    // Classifies the front of the queue. Prunes canceled slots it walks over.
    // Pure in the clocks: identical clock arguments give identical decisions.
    FetchDecision next(VirtualTime main_now, VirtualTime physical_now);

    // Removes the entry next() classified (Cases 1-2 only).
    void pop_front();

    // Pending or filled placeholder lookup (tests and the runtime use this to
    // audit state); true if the id exists and is not canceled.
    bool placeholder_live(std::uint64_t id) const;

    // True only while the slot is still waiting for its result.
    bool placeholder_pending(std::uint64_t id) const;

    // Priority of the first live slot, if any. Prunes canceled fronts.
    std::optional<VirtualTime> front_priority();

    std::size_t size() const { return live_; }
    bool empty() const { return live_ == 0; }

private:
    enum class State : std::uint8_t { Event, Pending, Filled, Canceled };

    struct Entry {
        State state;
        QueuedEvent event{};
    };

    using Key = std::pair<VirtualTime, std::uint64_t>;  // (priority, seq)

    void prune_front();

    std::map<Key, Entry> entries_;
    std::map<std::uint64_t, Key> by_id_;  // placeholder id -> key
    std::uint64_t next_seq_ = 1;
    std::size_t live_ = 0;
};

}  // namespace detloop
