#include "detloop/equeue.hpp"

#include "detloop/errors.hpp"

namespace detloop {

std::uint64_t EventQueue::push_event(VirtualTime time, QueuedEvent event) {
    std::uint64_t seq = next_seq_++;
    entries_.emplace(Key{time, seq}, Entry{State::Event, event});
    ++live_;
    return seq;
}

std::uint64_t EventQueue::push_placeholder(VirtualTime expected) {
    std::uint64_t seq = next_seq_++;
    entries_.emplace(Key{expected, seq}, Entry{State::Pending, QueuedEvent{}});
    by_id_.emplace(seq, Key{expected, seq});
    ++live_;
    return seq;
}

void EventQueue::resolve_placeholder(std::uint64_t id, QueuedEvent event) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw QueueError(QueueFault::UnknownPlaceholder, id);
    Entry& entry = entries_.at(it->second);
    if (entry.state != State::Pending) throw QueueError(QueueFault::AlreadyResolved, id);
    entry.state = State::Filled;
    entry.event = event;
}

void EventQueue::cancel_placeholder(std::uint64_t id) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw QueueError(QueueFault::UnknownPlaceholder, id);
    Entry& entry = entries_.at(it->second);
    if (entry.state != State::Pending) throw QueueError(QueueFault::AlreadyResolved, id);
    entry.state = State::Canceled;
    --live_;
}

void EventQueue::prune_front() {
    while (!entries_.empty()) {
        auto it = entries_.begin();
        if (it->second.state != State::Canceled) return;
        by_id_.erase(it->first.second);
        entries_.erase(it);
    }
}

FetchDecision EventQueue::next(VirtualTime main_now, VirtualTime physical_now) {
    prune_front();

    FetchDecision d;
    const bool have_entry = !entries_.empty();

    // The implicit physical-clock holder sits at `physical_now`, behind any
    // real entry with the same priority.
    bool holder_first = !have_entry || physical_now < entries_.begin()->first.first;
    if (holder_first) {
        if (main_now >= physical_now) {
            d.kind = FetchDecision::Case::StallUntilPhysicalAhead;
            return d;
        }
        if (!have_entry) {
            d.kind = FetchDecision::Case::Empty;
            return d;
        }
        // main is already behind physical: the holder is transparent.
    }

    const auto& [key, entry] = *entries_.begin();
    d.priority = key.first;
    if (entry.state == State::Pending) {
        d.kind = FetchDecision::Case::WaitPlaceholder;
        d.placeholder = key.second;
        return d;
    }
    d.event = entry.event;
    d.kind = key.first > main_now ? FetchDecision::Case::DeliverFastForward
                                  : FetchDecision::Case::DeliverInPlace;
    return d;
}

void EventQueue::pop_front() {
    prune_front();
    if (entries_.empty()) throw std::logic_error("pop_front() on an empty queue");
    auto it = entries_.begin();
    if (it->second.state == State::Pending)
        throw std::logic_error("pop_front() would drop a pending placeholder");
    by_id_.erase(it->first.second);
    entries_.erase(it);
    --live_;
}

bool EventQueue::placeholder_live(std::uint64_t id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return false;
    return entries_.at(it->second).state != State::Canceled;
}

bool EventQueue::placeholder_pending(std::uint64_t id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return false;
    return entries_.at(it->second).state == State::Pending;
}

std::optional<VirtualTime> EventQueue::front_priority() {
    prune_front();
    if (entries_.empty()) return std::nullopt;
    return entries_.begin()->first.first;
}

}  // namespace detloop
