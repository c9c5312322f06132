#pragma once

#include <cstdint>

namespace detloop {

// One tick is one abstract nanosecond-like unit; every clock in the system
// shares this resolution so main/physical comparisons are integer-exact.
using VirtualTime = std::uint64_t;

// Checked arithmetic: overflow is a hard error (ClockOverflowError), never a wrap.
VirtualTime vt_add(VirtualTime a, VirtualTime b);
VirtualTime vt_mul(VirtualTime a, VirtualTime b);
VirtualTime vt_sub(VirtualTime a, VirtualTime b);  // requires a >= b

struct ClockMode {
    enum class Kind { Deterministic, Legacy };
    Kind kind = Kind::Deterministic;
    // Granularity of the coarse clock scripts see in legacy mode.
    VirtualTime grain = 1;
};

// The main reference frame's clock: it advances only when an opcode executes.
// read_now() == t_start + count * unit holds at ALL times; fast_forward shifts
// t_start so the identity survives queue-driven jumps.
class DeterministicClock {
public:
    DeterministicClock(VirtualTime t_start, VirtualTime unit);

    // One executed opcode.
    void tick();

    // Jump to `target` without executing anything (queue Case 1). The opcode
    // counter is untouched; t_start absorbs the difference.
    // Throws TargetInPastError if target < read_now().
    void fast_forward(VirtualTime target);

    VirtualTime read_now() const { return vt_add(t_start_, vt_mul(count_, unit_)); }
    VirtualTime t_start() const { return t_start_; }
    VirtualTime unit() const { return unit_; }
    std::uint64_t count() const { return count_; }

private:
    VirtualTime t_start_;
    VirtualTime unit_;
    std::uint64_t count_ = 0;
};

// Simulated wall clock. There is no free-running source behind it; the runtime
// advances it explicitly at charge points (opcode costs, service completions,
// stalls), which is what makes whole runs replayable.
class PhysicalClock {
public:
    explicit PhysicalClock(VirtualTime start = 0) : now_(start) {}

    void advance(VirtualTime delta) { now_ = vt_add(now_, delta); }
    void advance_to(VirtualTime target) {
        if (target > now_) now_ = target;
    }
    VirtualTime now() const { return now_; }

private:
    VirtualTime now_;
};

}  // namespace detloop
