#pragma once

#include "detloop/clocks.hpp"
#include "detloop/env.hpp"
#include "detloop/rf.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace detloop {

inline constexpr std::uint32_t kNoCallback = 0xFFFFFFFFu;

struct SpawnRequest {
    RfKind kind = RfKind::Timer;
    std::int64_t magnitude = 0;               // bytes or work units
    std::optional<VirtualTime> delay;         // timers only
    std::string origin;                       // network kinds only
    std::uint32_t callback = kNoCallback;     // function index in the program
    bool repeating = false;                   // intervals only
    std::optional<VirtualTime> absolute_due;  // scripted user input: physical arrival time
    std::int64_t payload = 0;                 // value handed to the callback (user input)
};

// One auxiliary reference frame. `expected` is the main-clock delivery slot
// and exists only under a deterministic policy; `due_phys` is when the work
// physically finishes under the environment model.
struct AuxFrame {
    std::uint64_t id = 0;
    RfKind kind = RfKind::Timer;
    ClockPolicy policy = ClockPolicy::PhysicalTime;
    std::int64_t magnitude = 0;
    std::string origin;
    std::uint32_t callback = kNoCallback;
    bool repeating = false;
    VirtualTime period = 0;
    std::int64_t payload = 0;
    VirtualTime t_init_main = 0;
    VirtualTime spawn_phys = 0;
    std::optional<VirtualTime> expected;
    VirtualTime due_phys = 0;
    bool completed = false;
    std::uint64_t placeholder = 0;  // queue placeholder id, 0 = none
    std::uint64_t owner = 0;        // main frame whose queue delivers this frame
};

struct CompletionEvent {
    std::uint64_t frame = 0;
    std::uint32_t callback = kNoCallback;
    // PhysicalTime kinds carry their completion stamp; the main clock must
    // equal it at delivery (the synchronization half of the delivery rule).
    std::optional<VirtualTime> phys_stamp;
};

// Owns every auxiliary frame of a run. Main frames use ids 0 and 1, so
// auxiliary ids start at 2.
class FrameRegistry {
public:
    explicit FrameRegistry(std::uint64_t first_id = 2) : next_id_(first_id) {}

    // Creates a frame, computing `expected` from the clock policy and
    // `due_phys` from the environment model.
    AuxFrame& spawn(const SpawnRequest& req, VirtualTime main_now, VirtualTime phys_now,
                    EnvironmentProfile& env, const RfConstants& consts, ClockMode::Kind mode,
                    VirtualTime frame_period);

    // Marks the frame physically finished and returns its completion event.
    // Errors: UnknownFrame, AlreadyCompleted, NotYetComplete (phys_now < due).
    CompletionEvent complete(std::uint64_t id, VirtualTime phys_now);

    // Re-arms a repeating timer after a delivery: shifts expected/due by one
    // period from the PREVIOUS slot (anchored, drift-free) and clears the
    // completed flag.
    void rearm(AuxFrame& frame);

    AuxFrame* find(std::uint64_t id);
    const AuxFrame* find(std::uint64_t id) const;
    void erase(std::uint64_t id);

    // In-flight frame with the earliest (due_phys, id), if any.
    const AuxFrame* next_due() const;
    std::size_t live_count() const;

    // Fresh id for queue entries that have no frame record (cross-frame messages).
    std::uint64_t allocate_id() { return next_id_++; }

private:
    std::map<std::uint64_t, AuxFrame> frames_;
    std::uint64_t next_id_;
};

}  // namespace detloop
