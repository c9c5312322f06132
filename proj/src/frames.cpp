#include "detloop/frames.hpp"

#include "detloop/errors.hpp"

#include <stdexcept>

namespace detloop {

AuxFrame& FrameRegistry::spawn(const SpawnRequest& req, VirtualTime main_now,
                               VirtualTime phys_now, EnvironmentProfile& env,
                               const RfConstants& consts, ClockMode::Kind mode,
                               VirtualTime frame_period) {
    if (req.kind == RfKind::MainJs) throw std::logic_error("cannot spawn a main frame");
    if (req.magnitude < 0)
        throw VmTrapError(Trap::InvalidArgument, "request magnitude must be non-negative");
    if (req.kind == RfKind::Timer) {
        if (!req.delay)
            throw FrameError(FrameFault::PolicyMismatch, "timer spawned without a delay");
    } else {
        if (req.delay)
            throw FrameError(FrameFault::PolicyMismatch,
                             std::string("delay supplied for non-timer kind ") +
                                 rf_kind_name(req.kind));
        if (req.repeating)
            throw FrameError(FrameFault::PolicyMismatch, "only timers can repeat");
    }

    AuxFrame frame;
    frame.id = next_id_++;
    frame.kind = req.kind;
    frame.policy = policy_for(req.kind, mode);
    frame.magnitude = req.magnitude;
    frame.origin = req.origin;
    frame.callback = req.callback;
    frame.repeating = req.repeating;
    frame.payload = req.payload;
    frame.t_init_main = main_now;
    frame.spawn_phys = phys_now;

    switch (req.kind) {
        case RfKind::Timer:
            frame.period = *req.delay;
            frame.due_phys = vt_add(phys_now, *req.delay);
            if (frame.policy != ClockPolicy::PhysicalTime)
                frame.expected = vt_add(main_now, *req.delay);
            break;
        case RfKind::VideoFrame:
            // Next frame boundary strictly after now.
            frame.due_phys = vt_mul(phys_now / frame_period + 1, frame_period);
            break;
        case RfKind::UserInput:
            frame.due_phys = req.absolute_due ? std::max(*req.absolute_due, phys_now) : phys_now;
            break;
        default:
            frame.due_phys = vt_add(phys_now, env.service_time(req.kind, req.magnitude));
            if (frame.policy != ClockPolicy::PhysicalTime)
                frame.expected = vt_add(main_now, consts.constant_for(req.kind));
            break;
    }

    auto [it, inserted] = frames_.emplace(frame.id, std::move(frame));
    (void)inserted;
    return it->second;
}

CompletionEvent FrameRegistry::complete(std::uint64_t id, VirtualTime phys_now) {
    AuxFrame* frame = find(id);
    if (!frame)
        throw FrameError(FrameFault::UnknownFrame, "complete() on unknown frame " + std::to_string(id));
    if (frame->completed)
        throw FrameError(FrameFault::AlreadyCompleted,
                         "frame " + std::to_string(id) + " already completed");
    if (phys_now < frame->due_phys)
        throw FrameError(FrameFault::NotYetComplete,
                         "frame " + std::to_string(id) + " completes at " +
                             std::to_string(frame->due_phys) + ", physical clock is at " +
                             std::to_string(phys_now));
    frame->completed = true;
    CompletionEvent ev;
    ev.frame = id;
    ev.callback = frame->callback;
    if (frame->policy == ClockPolicy::PhysicalTime) ev.phys_stamp = frame->due_phys;
    return ev;
}

void FrameRegistry::rearm(AuxFrame& frame) {
    if (!frame.repeating) throw std::logic_error("rearm() on a one-shot frame");
    if (frame.expected) frame.expected = vt_add(*frame.expected, frame.period);
    frame.due_phys = vt_add(frame.due_phys, frame.period);
    frame.completed = false;
    frame.placeholder = 0;
}

AuxFrame* FrameRegistry::find(std::uint64_t id) {
    auto it = frames_.find(id);
    return it == frames_.end() ? nullptr : &it->second;
}

const AuxFrame* FrameRegistry::find(std::uint64_t id) const {
    auto it = frames_.find(id);
    return it == frames_.end() ? nullptr : &it->second;
}

void FrameRegistry::erase(std::uint64_t id) { frames_.erase(id); }

const AuxFrame* FrameRegistry::next_due() const {
    const AuxFrame* best = nullptr;
    for (const auto& [id, frame] : frames_) {
        (void)id;
        if (frame.completed) continue;
        if (!best || frame.due_phys < best->due_phys) best = &frame;
    }
    return best;
}

std::size_t FrameRegistry::live_count() const {
    std::size_t n = 0;
    for (const auto& [id, frame] : frames_) {
        (void)id;
        if (!frame.completed) ++n;
    }
    return n;
}

}  // namespace detloop
