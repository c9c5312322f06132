#include "detloop/runtime.hpp"

#include "detloop/compiler.hpp"
#include "detloop/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace detloop {

Runtime::Runtime(RuntimeConfig config)
    : config_(std::move(config)), env_(config_.env), registry_(2) {
    config_.validate();
    env_ = config_.env;  // validated copy; jitter stream owned by this runtime
}

Runtime::~Runtime() = default;

Runtime::MainRf& Runtime::rf_checked(std::uint64_t id) {
    for (auto& rf : mains_)
        if (rf->id == id) return *rf;
    throw std::logic_error("no main frame with id " + std::to_string(id));
}

const Runtime::MainRf& Runtime::rf_checked(std::uint64_t id) const {
    for (const auto& rf : mains_)
        if (rf->id == id) return *rf;
    throw std::logic_error("no main frame with id " + std::to_string(id));
}

VirtualTime Runtime::now_of(const MainRf& rf) const {
    return config_.mode.kind == ClockMode::Kind::Deterministic ? rf.clock.read_now()
                                                               : physical_.now();
}

VirtualTime Runtime::script_now(const MainRf& rf) const {
    if (config_.mode.kind == ClockMode::Kind::Deterministic) return rf.clock.read_now();
    return physical_.now() / config_.mode.grain * config_.mode.grain;
}

VirtualTime Runtime::physical_now() const { return physical_.now(); }

VirtualTime Runtime::main_now(std::uint64_t rf) const { return now_of(rf_checked(rf)); }

std::uint64_t Runtime::opcode_count(std::uint64_t rf) const {
    return rf_checked(rf).clock.count();
}

void Runtime::load(std::string_view source) {
    if (!mains_.empty()) throw std::logic_error("load() called twice");
    auto rf = std::make_unique<MainRf>(0, config_.unit);
    rf->program = std::make_unique<Program>(compile_source(source));
    rf->vm = std::make_unique<Vm>(*rf->program, *this);
    rf->queue.push_event(0, QueuedEvent{rf->id});
    mains_.push_back(std::move(rf));
}

void Runtime::load_second(std::string_view source) {
    if (mains_.size() != 1) throw std::logic_error("load_second() requires exactly one prior load()");
    auto rf = std::make_unique<MainRf>(1, config_.unit);
    rf->program = std::make_unique<Program>(compile_source(source));
    rf->vm = std::make_unique<Vm>(*rf->program, *this);
    rf->queue.push_event(0, QueuedEvent{rf->id});
    mains_.push_back(std::move(rf));
}

void Runtime::inject_input(VirtualTime at_phys, std::int64_t value) {
    if (mains_.empty()) throw std::logic_error("inject_input() before load()");
    SpawnRequest req;
    req.kind = RfKind::UserInput;
    req.absolute_due = at_phys;
    req.payload = value;
    spawn_frame(*mains_.front(), std::move(req));
}

void Runtime::send_cross_frame(const CrossFrameMessage& msg) {
    MainRf& sender = rf_checked(msg.sender);
    (void)sender;
    if (msg.sender == msg.receiver)
        throw std::logic_error("cross-frame message to the sending frame");
    MainRf& receiver = rf_checked(msg.receiver);

    const VirtualTime receiver_now = now_of(receiver);
    // A timestamp from the future queues at its own slot (the receiver's clock
    // will fast-forward to it); anything else delivers at the receiver's
    // current reading, leaving its clock untouched.
    const VirtualTime priority = msg.sent_at > receiver_now ? msg.sent_at : receiver_now;

    const std::uint64_t id = registry_.allocate_id();
    cross_.emplace(id, msg);
    receiver.queue.push_event(priority, QueuedEvent{id});

    nlohmann::ordered_json detail;
    detail["kind"] = "cross";
    detail["due"] = priority;
    trace_.append("spawn", receiver_now, physical_.now(), id, std::move(detail));
}

void Runtime::charge_physical(VirtualTime delta) {
    physical_.advance(delta);
    if (physical_.now() > physical_budget_) throw PhysicalBudgetExceeded(physical_budget_);
}

void Runtime::materialize_due() {
    for (;;) {
        const AuxFrame* next = registry_.next_due();
        if (!next || next->due_phys > physical_.now()) return;
        const std::uint64_t id = next->id;
        registry_.complete(id, physical_.now());
        AuxFrame* frame = registry_.find(id);
        MainRf& owner = rf_checked(frame->owner);
        if (frame->placeholder != 0) {
            owner.queue.resolve_placeholder(frame->placeholder, QueuedEvent{id});
        } else {
            // Physical-policy result: it enters at the holder position, i.e.
            // wherever the physical clock stands when the loop observes it.
            owner.queue.push_event(physical_.now(), QueuedEvent{id});
        }
    }
}

void Runtime::advance_physical_to(VirtualTime target) {
    if (target > physical_budget_) throw PhysicalBudgetExceeded(physical_budget_);
    // Stop at the first completion on the way so the loop re-decides with the
    // new queue contents.
    const AuxFrame* next = registry_.next_due();
    if (next && next->due_phys > physical_.now() && next->due_phys <= target) {
        physical_.advance_to(next->due_phys);
        materialize_due();
        return;
    }
    physical_.advance_to(target);
}

const Trace& Runtime::run(VirtualTime physical_budget) {
    if (mains_.empty()) throw std::logic_error("run() before load()");
    physical_budget_ = physical_budget;
    if (physical_.now() > physical_budget_) throw PhysicalBudgetExceeded(physical_budget_);

    const bool det = config_.mode.kind == ClockMode::Kind::Deterministic;

    for (;;) {
        materialize_due();

        bool acted = false;
        for (auto& up : mains_) {
            MainRf& rf = *up;
            const FetchDecision d = rf.queue.next(now_of(rf), physical_.now());
            if (d.kind == FetchDecision::Case::DeliverFastForward) {
                if (det) rf.clock.fast_forward(d.priority);
                deliver(rf, d);
                acted = true;
            } else if (d.kind == FetchDecision::Case::DeliverInPlace) {
                deliver(rf, d);
                acted = true;
            } else if (d.kind == FetchDecision::Case::WaitPlaceholder) {
                // The pending slot's frame is still in flight; let its work
                // physically finish (the main clock does not move).
                const AuxFrame* frame = registry_.find(placeholder_frame_.at(d.placeholder));
                if (!frame)
                    throw FrameError(FrameFault::UnknownFrame,
                                     "pending placeholder without a frame");
                advance_physical_to(frame->due_phys);
                acted = true;
            }
            if (acted) break;
        }
        if (acted) continue;

        // Nothing deliverable on any main frame.
        const bool queues_empty =
            std::all_of(mains_.begin(), mains_.end(), [](auto& rf) { return rf->queue.empty(); });
        if (queues_empty && registry_.live_count() == 0) break;  // quiescent: halt

        // Physical time has to move: toward the next frame completion, or far
        // enough that a stalled queue unblocks (its holder must fall behind
        // either the main clock or the queue front).
        std::optional<VirtualTime> target;
        auto consider = [&target](VirtualTime t) {
            if (!target || t < *target) target = t;
        };
        if (const AuxFrame* next = registry_.next_due()) consider(next->due_phys);
        for (auto& up : mains_) {
            MainRf& rf = *up;
            const auto front = rf.queue.front_priority();
            if (!front) continue;
            if (det) consider(std::min(vt_add(now_of(rf), 1), *front));
            else consider(*front);
        }
        if (!target) throw std::logic_error("event loop wedged with no physical target");
        advance_physical_to(*target);
    }

    completed_ = true;
    report_.total_physical = physical_.now();
    report_.total_main = now_of(*mains_.front());
    return trace_;
}

void Runtime::deliver(MainRf& rf, const FetchDecision& d) {
    rf.queue.pop_front();
    const int fetch_case = d.kind == FetchDecision::Case::DeliverFastForward ? 1 : 2;
    const std::uint64_t id = d.event.frame;

    report_.deliveries.push_back({now_of(rf), physical_.now()});

    if (id == rf.id) {  // the frame's own top-level task
        trace_deliver(rf, fetch_case, "main_js", d.priority, std::nullopt, std::nullopt);
        if (rf.program->has_top_level()) run_callback(rf, kNoCallback, {});
        return;
    }

    if (auto cit = cross_.find(id); cit != cross_.end()) {
        const std::int64_t payload = cit->second.payload;
        cross_.erase(cit);
        trace_deliver(rf, fetch_case, "cross", d.priority, std::nullopt, payload);
        const std::uint32_t fn = named_handler(rf, "on_message");
        if (fn != kNoCallback) run_callback(rf, fn, {Value::integer(payload)});
        return;
    }

    AuxFrame* frame = registry_.find(id);
    if (!frame)
        throw FrameError(FrameFault::UnknownFrame,
                         "delivered event references missing frame " + std::to_string(id));

    std::optional<VirtualTime> stamp;
    if (frame->policy == ClockPolicy::PhysicalTime) stamp = frame->due_phys;

    std::vector<Value> args;
    switch (frame->kind) {
        case RfKind::NetworkCross:
            args.push_back(Value::integer(frame->magnitude));
            break;
        case RfKind::NetworkSame:
        case RfKind::VideoFrame:
            args.push_back(Value::integer(static_cast<std::int64_t>(frame->due_phys)));
            break;
        case RfKind::UserInput:
            args.push_back(Value::integer(frame->payload));
            break;
        default:
            break;  // Timer, ComputeSecret: no arguments
    }
    std::uint32_t fn = frame->callback;
    if (frame->kind == RfKind::UserInput) fn = named_handler(rf, "on_input");

    trace_deliver(rf, fetch_case, rf_kind_name(frame->kind), d.priority, stamp,
                  frame->kind == RfKind::UserInput ? std::optional(frame->payload) : std::nullopt);

    if (fn != kNoCallback) run_callback(rf, fn, std::move(args));

    // The callback may have cleared its own interval; decide from live state.
    frame = registry_.find(id);
    if (!frame) return;
    if (frame->repeating) {
        registry_.rearm(*frame);
        if (frame->policy != ClockPolicy::PhysicalTime) {
            frame->placeholder = rf.queue.push_placeholder(*frame->expected);
            placeholder_frame_[frame->placeholder] = id;
        }
        nlohmann::ordered_json detail;
        detail["kind"] = rf_kind_name(frame->kind);
        detail["due"] = frame->due_phys;
        if (frame->expected) detail["expected"] = *frame->expected;
        detail["rearm"] = true;
        trace_.append("spawn", now_of(rf), physical_.now(), id, std::move(detail));
    } else {
        registry_.erase(id);
    }
}

// fn == kNoCallback runs the top-level task.
void Runtime::run_callback(MainRf& rf, std::uint32_t fn, std::vector<Value> args) {
    MainRf* prev = current_;
    current_ = &rf;
    try {
        const TaskRef task = fn == kNoCallback ? TaskRef::top() : TaskRef::function(fn);
        rf.vm->run_task(task, std::move(args), config_.step_budget);
    } catch (...) {
        current_ = prev;
        throw;
    }
    current_ = prev;
}

std::uint32_t Runtime::named_handler(const MainRf& rf, std::string_view name) const {
    const auto idx = rf.program->function_index(name);
    if (!idx) return kNoCallback;
    const FunctionInfo& info = rf.program->functions[*idx];
    if (info.arity != 1)
        throw FrameError(FrameFault::PolicyMismatch,
                         std::string(name) + " must take exactly one parameter");
    return *idx;
}

std::uint64_t Runtime::spawn_frame(MainRf& rf, SpawnRequest req) {
    AuxFrame& frame = registry_.spawn(req, now_of(rf), physical_.now(), env_, config_.rf,
                                      config_.mode.kind, config_.frame_period);
    frame.owner = rf.id;
    if (frame.policy != ClockPolicy::PhysicalTime) {
        frame.placeholder = rf.queue.push_placeholder(*frame.expected);
        placeholder_frame_[frame.placeholder] = frame.id;
    }
    nlohmann::ordered_json detail;
    detail["kind"] = rf_kind_name(frame.kind);
    detail["due"] = frame.due_phys;
    if (frame.expected) detail["expected"] = *frame.expected;
    trace_.append("spawn", now_of(rf), physical_.now(), frame.id, std::move(detail));
    return frame.id;
}

void Runtime::trace_op(const MainRf& rf, const Opcode& op) {
    trace_.append("op", now_of(rf), physical_.now(), rf.id, op_name(op.op));
}

void Runtime::trace_deliver(const MainRf& rf, int fetch_case, std::string_view kind,
                            VirtualTime priority, std::optional<VirtualTime> stamp,
                            std::optional<std::int64_t> payload) {
    nlohmann::ordered_json detail;
    detail["case"] = fetch_case;
    detail["kind"] = std::string(kind);
    detail["priority"] = priority;
    if (stamp) detail["stamp"] = *stamp;
    if (payload) detail["payload"] = *payload;
    trace_.append("deliver", now_of(rf), physical_.now(), rf.id, std::move(detail));
}

void Runtime::on_opcode(const Opcode& op) {
    MainRf& rf = *current_;
    rf.clock.tick();
    charge_physical(env_.opcode_cost(op.op));
    trace_op(rf, op);
}

std::int64_t Runtime::want_int(const Value& v, const char* what) {
    if (v.kind != Value::Kind::Int)
        throw VmTrapError(Trap::TypeMismatch, std::string(what) + " must be an integer");
    return v.i;
}

std::int64_t Runtime::want_non_negative(const Value& v, const char* what) {
    const std::int64_t i = want_int(v, what);
    if (i < 0)
        throw VmTrapError(Trap::InvalidArgument, std::string(what) + " must be non-negative");
    return i;
}

Value Runtime::on_builtin(Builtin builtin, std::vector<Value>&& args) {
    MainRf& rf = *current_;
    switch (builtin) {
        case Builtin::Now: return builtin_now(rf);
        case Builtin::Output: return builtin_output(rf, args);
        case Builtin::SetTimeout: return builtin_set_timer(rf, args, false);
        case Builtin::SetInterval: return builtin_set_timer(rf, args, true);
        case Builtin::ClearInterval: return builtin_clear_interval(rf, args);
        case Builtin::Fetch: return builtin_fetch(rf, args);
        case Builtin::SecretSync: return builtin_secret_sync(rf, args);
        case Builtin::SecretAsync: return builtin_secret_async(rf, args);
        case Builtin::RequestFrame: return builtin_request_frame(rf, args);
    }
    throw std::logic_error("unknown builtin");
}

Value Runtime::builtin_now(MainRf& rf) {
    const VirtualTime t = script_now(rf);
    if (t > static_cast<VirtualTime>(INT64_MAX)) throw ClockOverflowError();
    return Value::integer(static_cast<std::int64_t>(t));
}

Value Runtime::builtin_output(MainRf& rf, std::vector<Value>& args) {
    OutputRecord rec;
    rec.main = now_of(rf);
    rec.phys = physical_.now();
    rec.value = args[0];
    if (args[0].kind == Value::Kind::Str) rec.text = rf.program->strings[args[0].s];

    nlohmann::ordered_json detail;
    switch (args[0].kind) {
        case Value::Kind::Int: detail["value"] = args[0].i; break;
        case Value::Kind::Str: detail["value"] = rec.text; break;
        case Value::Kind::Unit: detail["value"] = nullptr; break;
    }
    trace_.append("out", rec.main, rec.phys, rf.id, std::move(detail));
    report_.outputs.push_back(std::move(rec));
    return Value::unit();
}

Value Runtime::builtin_set_timer(MainRf& rf, std::vector<Value>& args, bool repeating) {
    SpawnRequest req;
    req.kind = RfKind::Timer;
    req.callback = static_cast<std::uint32_t>(want_int(args[0], "timer callback"));
    req.delay = static_cast<VirtualTime>(want_non_negative(args[1], "timer delay"));
    req.repeating = repeating;
    return Value::integer(static_cast<std::int64_t>(spawn_frame(rf, std::move(req))));
}

Value Runtime::builtin_clear_interval(MainRf& rf, std::vector<Value>& args) {
    const std::int64_t raw = want_int(args[0], "timer id");
    if (raw < 0) return Value::unit();
    AuxFrame* frame = registry_.find(static_cast<std::uint64_t>(raw));
    if (!frame || frame->kind != RfKind::Timer || frame->owner != rf.id) return Value::unit();
    if (frame->completed) {
        // Already in the queue: that firing still happens, but it is the last.
        frame->repeating = false;
        return Value::unit();
    }
    if (frame->placeholder != 0 && rf.queue.placeholder_pending(frame->placeholder)) {
        rf.queue.cancel_placeholder(frame->placeholder);
        placeholder_frame_.erase(frame->placeholder);
    }
    registry_.erase(frame->id);
    return Value::unit();
}

Value Runtime::builtin_fetch(MainRf& rf, std::vector<Value>& args) {
    if (args[0].kind != Value::Kind::Str)
        throw VmTrapError(Trap::TypeMismatch, "fetch origin must be a string");
    const std::string& origin = rf.program->strings[args[0].s];
    if (!config_.origin_known(origin))
        throw FrameError(FrameFault::UnknownOrigin, "origin '" + origin + "' is not known");

    SpawnRequest req;
    req.kind = origin == config_.origin ? RfKind::NetworkSame : RfKind::NetworkCross;
    req.origin = origin;
    req.magnitude = want_non_negative(args[1], "fetch size");
    req.callback = static_cast<std::uint32_t>(want_int(args[2], "fetch callback"));
    return Value::integer(static_cast<std::int64_t>(spawn_frame(rf, std::move(req))));
}

Value Runtime::builtin_secret_sync(MainRf& rf, std::vector<Value>& args) {
    const std::int64_t work = want_non_negative(args[0], "secret work");
    // Synchronous secret work: the observer is charged one flat dom-op
    // constant while the real cost lands on the physical clock only.
    if (config_.mode.kind == ClockMode::Kind::Deterministic)
        rf.clock.fast_forward(vt_add(rf.clock.read_now(), config_.rf.dom));
    charge_physical(env_.service_time(RfKind::ComputeSecret, work));
    return Value::unit();
}

Value Runtime::builtin_secret_async(MainRf& rf, std::vector<Value>& args) {
    SpawnRequest req;
    req.kind = RfKind::ComputeSecret;
    req.magnitude = want_non_negative(args[0], "secret work");
    req.callback = static_cast<std::uint32_t>(want_int(args[1], "secret callback"));
    return Value::integer(static_cast<std::int64_t>(spawn_frame(rf, std::move(req))));
}

Value Runtime::builtin_request_frame(MainRf& rf, std::vector<Value>& args) {
    SpawnRequest req;
    req.kind = RfKind::VideoFrame;
    req.callback = static_cast<std::uint32_t>(want_int(args[0], "frame callback"));
    return Value::integer(static_cast<std::int64_t>(spawn_frame(rf, std::move(req))));
}

OracleReport Runtime::oracle_report() const {
    if (!completed_) throw NotRunError();
    return report_;
}

}  // namespace detloop
