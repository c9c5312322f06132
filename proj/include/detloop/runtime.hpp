#pragma once

#include "detloop/clocks.hpp"
#include "detloop/config.hpp"
#include "detloop/env.hpp"
#include "detloop/equeue.hpp"
#include "detloop/frames.hpp"
#include "detloop/program.hpp"
#include "detloop/trace.hpp"
#include "detloop/vm.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detloop {

// A message sent between the two main frames by the harness. `sent_at` is the
// sender's main-clock reading at the moment of sending; the receiver orders
// the delivery against its own clock (see Runtime::send_cross_frame).
struct CrossFrameMessage {
    std::uint64_t sender = 0;
    std::uint64_t receiver = 1;
    std::int64_t payload = 0;
    VirtualTime sent_at = 0;
};

// One output() call as the script observed it (main) and as the host saw it
// (phys). `text` carries the string content when the value is a string.
struct OutputRecord {
    VirtualTime main = 0;
    VirtualTime phys = 0;
    Value value{};
    std::string text;
};

// Dual stamps of one delivered event, in delivery order.
struct DeliveryStamp {
    VirtualTime main = 0;
    VirtualTime phys = 0;
};

// Ground-truth view of a finished run: what a wall clock would have measured,
// next to what the script could measure. Attack verdicts compare the two.
struct OracleReport {
    VirtualTime total_physical = 0;
    VirtualTime total_main = 0;  // main frame 0's clock at halt
    std::vector<DeliveryStamp> deliveries;
    std::vector<OutputRecord> outputs;
};

// The event-loop runtime: one or two main frames (each a scripting VM with a
// private deterministic clock and event queue), a shared physical clock, and
// a registry of auxiliary frames doing timed work. In deterministic mode the
// main clock advances one `unit` per executed opcode and jumps only through
// queue delivery (fast-forward); in legacy mode the scripts read the shared
// physical clock (quantized by `grain`) and every auxiliary frame completes
// at its physical due time.
//
// Lifecycle: construct, load() (and optionally load_second()), queue any
// scripted inputs or cross-frame messages, run(), then read trace() and
// oracle_report(). run() may be called again after queueing more work.
class Runtime final : public VmHost {
public:
    explicit Runtime(RuntimeConfig config);
    ~Runtime() override;

    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    // Compiles `source` into main frame 0 and queues its top-level task at
    // priority 0. Must be called exactly once before run().
    void load(std::string_view source);

    // Compiles a second script into main frame 1 (id 1), with its own clock
    // and queue, sharing the physical clock. Optional.
    void load_second(std::string_view source);

    // Schedules a user-input event for main frame 0 at an absolute physical
    // time (clamped to now if already past). At delivery the script's
    // `on_input(value)` function runs, if defined.
    void inject_input(VirtualTime at_phys, std::int64_t value);

    // Hands a message to the receiver frame. If `sent_at` is ahead of the
    // receiver's clock, the event is queued at priority `sent_at` and the
    // receiver's clock fast-forwards to it on delivery; otherwise it is
    // delivered at the receiver's current clock, which does not move. The
    // receiver handles it in `on_message(payload)`.
    void send_cross_frame(const CrossFrameMessage& msg);

    // Drives the loop until every queue is empty and no auxiliary frame is
    // in flight. Throws PhysicalBudgetExceeded if the physical clock would
    // pass `physical_budget`. Returns the trace accumulated so far.
    const Trace& run(VirtualTime physical_budget = kDefaultPhysicalBudget);

    const Trace& trace() const { return trace_; }

    // Ground truth for a completed run; NotRunError before run() finishes.
    OracleReport oracle_report() const;

    VirtualTime physical_now() const;
    VirtualTime main_now(std::uint64_t rf = 0) const;
    std::uint64_t opcode_count(std::uint64_t rf = 0) const;

    const RuntimeConfig& config() const { return config_; }

    // VmHost: one opcode executed by the currently running main frame.
    void on_opcode(const Opcode& op) override;
    Value on_builtin(Builtin builtin, std::vector<Value>&& args) override;

    static constexpr VirtualTime kDefaultPhysicalBudget = 4'000'000'000ULL;

private:
    struct MainRf {
        std::uint64_t id = 0;
        DeterministicClock clock;
        EventQueue queue;
        std::unique_ptr<Program> program;
        std::unique_ptr<Vm> vm;

        MainRf(std::uint64_t rf_id, VirtualTime unit) : id(rf_id), clock(0, unit) {}
    };

    MainRf& rf_checked(std::uint64_t id);
    const MainRf& rf_checked(std::uint64_t id) const;

    VirtualTime now_of(const MainRf& rf) const;   // trace / delivery stamp
    VirtualTime script_now(const MainRf& rf) const;  // what now() returns

    void charge_physical(VirtualTime delta);

    // Completes every frame whose due time has arrived, in (due, id) order:
    // deterministic-policy frames fill their reserved placeholder, physical
    // ones enter their owner's queue at the current physical time.
    void materialize_due();

    // Moves the physical clock toward `target`, stopping at the first frame
    // due time on the way (materializing it) so the caller re-decides.
    void advance_physical_to(VirtualTime target);

    // Delivers the queue front of `rf` (decision cases 1-2).
    void deliver(MainRf& rf, const FetchDecision& d);

    void run_callback(MainRf& rf, std::uint32_t fn, std::vector<Value> args);
    std::uint32_t named_handler(const MainRf& rf, std::string_view name) const;

    std::uint64_t spawn_frame(MainRf& rf, SpawnRequest req);
    void trace_op(const MainRf& rf, const Opcode& op);
    void trace_deliver(const MainRf& rf, int fetch_case, std::string_view kind,
                       VirtualTime priority, std::optional<VirtualTime> stamp,
                       std::optional<std::int64_t> payload);

    Value builtin_now(MainRf& rf);
    Value builtin_output(MainRf& rf, std::vector<Value>& args);
    Value builtin_set_timer(MainRf& rf, std::vector<Value>& args, bool repeating);
    Value builtin_clear_interval(MainRf& rf, std::vector<Value>& args);
    Value builtin_fetch(MainRf& rf, std::vector<Value>& args);
    Value builtin_secret_sync(MainRf& rf, std::vector<Value>& args);
    Value builtin_secret_async(MainRf& rf, std::vector<Value>& args);
    Value builtin_request_frame(MainRf& rf, std::vector<Value>& args);

    static std::int64_t want_int(const Value& v, const char* what);
    static std::int64_t want_non_negative(const Value& v, const char* what);

    RuntimeConfig config_;
    EnvironmentProfile env_;
    PhysicalClock physical_;
    FrameRegistry registry_;
    std::vector<std::unique_ptr<MainRf>> mains_;
    std::map<std::uint64_t, CrossFrameMessage> cross_;     // message id -> body
    std::map<std::uint64_t, std::uint64_t> placeholder_frame_;  // placeholder -> frame
    Trace trace_;
    OracleReport report_;
    MainRf* current_ = nullptr;  // frame whose task is executing
    VirtualTime physical_budget_ = kDefaultPhysicalBudget;
    bool completed_ = false;
};

}  // namespace detloop
