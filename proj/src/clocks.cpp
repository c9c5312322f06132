#include "detloop/clocks.hpp"

#include "detloop/errors.hpp"

#include <stdexcept>

namespace detloop {

VirtualTime vt_add(VirtualTime a, VirtualTime b) {
    VirtualTime r;
    if (__builtin_add_overflow(a, b, &r)) throw ClockOverflowError();
    return r;
}

VirtualTime vt_mul(VirtualTime a, VirtualTime b) {
    VirtualTime r;
    if (__builtin_mul_overflow(a, b, &r)) throw ClockOverflowError();
    return r;
}

VirtualTime vt_sub(VirtualTime a, VirtualTime b) {
    if (b > a) throw ClockOverflowError();
    return a - b;
}

DeterministicClock::DeterministicClock(VirtualTime t_start, VirtualTime unit)
    : t_start_(t_start), unit_(unit) {
    if (unit == 0) throw std::invalid_argument("clock unit must be positive");
}

void DeterministicClock::tick() {
    if (count_ == UINT64_MAX) throw ClockOverflowError();
    ++count_;
    (void)read_now();  // force the overflow check at the new count
}

void DeterministicClock::fast_forward(VirtualTime target) {
    VirtualTime now = read_now();
    if (target < now) throw TargetInPastError(now, target);
    t_start_ = vt_add(t_start_, target - now);
}

}  // namespace detloop
