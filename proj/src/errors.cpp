#include "detloop/errors.hpp"

namespace detloop {

const char* trap_name(Trap t) {
    switch (t) {
        case Trap::StackUnderflow: return "stack underflow";
        case Trap::DivisionByZero: return "division by zero";
        case Trap::BadJump: return "bad jump";
        case Trap::IntegerOverflow: return "integer overflow";
        case Trap::TypeMismatch: return "type mismatch";
        case Trap::InvalidArgument: return "invalid argument";
        case Trap::CallDepthExceeded: return "call depth exceeded";
    }
    return "unknown trap";
}

}  // namespace detloop
