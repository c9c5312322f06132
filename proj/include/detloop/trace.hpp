#pragma once

#include "detloop/clocks.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace detloop {

// One dual-clock trace record. Kinds:
//   "op"      one executed opcode; detail is the mnemonic string
//   "deliver" a queue delivery; detail: {"case","kind","priority"[,"stamp"]}
//   "spawn"   an auxiliary frame creation; detail: {"kind","due"[,"expected"]}
//   "out"     the output builtin; detail: {"value": ...}
// `frame` is the id of the frame the record belongs to (0/1 = main frames).
struct TraceRecord {
    std::string k;
    VirtualTime main = 0;
    VirtualTime phys = 0;
    std::uint64_t frame = 0;
    nlohmann::ordered_json detail;
};

struct Trace {
    std::vector<TraceRecord> records;

    void append(std::string k, VirtualTime main, VirtualTime phys, std::uint64_t frame,
                nlohmann::ordered_json detail);

    // Byte-stable JSON Lines: fixed key order, compact separators, one record
    // per line. Identical traces serialize to identical bytes.
    std::string to_jsonl() const;
    void write_file(const std::string& path) const;

    // Throws TraceFormatError (with a line number) on malformed input.
    static Trace from_jsonl(std::istream& in);
    static Trace from_file(const std::string& path);
};

// Replay check: the main-clock columns of the two traces' "op" records must
// be equal up to a single constant offset (second minus first).
struct TraceDiff {
    bool ok = false;
    std::int64_t offset = 0;       // meaningful when ok (0 when either trace has no ops)
    std::size_t divergence = 0;    // op-record index of the first mismatch when !ok
    std::string message;
};

TraceDiff diff_op_columns(const Trace& a, const Trace& b);

}  // namespace detloop
