#include "detloop/trace.hpp"

#include "detloop/errors.hpp"

#include <fstream>
#include <sstream>

namespace detloop {

void Trace::append(std::string k, VirtualTime main, VirtualTime phys, std::uint64_t frame,
                   nlohmann::ordered_json detail) {
    records.push_back(TraceRecord{std::move(k), main, phys, frame, std::move(detail)});
}

std::string Trace::to_jsonl() const {
    std::string out;
    for (const TraceRecord& r : records) {
        nlohmann::ordered_json line;
        line["k"] = r.k;
        line["main"] = r.main;
        line["phys"] = r.phys;
        line["frame"] = r.frame;
        line["detail"] = r.detail;
        out += line.dump();
        out += '\n';
    }
    return out;
}

void Trace::write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open trace file for writing: " + path);
    f << to_jsonl();
}

Trace Trace::from_jsonl(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::ordered_json doc;
        try {
            doc = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw TraceFormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!doc.is_object() || !doc.contains("k") || !doc.contains("main") ||
            !doc.contains("phys") || !doc.contains("frame") || !doc.contains("detail"))
            throw TraceFormatError("line " + std::to_string(lineno) +
                                   ": record must have k/main/phys/frame/detail");
        if (!doc["k"].is_string() || !doc["main"].is_number_unsigned() ||
            !doc["phys"].is_number_unsigned() || !doc["frame"].is_number_unsigned())
            throw TraceFormatError("line " + std::to_string(lineno) + ": bad field type");
        trace.records.push_back(TraceRecord{doc["k"].get<std::string>(),
                                            doc["main"].get<VirtualTime>(),
                                            doc["phys"].get<VirtualTime>(),
                                            doc["frame"].get<std::uint64_t>(), doc["detail"]});
    }
    return trace;
}

Trace Trace::from_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw TraceFormatError("cannot open trace file: " + path);
    return from_jsonl(f);
}

TraceDiff diff_op_columns(const Trace& a, const Trace& b) {
    std::vector<VirtualTime> ca, cb;
    for (const auto& r : a.records)
        if (r.k == "op") ca.push_back(r.main);
    for (const auto& r : b.records)
        if (r.k == "op") cb.push_back(r.main);

    TraceDiff d;
    if (ca.size() != cb.size()) {
        d.divergence = std::min(ca.size(), cb.size());
        d.message = "opcode record counts differ: " + std::to_string(ca.size()) + " vs " +
                    std::to_string(cb.size());
        return d;
    }
    if (ca.empty()) {
        d.ok = true;
        d.message = "no opcode records; trivially equal";
        return d;
    }
    // Signed offset of the second column relative to the first.
    std::int64_t offset = static_cast<std::int64_t>(cb[0]) - static_cast<std::int64_t>(ca[0]);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        std::int64_t want = static_cast<std::int64_t>(ca[i]) + offset;
        if (static_cast<std::int64_t>(cb[i]) != want) {
            d.divergence = i;
            std::ostringstream msg;
            msg << "divergence at opcode record " << i << ": " << ca[i] << " + (" << offset
                << ") != " << cb[i];
            d.message = msg.str();
            return d;
        }
    }
    d.ok = true;
    d.offset = offset;
    d.message = "constant offset " + std::to_string(offset) + " over " +
                std::to_string(ca.size()) + " opcode records";
    return d;
}

}  // namespace detloop
