#include "runent/trace.hpp"

#include "runent/errors.hpp"

#include <charconv>
#include <istream>
#include <sstream>

namespace runent {

namespace {

constexpr std::string_view kWhitespace = " \t\r\v\f";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(kWhitespace);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(kWhitespace);
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto start = s.find_first_not_of(kWhitespace, pos);
        if (start == std::string_view::npos) break;
        auto end = s.find_first_of(kWhitespace, start);
        if (end == std::string_view::npos) end = s.size();
        out.push_back(s.substr(start, end - start));
        pos = end;
    }
    return out;
}

bool parse_int(std::string_view tok, std::int64_t& out) {
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end;
}

Trace parse_impl(std::istream& in, std::string source_id, bool lenient, RepairStats* stats) {
    Trace trace;
    trace.source_id = std::move(source_id);
    std::string line;
    int line_no = 0;
    std::int64_t last_id = 0;
    std::int64_t last_ts = -1;
    while (std::getline(in, line)) {
        ++line_no;
        TraceEvent ev;
        try {
            if (!parse_trace_line(line, line_no, ev)) continue;
            if (ev.id <= last_id) throw MalformedLine(line_no, "event id not strictly increasing");
            if (ev.timestamp < last_ts) throw NonMonotonicTimestamp(line_no);
        } catch (const Error&) {
            if (!lenient) throw;
            if (stats != nullptr) ++stats->skipped_lines;
            continue;
        }
        last_id = ev.id;
        last_ts = ev.timestamp;
        trace.events.push_back(std::move(ev));
    }
    return trace;
}

}  // namespace

bool parse_trace_line(std::string_view line, int line_no, TraceEvent& out) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') return false;
    const auto fields = split_fields(body);
    if (fields.size() != 4) {
        throw MalformedLine(line_no,
                            "expected 4 fields, got " + std::to_string(fields.size()));
    }
    if (!parse_int(fields[0], out.id) || out.id <= 0) {
        throw MalformedLine(line_no, "bad event id '" + std::string(fields[0]) + "'");
    }
    if (fields[1] == "IN") {
        out.kind = EventKind::In;
    } else if (fields[1] == "OUT") {
        out.kind = EventKind::Out;
    } else {
        throw MalformedLine(line_no, "unknown label '" + std::string(fields[1]) + "'");
    }
    out.function.assign(fields[2]);
    if (!parse_int(fields[3], out.timestamp) || out.timestamp < 0) {
        throw MalformedLine(line_no, "bad timestamp '" + std::string(fields[3]) + "'");
    }
    return true;
}

Trace parse_trace(std::istream& in, std::string source_id) {
    return parse_impl(in, std::move(source_id), false, nullptr);
}

Trace parse_trace(const std::string& text, std::string source_id) {
    std::istringstream in(text);
    return parse_trace(in, std::move(source_id));
}

Trace parse_trace_lenient(std::istream& in, std::string source_id, RepairStats& stats) {
    return parse_impl(in, std::move(source_id), true, &stats);
}

Trace parse_trace_lenient(const std::string& text, std::string source_id, RepairStats& stats) {
    std::istringstream in(text);
    return parse_trace_lenient(in, std::move(source_id), stats);
}

std::string trace_to_text(const Trace& trace) {
    std::string out;
    for (const auto& ev : trace.events) {
        out += std::to_string(ev.id);
        out += ev.kind == EventKind::In ? " IN " : " OUT ";
        out += ev.function;
        out += ' ';
        out += std::to_string(ev.timestamp);
        out += '\n';
    }
    return out;
}

Trace repair_trace(const Trace& trace, RepairStats& stats) {
    Trace out;
    out.source_id = trace.source_id;
    std::vector<std::string> stack;
    std::int64_t max_id = 0;
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::In) {
            stack.push_back(ev.function);
        } else {
            if (stack.empty() || stack.back() != ev.function) {
                ++stats.dropped_outs;
                continue;
            }
            stack.pop_back();
        }
        max_id = std::max(max_id, ev.id);
        out.events.push_back(ev);
    }
    if (!stack.empty()) {
        const std::int64_t final_ts = out.events.back().timestamp;
        while (!stack.empty()) {
            out.events.push_back({++max_id, EventKind::Out, stack.back(), final_ts});
            stack.pop_back();
            ++stats.closed_frames;
        }
    }
    return out;
}

namespace {

struct OpenFrame {
    std::string function;
    std::int64_t in_ts = 0;
    std::int64_t child_span = 0;  // summed (OUT-IN) of direct children
};

}  // namespace

DurationTable compute_durations(const Trace& trace) {
    DurationTable table;
    std::vector<OpenFrame> stack;
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::In) {
            stack.push_back({ev.function, ev.timestamp, 0});
            continue;
        }
        if (stack.empty() || stack.back().function != ev.function) {
            throw UnbalancedTrace("OUT '" + ev.function + "' (event " +
                                  std::to_string(ev.id) + ") has no matching IN");
        }
        const OpenFrame frame = std::move(stack.back());
        stack.pop_back();
        const std::int64_t span = ev.timestamp - frame.in_ts;
        table[frame.function] += span - frame.child_span;
        if (!stack.empty()) stack.back().child_span += span;
    }
    if (!stack.empty()) {
        throw UnbalancedTrace(std::to_string(stack.size()) +
                              " frame(s) still open at end of trace");
    }
    return table;
}

CallCountTable compute_call_counts(const Trace& trace) {
    CallCountTable table;
    std::vector<std::string> stack;
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::In) {
            if (!stack.empty()) ++table[{stack.back(), ev.function}];
            stack.push_back(ev.function);
            continue;
        }
        if (stack.empty() || stack.back() != ev.function) {
            throw UnbalancedTrace("OUT '" + ev.function + "' (event " +
                                  std::to_string(ev.id) + ") has no matching IN");
        }
        stack.pop_back();
    }
    if (!stack.empty()) {
        throw UnbalancedTrace(std::to_string(stack.size()) +
                              " frame(s) still open at end of trace");
    }
    return table;
}

}  // namespace runent
