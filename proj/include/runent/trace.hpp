#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace runent {

// Execution traces are line-oriented UTF-8 text, one event per line:
//
//     <id> <IN|OUT> <function> <timestamp>
//
// with exactly 4 whitespace-separated fields. Blank lines and lines whose
// first non-blank character is '#' are ignored. Event ids are positive and
// strictly increasing, timestamps are non-negative integer ticks and
// non-decreasing in file order. Function names are any non-whitespace bytes.

enum class EventKind { In, Out };

struct TraceEvent {
    std::int64_t id = 0;
    EventKind kind = EventKind::In;
    std::string function;
    std::int64_t timestamp = 0;

    bool operator==(const TraceEvent&) const = default;
};

struct Trace {
    std::vector<TraceEvent> events;
    std::string source_id;  // opaque run identifier
};

// Counters reported by lenient parsing/repair.
struct RepairStats {
    int skipped_lines = 0;  // unparseable or out-of-order lines dropped
    int dropped_outs = 0;   // OUT events without a matching open frame
    int closed_frames = 0;  // frames force-closed at the final timestamp

    bool any() const { return skipped_lines != 0 || dropped_outs != 0 || closed_frames != 0; }
};

// function -> exclusive duration in ticks (frame time minus direct-callee time)
using DurationTable = std::map<std::string, std::int64_t>;

// (caller, callee) -> number of invocations
using CallCountTable = std::map<std::pair<std::string, std::string>, std::int64_t>;

// Parses one event line. Returns false for blank/comment lines, throws
// MalformedLine for anything else that is not a well-formed event.
bool parse_trace_line(std::string_view line, int line_no, TraceEvent& out);

// Strict parse: throws MalformedLine / NonMonotonicTimestamp.
Trace parse_trace(std::istream& in, std::string source_id = {});
Trace parse_trace(const std::string& text, std::string source_id = {});

// Lenient parse: drops offending lines instead of throwing and counts them.
Trace parse_trace_lenient(std::istream& in, std::string source_id, RepairStats& stats);
Trace parse_trace_lenient(const std::string& text, std::string source_id, RepairStats& stats);

std::string trace_to_text(const Trace& trace);

// Lenient balance repair: unmatched OUT events are dropped and frames still
// open at end-of-trace are closed at the final event's timestamp. Crashed
// runs produce truncated traces; this makes them analyzable.
Trace repair_trace(const Trace& trace, RepairStats& stats);

// Exclusive duration per function: per frame, (OUT ts - IN ts) minus the
// spans of its direct children, summed over all frames of the same name.
// Throws UnbalancedTrace if the trace does not obey stack discipline.
DurationTable compute_durations(const Trace& trace);

// Invocation edges: every IN entered while another frame is open adds one
// count to (enclosing function -> entered function).
CallCountTable compute_call_counts(const Trace& trace);

}  // namespace runent
