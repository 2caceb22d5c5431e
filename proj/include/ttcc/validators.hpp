#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttcc/avionics.hpp"
#include "ttcc/engine.hpp"

namespace ttcc::avio {

struct Violation {
    enum class Kind { CF, WF, SR, LT };
    Kind kind = Kind::CF;
    std::vector<std::string> participants;
    std::vector<std::int64_t> instants; // instants or offsets involved
    std::string explanation;
};

struct CheckResult {
    bool ok = true;
    std::vector<Violation> violations;
};

const char* violation_kind_text(Violation::Kind k);

// MAjor time Frame: least common multiple of the schedule periods.
std::int64_t maf(std::span<const ScheduleTriple> schedules);

struct NamedTriple {
    std::string name;
    ScheduleTriple s;
};

// Mutual exclusion of execution windows [t*period + offset, +duration) for
// every pair of entries, instances unfolded across the MAF. Windows that
// merely touch do not conflict.
CheckResult contention_free(const std::vector<NamedTriple>& entries);

// Dispatch offsets on adjacent datalinks of every frame path leave at least
// max_hopdelay time units per hop.
CheckResult well_formed_paths(const SystemSpec& sys, WfMode mode);

// Every relaying vertex dispatches a frame on all its outgoing links of the
// virtual link at the same offset.
CheckResult simultaneous_relay(const SystemSpec& sys);

// CF over every module's partitions and every datalink's frames, as bundled
// by the validate command.
CheckResult contention_free_system(const SystemSpec& sys);

struct TraceEvent {
    std::string kind; // partition_start, partition_end, frame_dispatch, frame_arrival
    std::string name;
    std::string link; // frame events only
    std::int64_t tick = 0;
};

// Events are reconstructed from told constraints on the compiler-designated
// result variables; completion at the telling tick, start duration earlier.
std::vector<TraceEvent> derive_events(const Trace& trace, const std::vector<EventMeta>& meta);

struct LatencyMeasure {
    std::string name;
    bool exercised = false;
    std::int64_t latency = 0;
    std::int64_t deadline = 0;
};

// Measures each declared latency constraint on the trace. Elementary: start
// of the producing partition execution to the end of the last receiving
// partition execution. End-to-end: stimulus injection tick to the completion
// of the final chain element. A chain the trace never exhibits is reported as
// a violation, never silently passed.
CheckResult latency_ok(const SystemSpec& sys, const Trace& trace,
                       const std::vector<EventMeta>& meta,
                       std::vector<LatencyMeasure>* measures = nullptr);

} // namespace ttcc::avio
