#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ttcc/engine.hpp"
#include "ttcc/validators.hpp"

namespace ttcc {

// One JSON object per tick: {tick, input, told[], store, events[], inconsistent}.
// Canonical constraint printing keeps re-runs byte-identical.
std::string trace_to_jsonl(const Trace& trace, const std::vector<avio::TraceEvent>& events);
void write_trace(std::ostream& out, const Trace& trace,
                 const std::vector<avio::TraceEvent>& events);

struct RawRecord {
    std::int64_t tick = 0;
    std::string input;
    std::string store;
    std::vector<std::string> told;
    bool inconsistent = false;
};

std::vector<RawRecord> read_trace(std::istream& in);

struct ReplayIssue {
    std::int64_t tick = 0;
    std::string what;
};

// Re-derives each record's obligations: the store entails the input and every
// told constraint (hidden locals projected on both sides), and every told
// atom appears in the store text. Exhaustive-oracle entailment where the
// valuation space fits the budget, the exact propagation search otherwise.
std::vector<ReplayIssue> replay_trace(const std::vector<RawRecord>& records,
                                      const SolveConfig& cfg);

} // namespace ttcc
