#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ttcc/engine.hpp"
#include "ttcc/process.hpp"

namespace ttcc::avio {

// Temporal parameters of a partition on a module or a frame on a dataflow
// link: offset, duration (frame length), period. Offsets may exceed the
// period; instance k is dispatched at offset + k * period.
struct ScheduleTriple {
    std::int64_t offset = 0;
    std::int64_t duration = 1;
    std::int64_t period = 1;
    friend bool operator==(const ScheduleTriple&, const ScheduleTriple&) = default;
};

struct PartitionSpec {
    std::string name;
    std::string module;
    ScheduleTriple schedule;
    Constraint guard;  // input condition checked at the window start
    Constraint result; // x = r, told at the window end
    bool queuing = false;
};

struct ModuleSpec {
    std::string name;
    std::vector<PartitionSpec> partitions;
};

struct DataflowLink {
    std::string from, to;
    friend bool operator==(const DataflowLink&, const DataflowLink&) = default;
    friend bool operator<(const DataflowLink& a, const DataflowLink& b) {
        return std::tie(a.from, a.to) < std::tie(b.from, b.to);
    }
};

std::string link_text(const DataflowLink& l); // "[M1,SW1]"

struct DataflowPath {
    std::vector<std::string> vertices; // sender end system ... receiver end system
};

struct VirtualLink {
    std::string name;
    std::vector<DataflowPath> paths; // all share the sender
};

struct Topology {
    std::set<std::string> end_systems;
    std::set<std::string> switches;
    std::vector<DataflowLink> links; // both directions exist per physical edge
    std::map<std::string, VirtualLink> virtual_links;

    bool has_vertex(const std::string& v) const;
    bool has_link(const DataflowLink& l) const;
};

struct FrameHop {
    DataflowLink link;
    std::int64_t offset = 0;
    Constraint guard;
    Constraint result;
};

struct FrameSpec {
    std::string name;
    std::string virtual_link;
    std::int64_t length = 1; // fixed along the virtual link
    std::int64_t period = 1; // fixed along the virtual link
    std::vector<FrameHop> hops;
    bool queuing = false;

    const FrameHop* hop_on(const DataflowLink& l) const;
    ScheduleTriple triple_on(const DataflowLink& l) const; // UnknownLinkError
};

struct LatencyConstraint {
    enum class Kind { Elementary, EndToEnd };
    Kind kind = Kind::EndToEnd;
    std::string name;
    std::string stimulus;           // end-to-end: variable injected by the environment
    std::vector<std::string> chain; // partition and frame names, dataflow order
    std::int64_t deadline = 0;
};

struct NetworkConfig {
    std::int64_t max_hopdelay = 0; // upper bound of single-hop latency
};

struct SystemSpec {
    Domain domain;
    std::vector<ModuleSpec> modules;
    Topology topology;
    std::vector<FrameSpec> frames;
    NetworkConfig network;
    std::vector<LatencyConstraint> latencies;

    const PartitionSpec* find_partition(const std::string& name) const;
    const FrameSpec* find_frame(const std::string& name) const;
};

// Structural integrity: unique names, links and paths resolve, virtual links
// share their sender, frame hops stay on their virtual link, result shapes.
void validate_spec(const SystemSpec& sys);

// Trace decoration metadata emitted by the compiler: which told variable
// marks the completion of which partition or frame hop.
struct EventMeta {
    enum class Kind { Partition, FrameHop };
    Kind kind = Kind::Partition;
    std::string owner;         // partition or frame name
    std::string link;          // frame hops: link_text of the hop
    std::string result_var;    // base variable written at completion
    std::int64_t duration = 0; // completion tick minus start tick
};

struct CompiledSystem {
    Process process;
    std::vector<EventMeta> events;
    std::set<std::string> variables; // persistent streams, initialized to 0
};

enum class WfMode {
    Strict,  // offset_next - offset_prev >= max_hopdelay, literally
    Modular, // ((offset_next - offset_prev) mod period) >= max_hopdelay, nonzero
};

// Process compilers mirroring the partition / module / frame / link / network
// / full-system composition shapes. Schedule predicates are evaluated at
// compile time and embedded as constant guards; latency is verified on the
// simulated trace afterwards, so the full-system guard compiles to true.
Process compile_partition(const PartitionSpec& p);
Process compile_module(const ModuleSpec& m);
Process compile_frame(const FrameSpec& f, const DataflowLink& link);
Process compile_datalink(const SystemSpec& sys, const DataflowLink& link);
Process compile_ima(const SystemSpec& sys);
Process compile_network(const SystemSpec& sys, WfMode mode = WfMode::Modular);
CompiledSystem compile_system(const SystemSpec& sys, WfMode mode = WfMode::Modular);

} // namespace ttcc::avio
