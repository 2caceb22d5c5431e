#include "ttcc/avionics.hpp"

#include <algorithm>

#include "ttcc/validators.hpp"

namespace ttcc::avio {

std::string link_text(const DataflowLink& l) {
    return "[" + l.from + "," + l.to + "]";
}

bool Topology::has_vertex(const std::string& v) const {
    return end_systems.count(v) != 0 || switches.count(v) != 0;
}

bool Topology::has_link(const DataflowLink& l) const {
    return std::find(links.begin(), links.end(), l) != links.end();
}

const FrameHop* FrameSpec::hop_on(const DataflowLink& l) const {
    for (const auto& h : hops)
        if (h.link == l) return &h;
    return nullptr;
}

ScheduleTriple FrameSpec::triple_on(const DataflowLink& l) const {
    const FrameHop* h = hop_on(l);
    if (!h) throw UnknownLinkError("frame " + name + " has no hop on " + link_text(l));
    return ScheduleTriple{h->offset, length, period};
}

const PartitionSpec* SystemSpec::find_partition(const std::string& name) const {
    for (const auto& m : modules)
        for (const auto& p : m.partitions)
            if (p.name == name) return &p;
    return nullptr;
}

const FrameSpec* SystemSpec::find_frame(const std::string& name) const {
    for (const auto& f : frames)
        if (f.name == name) return &f;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Spec validation
// ---------------------------------------------------------------------------

namespace {

void check_triple(const std::string& owner, const ScheduleTriple& s) {
    if (s.period < 1) throw ConfigError(owner + ": period must be at least 1");
    if (s.duration < 1) throw ConfigError(owner + ": duration must be at least 1");
    if (s.duration > s.period) throw ConfigError(owner + ": duration exceeds period");
    if (s.offset < 0) throw ConfigError(owner + ": negative offset");
}

void check_result_shape(const std::string& owner, const Constraint& result) {
    if (result.kind() != Constraint::Kind::Atom || result.rel() != Rel::Eq ||
        !result.lhs().is_var())
        throw ConfigError(owner + ": result must be a single equality x = r");
}

// Chain elements follow the dataflow: a frame departs from the previous
// element's module and a partition sits on one of the previous frame's
// receiver modules. Elementary chains fan out: sender, frame, receivers.
void check_chain(const SystemSpec& sys, const LatencyConstraint& lc) {
    if (lc.chain.empty()) throw ConfigError("latency " + lc.name + ": empty chain");
    auto receivers = [&](const FrameSpec& f) {
        std::set<std::string> out;
        const VirtualLink& vl = sys.topology.virtual_links.at(f.virtual_link);
        for (const auto& p : vl.paths) out.insert(p.vertices.back());
        return out;
    };
    auto source = [&](const FrameSpec& f) {
        const VirtualLink& vl = sys.topology.virtual_links.at(f.virtual_link);
        return vl.paths.front().vertices.front();
    };
    for (const auto& elem : lc.chain) {
        if (!sys.find_partition(elem) && !sys.find_frame(elem))
            throw ConfigError("latency " + lc.name + ": unknown chain element " + elem);
    }
    if (lc.kind == LatencyConstraint::Kind::Elementary) {
        const PartitionSpec* sender =
            lc.chain.size() >= 3 ? sys.find_partition(lc.chain.front()) : nullptr;
        const FrameSpec* frame =
            lc.chain.size() >= 3 ? sys.find_frame(lc.chain[1]) : nullptr;
        if (!sender || !frame)
            throw ConfigError("latency " + lc.name +
                              ": elementary chain is sender, frame, receivers");
        if (source(*frame) != sender->module)
            throw ConfigError("latency " + lc.name + ": frame " + frame->name +
                              " does not originate at module " + sender->module);
        auto sinks = receivers(*frame);
        for (std::size_t i = 2; i < lc.chain.size(); ++i) {
            const PartitionSpec* r = sys.find_partition(lc.chain[i]);
            if (!r)
                throw ConfigError("latency " + lc.name + ": receiver " + lc.chain[i] +
                                  " is not a partition");
            if (!sinks.count(r->module))
                throw ConfigError("latency " + lc.name + ": module " + r->module +
                                  " is not a receiver of frame " + frame->name);
        }
        return;
    }
    std::set<std::string> prev_sinks;
    bool first = true;
    for (const auto& elem : lc.chain) {
        const PartitionSpec* p = sys.find_partition(elem);
        const FrameSpec* f = sys.find_frame(elem);
        std::set<std::string> here = p ? std::set<std::string>{p->module}
                                       : std::set<std::string>{source(*f)};
        if (!first) {
            bool connected = false;
            for (const auto& v : here) connected |= prev_sinks.count(v) != 0;
            if (!connected)
                throw ConfigError("latency " + lc.name + ": chain breaks at " + elem);
        }
        prev_sinks = p ? std::set<std::string>{p->module} : receivers(*f);
        first = false;
    }
}

} // namespace

void validate_spec(const SystemSpec& sys) {
    if (sys.domain.max < 2) throw ConfigError("domain max must be at least 2");

    std::set<std::string> names;
    for (const auto& m : sys.modules) {
        if (!names.insert(m.name).second) throw ConfigError("duplicate module " + m.name);
        if (m.partitions.empty()) throw ConfigError("module " + m.name + " has no partitions");
        for (const auto& p : m.partitions) {
            if (!names.insert(p.name).second)
                throw ConfigError("duplicate partition " + p.name);
            check_triple("partition " + p.name, p.schedule);
            check_result_shape("partition " + p.name, p.result);
        }
    }

    const Topology& topo = sys.topology;
    for (const auto& l : topo.links) {
        if (!topo.has_vertex(l.from) || !topo.has_vertex(l.to))
            throw UnknownLinkError("link " + link_text(l) + " references unknown vertex");
        DataflowLink reverse{l.to, l.from};
        if (!topo.has_link(reverse))
            throw ConfigError("missing reverse dataflow link " + link_text(reverse));
    }
    for (const auto& [vlname, vl] : topo.virtual_links) {
        if (vl.paths.empty())
            throw InconsistentVirtualLinkError("virtual link " + vlname + " has no paths");
        const std::string& sender = vl.paths.front().vertices.front();
        for (const auto& path : vl.paths) {
            if (path.vertices.size() < 2)
                throw InconsistentVirtualLinkError("virtual link " + vlname +
                                                   ": path shorter than one link");
            if (path.vertices.front() != sender)
                throw InconsistentVirtualLinkError("virtual link " + vlname +
                                                   ": paths do not share the sender");
            if (!topo.end_systems.count(path.vertices.front()) ||
                !topo.end_systems.count(path.vertices.back()))
                throw InconsistentVirtualLinkError(
                    "virtual link " + vlname + ": path endpoints must be end systems");
            for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) {
                DataflowLink l{path.vertices[i], path.vertices[i + 1]};
                if (!topo.has_link(l))
                    throw UnknownLinkError("virtual link " + vlname + ": path uses " +
                                           link_text(l) + " which is not a dataflow link");
            }
        }
    }

    for (const auto& f : sys.frames) {
        if (!names.insert(f.name).second) throw ConfigError("duplicate frame " + f.name);
        auto vlit = topo.virtual_links.find(f.virtual_link);
        if (vlit == topo.virtual_links.end())
            throw InconsistentVirtualLinkError("frame " + f.name +
                                               " references unknown virtual link " +
                                               f.virtual_link);
        std::set<DataflowLink> vl_links;
        for (const auto& path : vlit->second.paths)
            for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
                vl_links.insert(DataflowLink{path.vertices[i], path.vertices[i + 1]});
        if (f.hops.empty()) throw ConfigError("frame " + f.name + " has no hops");
        std::set<DataflowLink> seen;
        for (const auto& h : f.hops) {
            if (!topo.has_link(h.link))
                throw UnknownLinkError("frame " + f.name + " uses undeclared link " +
                                       link_text(h.link));
            if (!vl_links.count(h.link))
                throw InconsistentVirtualLinkError("frame " + f.name + ": link " +
                                                   link_text(h.link) +
                                                   " is outside its virtual link");
            if (!seen.insert(h.link).second)
                throw ConfigError("frame " + f.name + ": duplicate hop on " +
                                  link_text(h.link));
            check_triple("frame " + f.name + " on " + link_text(h.link),
                         ScheduleTriple{h.offset, f.length, f.period});
            check_result_shape("frame " + f.name + " on " + link_text(h.link), h.result);
        }
    }

    if (sys.network.max_hopdelay < 0) throw ConfigError("negative max_hopdelay");
    for (const auto& lc : sys.latencies) check_chain(sys, lc);
}

// ---------------------------------------------------------------------------
// Compilers
// ---------------------------------------------------------------------------

namespace {

// The shared partition/frame shape: periodic replication of an offset delay,
// a guard check, and the result told after the execution window.
Process schedule_term(const ScheduleTriple& s, const Constraint& guard,
                      const Constraint& result, bool queuing) {
    Process body = Process::ask(guard, Process::next(s.duration, Process::tell(result)));
    body = Process::next(s.offset, std::move(body));
    if (queuing)
        body = Process::local({result.lhs().name}, Constraint::truth(), std::move(body));
    return Process::rep(s.period, std::move(body));
}

Constraint gate(bool verdict) {
    return verdict ? Constraint::truth() : Constraint::falsity();
}

std::vector<NamedTriple> module_entries(const ModuleSpec& m) {
    std::vector<NamedTriple> entries;
    for (const auto& p : m.partitions) entries.push_back({p.name, p.schedule});
    return entries;
}

std::vector<NamedTriple> link_entries(const SystemSpec& sys, const DataflowLink& link) {
    std::vector<NamedTriple> entries;
    for (const auto& f : sys.frames)
        if (const FrameHop* h = f.hop_on(link))
            entries.push_back({f.name, ScheduleTriple{h->offset, f.length, f.period}});
    return entries;
}

// Datalinks that carry at least one frame, in deterministic order.
std::vector<DataflowLink> active_links(const SystemSpec& sys) {
    std::set<DataflowLink> links;
    for (const auto& f : sys.frames)
        for (const auto& h : f.hops) links.insert(h.link);
    return {links.begin(), links.end()};
}

} // namespace

Process compile_partition(const PartitionSpec& p) {
    return schedule_term(p.schedule, p.guard, p.result, p.queuing);
}

Process compile_module(const ModuleSpec& m) {
    std::vector<Process> parts;
    for (const auto& p : m.partitions) parts.push_back(compile_partition(p));
    bool cf = contention_free(module_entries(m)).ok;
    return Process::ask(gate(cf), Process::par(std::move(parts)));
}

Process compile_frame(const FrameSpec& f, const DataflowLink& link) {
    const FrameHop* h = f.hop_on(link);
    if (!h) throw UnknownLinkError("frame " + f.name + " has no hop on " + link_text(link));
    return schedule_term(ScheduleTriple{h->offset, f.length, f.period}, h->guard, h->result,
                         f.queuing);
}

Process compile_datalink(const SystemSpec& sys, const DataflowLink& link) {
    std::vector<Process> parts;
    for (const auto& f : sys.frames)
        if (f.hop_on(link)) parts.push_back(compile_frame(f, link));
    if (parts.empty()) throw UnknownLinkError("no frames on link " + link_text(link));
    bool cf = contention_free(link_entries(sys, link)).ok;
    return Process::ask(gate(cf), Process::par(std::move(parts)));
}

Process compile_ima(const SystemSpec& sys) {
    std::vector<Process> parts;
    for (const auto& m : sys.modules) parts.push_back(compile_module(m));
    return Process::par(std::move(parts));
}

Process compile_network(const SystemSpec& sys, WfMode mode) {
    std::vector<Process> parts;
    for (const auto& link : active_links(sys)) parts.push_back(compile_datalink(sys, link));
    bool wf = well_formed_paths(sys, mode).ok;
    bool sr = simultaneous_relay(sys).ok;
    return Process::ask(gate(wf && sr), Process::par(std::move(parts)));
}

CompiledSystem compile_system(const SystemSpec& sys, WfMode mode) {
    validate_spec(sys);
    CompiledSystem out;
    // Latency is measured on the simulated trace afterwards; the composition
    // gate compiles to true and the run reports any violation.
    out.process = Process::ask(
        Constraint::truth(),
        Process::par({compile_ima(sys), compile_network(sys, mode)}));
    for (const auto& m : sys.modules) {
        for (const auto& p : m.partitions) {
            p.guard.collect_free_vars(out.variables);
            p.result.collect_free_vars(out.variables);
            if (!p.queuing)
                out.events.push_back(EventMeta{EventMeta::Kind::Partition, p.name, "",
                                               p.result.lhs().name, p.schedule.duration});
        }
    }
    for (const auto& f : sys.frames) {
        for (const auto& h : f.hops) {
            h.guard.collect_free_vars(out.variables);
            h.result.collect_free_vars(out.variables);
            if (!f.queuing)
                out.events.push_back(EventMeta{EventMeta::Kind::FrameHop, f.name,
                                               link_text(h.link), h.result.lhs().name,
                                               f.length});
        }
    }
    return out;
}

} // namespace ttcc::avio
